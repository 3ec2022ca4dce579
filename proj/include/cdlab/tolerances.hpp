#pragma once

#include <map>
#include <string>
#include <vector>

namespace cdlab {

/// Named numerical thresholds. Defaults live in one place; experiments may
/// override individual entries by name.
class ToleranceTable {
 public:
  ToleranceTable();

  double get(const std::string& name) const;
  void set(const std::string& name, double value);
  bool has(const std::string& name) const { return values_.count(name) != 0; }
  std::vector<std::string> names() const;
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

}  // namespace cdlab
