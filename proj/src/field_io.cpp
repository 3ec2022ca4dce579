#include "cdlab/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cdlab {

namespace {

constexpr char kMagic[8] = {'C', 'D', 'L', 'F', 'I', 'E', 'L', 'D'};

template <class T>
void put(std::ostream& os, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) throw std::runtime_error("field container is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void write_bundle(const std::filesystem::path& path, const FieldBundle& b, const nlohmann::json& meta) {
  const std::size_t per = b.grid.size() * (b.is_complex ? 2 : 1);
  for (const auto& c : b.components)
    if (c.size() != per) throw std::invalid_argument("component length does not match grid");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, b.grid.dim());
  put<std::uint32_t>(os, b.grid.nodes());
  put<std::uint32_t>(os, b.grid.steps());
  put<double>(os, b.grid.horizon());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(b.components.size()));
  put<std::uint32_t>(os, b.is_complex ? 1u : 0u);
  for (const auto& c : b.components)
    for (double v : c) put<double>(os, v);
  if (!os) throw std::runtime_error("write failed for " + path.string());

  nlohmann::json side = meta.is_object() ? meta : nlohmann::json::object();
  side["dim"] = b.grid.dim();
  side["nodes_per_axis"] = b.grid.nodes();
  side["time_steps"] = b.grid.steps();
  side["horizon"] = b.grid.horizon();
  side["components"] = b.components.size();
  side["complex"] = b.is_complex;
  std::ofstream js(sidecar_path(path));
  js << side.dump(2) << "\n";
}

FieldBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error("not a field container");
  const auto dim = get<std::uint32_t>(is);
  const auto n = get<std::uint32_t>(is);
  const auto m = get<std::uint32_t>(is);
  const auto T = get<double>(is);
  const auto count = get<std::uint32_t>(is);
  const auto cplx = get<std::uint32_t>(is);
  FieldBundle b{SpaceTimeGrid(static_cast<int>(dim), static_cast<int>(n), static_cast<int>(m), T), cplx != 0, {}};
  const std::size_t per = b.grid.size() * (b.is_complex ? 2 : 1);
  b.components.assign(count, std::vector<double>(per));
  for (auto& c : b.components)
    for (double& v : c) v = get<double>(is);
  return b;
}

FieldBundle to_bundle(const ScalarField& f) { return {f.grid(), false, {f.values()}}; }

FieldBundle to_bundle(const ComplexField& f) {
  std::vector<double> v(2 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    v[2 * i] = f.values()[i].real();
    v[2 * i + 1] = f.values()[i].imag();
  }
  return {f.grid(), true, {std::move(v)}};
}

FieldBundle to_bundle(const VectorField& F) {
  FieldBundle b{F.grid(), false, {}};
  for (int d = 0; d < F.dim(); ++d) b.components.push_back(F.component(d).values());
  return b;
}

ScalarField scalar_from_bundle(const FieldBundle& b) {
  if (b.is_complex || b.components.size() != 1) throw std::invalid_argument("container does not hold a real scalar");
  return ScalarField(b.grid, b.components[0]);
}

ComplexField complex_from_bundle(const FieldBundle& b) {
  if (!b.is_complex || b.components.size() != 1) throw std::invalid_argument("container does not hold a complex scalar");
  std::vector<Complex> v(b.grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {b.components[0][2 * i], b.components[0][2 * i + 1]};
  return ComplexField(b.grid, std::move(v));
}

VectorField vector_from_bundle(const FieldBundle& b, bool time_independent) {
  if (b.is_complex || static_cast<int>(b.components.size()) != b.grid.dim())
    throw std::invalid_argument("container does not hold a real vector field");
  std::vector<ScalarField> comps;
  for (const auto& c : b.components) comps.emplace_back(b.grid, c);
  return VectorField(std::move(comps), time_independent);
}

}  // namespace cdlab
