#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdlab/field.hpp"

namespace cdlab {

/// Contents of a binary field container.
///
/// Layout: 8-byte magic "CDLFIELD", then little-endian u32 dim, u32 N, u32 M,
/// f64 T, u32 component count, u32 complex flag, then for each component the
/// (M+1) N^n samples as f64 (real and imaginary parts interleaved when complex).
struct FieldBundle {
  SpaceTimeGrid grid{2, 8, 8, 1.0};
  bool is_complex = false;
  std::vector<std::vector<double>> components;
};

void write_bundle(const std::filesystem::path& path, const FieldBundle& b, const nlohmann::json& meta = {});
FieldBundle read_bundle(const std::filesystem::path& path);

/// Sidecar path: the container path with ".json" appended.
std::filesystem::path sidecar_path(const std::filesystem::path& path);

FieldBundle to_bundle(const ScalarField& f);
FieldBundle to_bundle(const ComplexField& f);
FieldBundle to_bundle(const VectorField& F);

ScalarField scalar_from_bundle(const FieldBundle& b);
ComplexField complex_from_bundle(const FieldBundle& b);
VectorField vector_from_bundle(const FieldBundle& b, bool time_independent);

}  // namespace cdlab
