#pragma once

#include <json.hpp>
#include <ostream>
#include <string>

#include "nirenberg/spectral_field.hpp"
#include "nirenberg/sphere_grid.hpp"

namespace nirenberg {
namespace io {

// Field file format (bit-exact):
//   {"lmax": L, "basis": "real-orthonormal", "coeffs": [[l, m, value], ...]}
// Entries not listed are zero. Values are printed with 17 significant
// digits, which round-trips IEEE doubles exactly.
nlohmann::json field_to_json(const SpectralField& f);
SpectralField field_from_json(const nlohmann::json& j);

void write_field(const std::string& path, const SpectralField& f);
SpectralField read_field(const std::string& path);

// Grid export: CSV rows (colatitude, longitude, value).
void write_grid_csv(std::ostream& os, const GridField& v, const SphereGrid& g);

// Deterministic JSON dump: doubles rendered with %.17g, keys in insertion
// order (use ordered_json when building reports).
void dump_json(std::ostream& os, const nlohmann::json& j, int indent = 0);
std::string dump_json(const nlohmann::json& j);

std::string format_double(double v);

nlohmann::json parse_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace io
}  // namespace nirenberg
