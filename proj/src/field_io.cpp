#include "nirenberg/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nirenberg/errors.hpp"

namespace nirenberg {
namespace io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json field_to_json(const SpectralField& f) {
  nlohmann::json j;
  j["lmax"] = f.lmax;
  j["basis"] = "real-orthonormal";
  nlohmann::json coeffs = nlohmann::json::array();
  for (int l = 0; l <= f.lmax; ++l)
    for (int m = -l; m <= l; ++m)
      if (f.at(l, m) != 0.0) coeffs.push_back({l, m, f.at(l, m)});
  j["coeffs"] = coeffs;
  return j;
}

SpectralField field_from_json(const nlohmann::json& j) {
  if (!j.contains("lmax") || !j["lmax"].is_number_integer())
    throw Error(Errc::parse_error, "field file needs integer lmax");
  int lmax = j["lmax"].get<int>();
  if (lmax < 0 || lmax > 512) throw Error(Errc::parse_error, "field lmax out of range");
  if (j.contains("basis") && j["basis"].get<std::string>() != "real-orthonormal")
    throw Error(Errc::parse_error, "unsupported basis");
  SpectralField f(lmax);
  if (j.contains("coeffs")) {
    for (const auto& row : j["coeffs"]) {
      if (!row.is_array() || row.size() != 3) throw Error(Errc::parse_error, "coeff rows are [l, m, value]");
      int l = row[0].get<int>();
      int m = row[1].get<int>();
      if (l < 0 || l > lmax || m < -l || m > l) throw Error(Errc::parse_error, "coeff index out of range");
      f.at(l, m) = row[2].get<double>();
    }
  }
  return f;
}

void write_field(const std::string& path, const SpectralField& f) { write_json_file(path, field_to_json(f)); }

SpectralField read_field(const std::string& path) { return field_from_json(parse_file(path)); }

void write_grid_csv(std::ostream& os, const GridField& v, const SphereGrid& g) {
  if (v.nlat != g.nlat || v.nlon != g.nlon) throw Error(Errc::shape_mismatch, "grid export");
  os << "colatitude,longitude,value\n";
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k)
      os << format_double(g.theta[j]) << ',' << format_double(g.phi(k)) << ',' << format_double(v.at(j, k))
         << '\n';
}

namespace {
void dump_rec(std::ostream& os, const nlohmann::json& j, int indent, int depth) {
  auto pad = [&](int d) {
    if (indent > 0) {
      os << '\n';
      for (int i = 0; i < d * indent; ++i) os << ' ';
    }
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        pad(depth + 1);
        os << '"' << it.key() << "\":";
        if (indent > 0) os << ' ';
        dump_rec(os, it.value(), indent, depth + 1);
      }
      if (!first) pad(depth);
      os << '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      os << '[';
      bool first = true;
      for (const auto& el : j) {
        if (!first) os << ',';
        first = false;
        pad(depth + 1);
        dump_rec(os, el, indent, depth + 1);
      }
      if (!first) pad(depth);
      os << ']';
      break;
    }
    case nlohmann::json::value_t::number_float:
      os << format_double(j.get<double>());
      break;
    default:
      os << j.dump();
  }
}
}  // namespace

void dump_json(std::ostream& os, const nlohmann::json& j, int indent) { dump_rec(os, j, indent, 0); }

std::string dump_json(const nlohmann::json& j) {
  std::ostringstream os;
  dump_rec(os, j, 0, 0);
  return os.str();
}

nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::parse_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(Errc::parse_error, std::string("bad JSON in ") + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::parse_error, "cannot write " + path);
  dump_json(out, j, 1);
  out << '\n';
}

}  // namespace io
}  // namespace nirenberg
