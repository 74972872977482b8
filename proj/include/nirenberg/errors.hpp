#pragma once

#include <stdexcept>
#include <string>

namespace nirenberg {

// Failure conditions that cross module boundaries. The CLI maps these to
// exit codes; library code throws and never exits.
enum class Errc {
  invalid_band_limit,
  band_limit_mismatch,
  shape_mismatch,
  resolution_exceeded,
  slice_projection_failed,
  nonpositive_mass,
  not_a_singular_point,
  constant_input,
  not_in_cplus,
  not_a_solution,
  not_invariant,
  zero_input,
  classification_failed,
  undefined_degree,
  internal_inconsistency,
  step_failure,
  parse_error,
  config_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_band_limit: return "invalid-band-limit";
    case Errc::band_limit_mismatch: return "band-limit-mismatch";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::resolution_exceeded: return "resolution-exceeded";
    case Errc::slice_projection_failed: return "slice-projection-failed";
    case Errc::nonpositive_mass: return "nonpositive-mass";
    case Errc::not_a_singular_point: return "not-a-singular-point";
    case Errc::constant_input: return "constant-input";
    case Errc::not_in_cplus: return "not-in-Cplus";
    case Errc::not_a_solution: return "not-a-solution";
    case Errc::not_invariant: return "not-invariant";
    case Errc::zero_input: return "zero-input";
    case Errc::classification_failed: return "classification-failed";
    case Errc::undefined_degree: return "undefined-degree";
    case Errc::internal_inconsistency: return "internal-inconsistency";
    case Errc::step_failure: return "step-failure";
    case Errc::parse_error: return "parse-error";
    case Errc::config_error: return "config-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace nirenberg
