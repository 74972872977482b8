#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <optional>
#include <vector>

#include "nirenberg/ops.hpp"

namespace nirenberg {
namespace morse {

using Vec3 = Eigen::Vector3d;

enum class CritType { maximum, minimum, saddle, degenerate };

inline const char* crit_type_name(CritType t) {
  switch (t) {
    case CritType::maximum: return "max";
    case CritType::minimum: return "min";
    case CritType::saddle: return "saddle";
    case CritType::degenerate: return "degenerate";
  }
  return "?";
}

struct CriticalPoint {
  Vec3 location;
  double value = 0.0;
  double grad_norm = 0.0;
  double hess_eig[2] = {0.0, 0.0};  // in an orthonormal tangent frame
  CritType type = CritType::degenerate;
  double lap = 0.0;  // Laplacian of the field at the point
  bool polished = true;
};

struct Tolerances {
  // |grad K| acceptance after polish, relative to the gradient scale.
  double grad_rel = 1e-8;
  // Region bands, relative to the sup norm of K (eps_c) and to the
  // Laplacian scale (eps_n).
  double eps_c_rel = 1e-6;
  double eps_n_rel = 1e-6;
  // Hessian degeneracy: |l1 l2| below this times the squared C^2 norm.
  double degenerate_rel = 1e-6;
  // Dedup radius in radians.
  double dedup_radius = 1e-3;
};

struct MorseReport {
  std::vector<CriticalPoint> points;

  // Totals (Euler count n_max - n_saddle + n_min = 2 when Morse).
  int n_max = 0, n_min = 0, n_saddle = 0, n_degenerate = 0;

  // Degree-formula counts: maxima with value above the positivity band, and
  // saddles with positive value split by the sign of the Laplacian.
  int m_pos = 0, s_plus = 0, s_minus = 0;

  bool positivity = false;  // K > 0 somewhere
  bool in_c = false;        // no local maximum inside the zero band
  bool in_n = false;        // every positive-value critical point has |Lap K| above band
  bool boundary_c = false;
  bool boundary_n = false;
  bool is_morse = false;

  std::vector<int> c_witnesses;  // indices into points
  std::vector<int> n_witnesses;

  std::optional<int> degree;  // defined when in_c && in_n && is_morse && positivity

  double eps_c = 0.0, eps_n = 0.0, grad_tol = 0.0;
  double knorm_inf = 0.0;
};

// All critical points at grid resolution: coarse scan on a 4x grid for local
// minima of |grad K|^2, Newton polish on the spectral gradient field,
// dedup. Throws constant-input for (numerically) constant fields.
std::vector<CriticalPoint> find_critical_points(const SpectralField& K, const SphereGrid& g,
                                                const Tolerances& tol = {});

// Critical points plus region membership, Euler/degree counts and flags.
MorseReport classify_regions(const SpectralField& K, const SphereGrid& g, const Tolerances& tol = {});

// deg = m_pos - s_minus - 1, cross-checked against the signed index sum over
// {grad K = 0, Lap K < 0, K > 0}. Throws undefined-degree when the report
// does not define one, internal-inconsistency when the two formulas differ.
int degree(const MorseReport& report);

nlohmann::json report_to_json(const MorseReport& report);

}  // namespace morse
}  // namespace nirenberg
