#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "nirenberg/ops.hpp"

namespace nirenberg {
namespace obstruction {

using Vec3 = Eigen::Vector3d;

// The three integrals  integral <grad x_i, grad K> exp(2u) dv,  i = x, y, z.
// They vanish whenever K is the curvature of exp(2u) g_round, so their norm
// at a candidate pair is a necessary-condition residual.
Vec3 kw_vector(const SpectralField& K, const SpectralField& u, const SphereGrid& g);

struct Certificate {
  bool obstructed = false;
  Vec3 axis = Vec3::Zero();   // witnessing direction when obstructed
  double min_value = 0.0;     // min over the grid of <grad ell, grad K>
  double max_value = 0.0;
};

// Pointwise sign test: if <grad ell, grad K> >= 0 on the whole grid and > 0
// somewhere for some linear ell, no conformal factor can satisfy the
// necessary condition, so the equation is unsolvable for K. Checks the six
// coordinate directions plus any caller-supplied axes. Sound but not
// complete: `obstructed = false` is inconclusive.
Certificate sign_certificate(const SpectralField& K, const SphereGrid& g,
                             const std::vector<Vec3>& extra_axes = {});

struct SweepRow {
  double c = 0.0;
  bool certificate_fired = false;
  Vec3 axis = Vec3::Zero();
  bool solve_attempted = false;
  bool solve_converged = false;
  double kw_norm = 0.0;  // best over attempted solves, or 0
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> threshold;  // smallest c at which solvability is lost
};

// Evaluates sign_certificate(K + c <p, .>) over the grid of c values; the
// caller may run solves per row separately (the CLI does).
SweepResult large_linear_sweep(const SpectralField& K, const Vec3& axis, const std::vector<double>& c_values,
                               const SphereGrid& g);

}  // namespace obstruction
}  // namespace nirenberg
