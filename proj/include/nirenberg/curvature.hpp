#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "nirenberg/ops.hpp"

namespace nirenberg {
namespace curvature {

// Conformal metric exp(2u) g_round with its cached grid data.
struct ConformalMetric {
  SpectralField u;
  GridField e2u;  // exp(2u) on the grid
  double area = 0.0;

  ConformalMetric() = default;
  ConformalMetric(const SpectralField& u_in, const SphereGrid& g);
};

// K = exp(-2u)(1 - Lap u), evaluated pointwise and re-projected to the band
// of u. Throws resolution-exceeded when the projected tail carries more than
// tail_tol of the energy.
SpectralField gauss_curvature(const SpectralField& u, const SphereGrid& g, double tail_tol = 1e-6);

// integral K exp(2u) dv - 4 pi for K = gauss_curvature(u); identically zero
// in exact arithmetic, so this measures the discretization defect.
double gauss_bonnet_defect(const SpectralField& u, const SphereGrid& g);
double gauss_bonnet_defect(const SpectralField& u, const SpectralField& K, const SphereGrid& g);

// Derivative of the curvature map at u in direction v:
// -exp(-2u) Lap v - 2 K v, re-projected to the band of v.
SpectralField linearization_apply(const SpectralField& u, const SpectralField& K, const SpectralField& v,
                                  const SphereGrid& g);

struct FunctionalState {
  double value = 0.0;
  double kappa = 0.0;        // (integral K exp(2u) dv0)^{-1}, dv0 = dv/4pi
  SpectralField gradient;    // -Lap u + 1 - kappa K exp(2u), band of u
};

// The scale-normalized functional
//   J(u, K) = integral (|du|^2 + 2u) dv0 - log(integral K exp(2u) dv0).
// Throws nonpositive-mass when integral K exp(2u) <= 0.
FunctionalState functional_J(const SpectralField& u, const SpectralField& K, const SphereGrid& g);

// Second variation form integral v (-Lap v - 2 K exp(2u) v) dv. The caller
// is responsible for v lying in the constraint tangent space
// { v : integral K exp(2u) v dv = 0 } when using this for index counts.
double hessian_quadratic_form(const SpectralField& u, const SpectralField& K, const SpectralField& v,
                              const SphereGrid& g);

struct BifurcationForm {
  // One symmetric matrix per kernel direction w~:
  // S[w~](a, b) = integral K w_a w_b w~ exp(2u) dv.
  std::vector<Eigen::MatrixXd> forms;
  bool nondegenerate = false;  // some form has no zero eigenvalue
  // For a one-dimensional kernel: 12 integral w^2 |dw|^2 exp(2u) dv, the
  // cubic coefficient controlling the fold; positive for any nonzero w.
  std::optional<double> cubic_coefficient;
};

// Evaluates the kernel-restricted quadratic forms at a singular point. The
// basis must span the numerical kernel of Lap + 2 K exp(2u); empty basis is
// a not-a-singular-point error.
BifurcationForm bifurcation_form(const SpectralField& u, const SpectralField& K,
                                 const std::vector<SpectralField>& kernel_basis, const SphereGrid& g);

}  // namespace curvature
}  // namespace nirenberg
