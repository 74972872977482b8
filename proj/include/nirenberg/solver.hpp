#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nirenberg/conformal.hpp"
#include "nirenberg/curvature.hpp"
#include "nirenberg/obstruction.hpp"

namespace nirenberg {
namespace solver {

enum class Symmetry { none, even, rotations };

struct SolveOptions {
  int max_iter = 60;
  double tol = 1e-10;             // L-inf of -Lap u + 1 - K exp(2u)
  double min_step = 1e-6;         // line-search floor
  double levenberg_floor = 1e-8;  // singular-value threshold triggering a shift
  Symmetry symmetry = Symmetry::none;
  std::vector<Eigen::Matrix3d> group;  // generators+elements for Symmetry::rotations
  int spectrum_count = 6;
  unsigned seed = 0;
  bool diagnostics = true;  // fill spectrum/index/slice/KW on exit
};

struct SolveResult {
  SpectralField u;
  double res_linf = 0.0;
  double res_l2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;  // L-inf residual per accepted iterate

  std::vector<double> eigenvalues;  // smallest-|.| weighted eigenvalues
  int kernel_dim = 0;
  std::vector<SpectralField> kernel_basis;
  int morse_index = -1;  // -1 when not computed

  bool slice_ok = false;
  SpectralField slice_u;
  conformal::ConformalMap slice_map;

  Eigen::Vector3d kw = Eigen::Vector3d::Zero();
  std::vector<std::string> warnings;
  std::string message;
};

// Dense spectral-space operators on the band of u:
//   A = -Lap - 2 M[K exp(2u)],  B = M[exp(2u)],
// with M[w] the Galerkin multiplication matrix from grid quadrature.
Eigen::MatrixXd multiplier_matrix(const GridField& w, const SphereGrid& g, int lmax);
Eigen::MatrixXd operator_matrix(const SpectralField& u, const SpectralField& K, const SphereGrid& g);

// Damped Newton on F(u) = -Lap u + 1 - K exp(2u) with a Levenberg shift near
// singular iterates. K must be positive somewhere (not-in-Cplus otherwise).
SolveResult newton_solve(const SpectralField& K, const SpectralField& u0, const SphereGrid& g,
                         const SolveOptions& opts = {});

// Semi-implicit descent on the normalized functional, then a Newton polish.
SolveResult flow_solve(const SpectralField& K, const SpectralField& u0, const SphereGrid& g,
                       const SolveOptions& opts = {});

// k smallest-magnitude eigenvalues of the weighted pencil
// (-Lap - 2 K exp(2u)) w = mu exp(2u) w, with B-normalized eigenfields.
std::vector<std::pair<double, SpectralField>> linearization_spectrum(const SpectralField& u,
                                                                     const SpectralField& K, int k,
                                                                     const SphereGrid& g);

// Negative directions of the second variation restricted to
// { v : integral K exp(2u) v dv = 0 }. Requires (u, K) to solve the equation
// within `residual_tol` (not-a-solution otherwise).
int morse_index(const SpectralField& u, const SpectralField& K, const SphereGrid& g,
                double residual_tol = 1e-6);

// First nonzero eigenvalue of the Laplacian of the metric K exp(2u) g_round
// (area 4 pi at solutions). Requires K > 0 on the grid.
double hersch_lambda1(const SpectralField& u, const SpectralField& K, const SphereGrid& g);

struct EnumerationResult {
  std::vector<SolveResult> solutions;  // one representative per slice class
  int attempts = 0;
  int converged_runs = 0;
  int signed_count = 0;  // sum of (-1)^index over representatives
  bool index_complete = true;
  std::vector<std::string> warnings;
};

// Random multistart with deflation against found roots; solutions deduped by
// slice representative.
EnumerationResult multistart_enumerate(const SpectralField& K, const SphereGrid& g, int n_starts,
                                       const SolveOptions& opts = {}, bool deflate = true);

struct PathSpec {
  SpectralField base;
  SpectralField direction;
  double t0 = 0.0;
  double t1 = 1.0;

  SpectralField at(double t) const { return base + t * direction; }
};

struct BranchPoint {
  double t = 0.0;
  double s = 0.0;  // accumulated arclength
  SpectralField u;
  double res_linf = 0.0;
  double min_eigenvalue = 0.0;
  double area = 0.0;
  int index = 0;
  bool fold = false;
};

enum class BranchStatus { reached_end, fold_return, blow_up_guard, step_failure, max_steps };

inline const char* branch_status_name(BranchStatus s) {
  switch (s) {
    case BranchStatus::reached_end: return "reached-end";
    case BranchStatus::fold_return: return "fold-return";
    case BranchStatus::blow_up_guard: return "boundary-degeneration";
    case BranchStatus::step_failure: return "step-failure";
    case BranchStatus::max_steps: return "max-steps";
  }
  return "?";
}

struct ContinuationOptions {
  SolveOptions solve;
  double ds0 = 0.05;
  double ds_min = 1e-5;
  double ds_max = 0.25;
  int max_steps = 500;
  double area_cap = 100.0 * kFourPi;
  double uinf_cap = 8.0;
  double fold_bracket_tol = 1e-6;
};

struct ContinuationResult {
  std::vector<BranchPoint> points;
  BranchStatus status = BranchStatus::max_steps;
  std::vector<size_t> fold_indices;
};

// Pseudo-arclength predictor-corrector along K(t), recording the smallest
// weighted eigenvalue, area and index; folds are detected from a sign change
// of dt/ds together with an eigenvalue crossing, and bracketed in arclength.
ContinuationResult continuation(const PathSpec& path, const SpectralField& u_start, const SphereGrid& g,
                                const ContinuationOptions& opts = {});

// Newton restricted to the subspace of coefficients invariant under the
// group (all odd degrees dropped for Symmetry::even). K must be invariant to
// 1e-10 (not-invariant otherwise).
SolveResult solve_symmetric(const SpectralField& K, const SphereGrid& g, const SolveOptions& opts);

}  // namespace solver
}  // namespace nirenberg
