#include "nirenberg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nirenberg/morse.hpp"

namespace nirenberg {
namespace solver {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd to_vec(const SpectralField& f) {
  return Eigen::Map<const VectorXd>(f.c.data(), static_cast<long>(f.c.size()));
}

SpectralField to_field(const VectorXd& v, int lmax) {
  SpectralField f(lmax);
  Eigen::Map<VectorXd>(f.c.data(), v.size()) = v;
  return f;
}

VectorXd laplacian_diag(int lmax) {
  VectorXd d(static_cast<long>(lmax + 1) * (lmax + 1));
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) d[SpectralField::index(l, m)] = static_cast<double>(l) * (l + 1);
  return d;
}

struct Residual {
  SpectralField field;
  GridField e2u;
  double linf = 0.0;
  double l2 = 0.0;
};

// F(u) = -Lap u + 1 - K exp(2u), projected to the band of u.
Residual residual(const SpectralField& u, const GridField& K_vals, const SphereGrid& g) {
  Residual r;
  r.e2u = ops::exp_field(u, g, 2.0);
  GridField pt(g.nlat, g.nlon);
  for (size_t i = 0; i < pt.v.size(); ++i) pt.v[i] = 1.0 - K_vals.v[i] * r.e2u.v[i];
  r.field = sht::analyze(pt, g, u.lmax);
  SpectralField lap = ops::laplacian(u);
  r.field -= lap;
  r.l2 = r.field.norm_l2();
  r.linf = ops::norm_inf(r.field, g);
  return r;
}

}  // namespace

MatrixXd multiplier_matrix(const GridField& w, const SphereGrid& g, int lmax) {
  const int n = (lmax + 1) * (lmax + 1);
  MatrixXd M(n, n);
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < n; ++b) {
    SpectralField eb(lmax);
    eb.c[b] = 1.0;
    GridField yb = sht::synthesize(eb, g);
    for (size_t i = 0; i < yb.v.size(); ++i) yb.v[i] *= w.v[i];
    SpectralField col = sht::analyze(yb, g, lmax);
    for (int a = 0; a < n; ++a) M(a, b) = col.c[a];
  }
  M = 0.5 * (M + M.transpose()).eval();
  return M;
}

MatrixXd operator_matrix(const SpectralField& u, const SpectralField& K, const SphereGrid& g) {
  GridField e2u = ops::exp_field(u, g, 2.0);
  GridField Kv = sht::synthesize(K, g);
  for (size_t i = 0; i < e2u.v.size(); ++i) e2u.v[i] *= Kv.v[i];
  MatrixXd A = (-2.0 * multiplier_matrix(e2u, g, u.lmax)).eval();
  A.diagonal() += laplacian_diag(u.lmax);
  return A;
}

namespace {

struct SymmetryBasis {
  bool active = false;
  MatrixXd Q;  // columns: orthonormal basis of the invariant subspace

  VectorXd project(const VectorXd& v) const { return active ? (Q * (Q.transpose() * v)).eval() : v; }
};

// Matrix of f -> f.gamma on the coefficient space (exact for band-limited
// fields), assembled by analyzing each rotated basis function.
MatrixXd rotation_operator(const Eigen::Matrix3d& R, const SphereGrid& g, int lmax) {
  const int n = (lmax + 1) * (lmax + 1);
  MatrixXd Rot(n, n);
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < n; ++b) {
    SpectralField eb(lmax);
    eb.c[b] = 1.0;
    double Rr[9] = {R(0, 0), R(0, 1), R(0, 2), R(1, 0), R(1, 1), R(1, 2), R(2, 0), R(2, 1), R(2, 2)};
    SpectralField rot = ops::rotate(eb, Rr, g);
    for (int a = 0; a < n; ++a) Rot(a, b) = rot.c[a];
  }
  return Rot;
}

SymmetryBasis build_symmetry_basis(const SolveOptions& opts, const SphereGrid& g, int lmax) {
  SymmetryBasis sb;
  const int n = (lmax + 1) * (lmax + 1);
  if (opts.symmetry == Symmetry::none) return sb;
  sb.active = true;
  if (opts.symmetry == Symmetry::even) {
    int cols = 0;
    for (int l = 0; l <= lmax; l += 2) cols += 2 * l + 1;
    sb.Q = MatrixXd::Zero(n, cols);
    int c = 0;
    for (int l = 0; l <= lmax; l += 2)
      for (int m = -l; m <= l; ++m) sb.Q(SpectralField::index(l, m), c++) = 1.0;
    return sb;
  }
  // Average of the rotation operators over the listed group elements
  // (identity included implicitly).
  MatrixXd P = MatrixXd::Identity(n, n);
  for (const auto& R : opts.group) P += rotation_operator(R, g, lmax);
  P /= static_cast<double>(opts.group.size() + 1);
  P = 0.5 * (P + P.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P);
  int cols = 0;
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > 0.5) ++cols;
  sb.Q.resize(n, cols);
  int c = 0;
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > 0.5) sb.Q.col(c++) = es.eigenvectors().col(i);
  return sb;
}

struct DeflationSet {
  std::vector<VectorXd> roots;

  double factor(const VectorXd& u) const {
    double m = 1.0;
    for (const auto& r : roots) m *= 1.0 + 1.0 / (u - r).squaredNorm();
    return m;
  }
  VectorXd gradient(const VectorXd& u) const {
    VectorXd grad = VectorXd::Zero(u.size());
    double m = factor(u);
    for (const auto& r : roots) {
      VectorXd d = u - r;
      double d2 = d.squaredNorm();
      double mi = 1.0 + 1.0 / d2;
      grad += m / mi * (-2.0 / (d2 * d2)) * d;
    }
    return grad;
  }
};

SolveResult newton_core(const SpectralField& K, const SpectralField& u0, const SphereGrid& g,
                        const SolveOptions& opts, const DeflationSet* deflation,
                        const SymmetryBasis& sym) {
  const int lmax = K.lmax;
  const int n = (lmax + 1) * (lmax + 1);
  GridField K_vals = sht::synthesize(K, g);
  if (!(K_vals.max() > 0.0)) throw Error(Errc::not_in_cplus, "K must be positive somewhere");

  SolveResult res;
  VectorXd u = to_vec(u0.projected(lmax));
  if (sym.active) u = sym.project(u);

  Residual r = residual(to_field(u, lmax), K_vals, g);
  res.residual_trace.push_back(r.linf);
  int stalls = 0;
  double mu = 0.0;
  int it = 0;
  for (; it < opts.max_iter && r.linf >= opts.tol; ++it) {
    SpectralField uf = to_field(u, lmax);
    GridField w = r.e2u;
    for (size_t i = 0; i < w.v.size(); ++i) w.v[i] *= K_vals.v[i];
    MatrixXd A = (-2.0 * multiplier_matrix(w, g, lmax)).eval();
    A.diagonal() += laplacian_diag(lmax);

    MatrixXd Ared = sym.active ? (sym.Q.transpose() * A * sym.Q).eval() : A;
    VectorXd rred = sym.active ? (sym.Q.transpose() * to_vec(r.field)).eval() : to_vec(r.field);

    VectorXd step;
    for (int attempt = 0;; ++attempt) {
      MatrixXd Ashift = Ared;
      double scale = Ashift.cwiseAbs().maxCoeff();
      if (mu > 0) Ashift.diagonal().array() += mu;
      Eigen::LDLT<MatrixXd> ldlt(Ashift);
      double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
      if ((ldlt.info() != Eigen::Success || dmin < opts.levenberg_floor * scale) && attempt < 6) {
        mu = (mu == 0.0) ? 1e-6 * scale : 100.0 * mu;
        continue;
      }
      step = ldlt.solve(-rred);
      break;
    }
    VectorXd delta = sym.active ? (sym.Q * step).eval() : step;

    double defl = 1.0;
    if (deflation && !deflation->roots.empty()) {
      defl = deflation->factor(u);
      double dir = deflation->gradient(u).dot(delta) / defl;
      double denom = 1.0 - dir;
      if (std::abs(denom) < 1e-2) denom = (denom >= 0 ? 1e-2 : -1e-2);
      delta /= denom;
    }

    auto merit = [&](const VectorXd& v, Residual& out) {
      out = residual(to_field(v, lmax), K_vals, g);
      double m = (deflation && !deflation->roots.empty()) ? deflation->factor(v) : 1.0;
      return out.l2 * m;
    };
    double phi0 = r.l2 * defl;
    double alpha = 1.0;
    bool accepted = false;
    Residual r_new;
    while (alpha >= opts.min_step) {
      VectorXd cand = u + alpha * delta;
      if (sym.active) cand = sym.project(cand);
      double phi = merit(cand, r_new);
      if (phi < (1.0 - 1e-4 * alpha) * phi0) {
        u = cand;
        r = r_new;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (accepted) {
      res.residual_trace.push_back(r.linf);
      stalls = 0;
      mu *= 0.1;
      if (mu < 1e-14) mu = 0.0;
    } else {
      ++stalls;
      mu = (mu == 0.0) ? 1e-4 : 100.0 * mu;
      if (stalls >= 2) {
        res.message = "singular-stall";
        break;
      }
    }
  }

  res.u = to_field(u, lmax);
  res.iterations = it;
  res.res_linf = r.linf;
  res.res_l2 = r.l2;
  res.converged = r.linf < opts.tol;
  if (!res.converged && res.message.empty()) res.message = "max-iterations";
  return res;
}

void fill_diagnostics(SolveResult& res, const SpectralField& K, const SphereGrid& g,
                      const SolveOptions& opts) {
  if (!opts.diagnostics) return;
  auto spec = linearization_spectrum(res.u, K, opts.spectrum_count, g);
  res.eigenvalues.clear();
  double scale = 1.0;
  for (auto& [mu, field] : spec) scale = std::max(scale, std::abs(mu));
  for (auto& [mu, field] : spec) {
    res.eigenvalues.push_back(mu);
    if (std::abs(mu) < 1e-8 * scale) {
      ++res.kernel_dim;
      res.kernel_basis.push_back(field);
    }
  }
  if (res.converged) {
    res.morse_index = morse_index(res.u, K, g, std::max(1e-6, 1e3 * opts.tol));
    try {
      auto [sp, map] = conformal::project_to_slice(res.u, g);
      res.slice_u = sp.u;
      res.slice_map = map;
      res.slice_ok = true;
    } catch (const Error& e) {
      res.warnings.push_back(std::string("slice projection failed: ") + e.what());
    }
  }
  res.kw = obstruction::kw_vector(K, res.u, g);
}

}  // namespace

SolveResult newton_solve(const SpectralField& K, const SpectralField& u0, const SphereGrid& g,
                         const SolveOptions& opts) {
  SymmetryBasis sym;  // plain solve; solve_symmetric handles constraints
  SolveResult res = newton_core(K, u0, g, opts, nullptr, sym);
  fill_diagnostics(res, K, g, opts);
  return res;
}

SolveResult flow_solve(const SpectralField& K, const SpectralField& u0, const SphereGrid& g,
                       const SolveOptions& opts) {
  const int lmax = K.lmax;
  GridField K_vals = sht::synthesize(K, g);
  if (!(K_vals.max() > 0.0)) throw Error(Errc::not_in_cplus, "K must be positive somewhere");

  SpectralField u = u0.projected(lmax);
  VectorXd lap = laplacian_diag(lmax);
  double eta = 0.5;
  double j_prev = 0.0;
  {
    auto st0 = curvature::functional_J(u, K, g);  // throws nonpositive-mass at a bad start
    j_prev = st0.value;
  }
  int it = 0;
  double kappa = 1.0;
  for (; it < 400; ++it) {
    GridField e2u = ops::exp_field(u, g, 2.0);
    GridField Ke2u(g.nlat, g.nlon);
    for (size_t i = 0; i < Ke2u.v.size(); ++i) Ke2u.v[i] = K_vals.v[i] * e2u.v[i];
    double mass = ops::integrate(Ke2u, g) / kFourPi;
    if (!(mass > 0.0)) throw Error(Errc::nonpositive_mass, "flow left the positive-mass region");
    kappa = 1.0 / mass;

    GridField pt(g.nlat, g.nlon);
    for (size_t i = 0; i < pt.v.size(); ++i) pt.v[i] = 1.0 - kappa * Ke2u.v[i];
    SpectralField grad = sht::analyze(pt, g, lmax);
    SpectralField lap_u = ops::laplacian(u);
    grad -= lap_u;  // = -Lap u + 1 - kappa K exp(2u)
    if (ops::norm_inf(grad, g) < 1e-6) break;

    // Semi-implicit step: (1 + eta Lap_diag) u_new = u - eta * (grad + Lap u).
    bool moved = false;
    while (eta > 1e-6) {
      VectorXd uh = to_vec(u);
      VectorXd rhs = uh - eta * to_vec(grad + lap_u);
      VectorXd unew = rhs.array() / (1.0 + eta * lap.array());
      SpectralField cand = to_field(unew, lmax);
      double j_cand = curvature::functional_J(cand, K, g).value;
      if (j_cand <= j_prev) {
        u = cand;
        j_prev = j_cand;
        moved = true;
        eta = std::min(eta * 1.25, 1.0);
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }

  // kappa-normalization shift maps the critical point to a solution, then
  // Newton finishes.
  u.at(0, 0) += 0.5 * std::log(kappa) * kSqrtFourPi;
  SolveResult res = newton_solve(K, u, g, opts);
  res.iterations += it;
  return res;
}

std::vector<std::pair<double, SpectralField>> linearization_spectrum(const SpectralField& u,
                                                                     const SpectralField& K, int k,
                                                                     const SphereGrid& g) {
  if (k < 1) throw Error(Errc::config_error, "need k >= 1 eigenvalues");
  const int lmax = u.lmax;
  const int n = (lmax + 1) * (lmax + 1);
  GridField e2u = ops::exp_field(u, g, 2.0);
  MatrixXd B = multiplier_matrix(e2u, g, lmax);
  GridField w = e2u;
  GridField Kv = sht::synthesize(K, g);
  for (size_t i = 0; i < w.v.size(); ++i) w.v[i] *= Kv.v[i];
  MatrixXd A = (-2.0 * multiplier_matrix(w, g, lmax)).eval();
  A.diagonal() += laplacian_diag(lmax);

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A, B);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(es.eigenvalues()(a)) < std::abs(es.eigenvalues()(b)); });
  std::vector<std::pair<double, SpectralField>> out;
  for (int i = 0; i < std::min(k, n); ++i) {
    VectorXd v = es.eigenvectors().col(order[i]);
    out.emplace_back(es.eigenvalues()(order[i]), to_field(v, lmax));
  }
  return out;
}

int morse_index(const SpectralField& u, const SpectralField& K, const SphereGrid& g, double residual_tol) {
  GridField K_vals = sht::synthesize(K, g);
  Residual r = residual(u, K_vals, g);
  if (r.linf > residual_tol)
    throw Error(Errc::not_a_solution, "residual " + std::to_string(r.linf) + " above " +
                                          std::to_string(residual_tol));
  const int lmax = u.lmax;
  const int n = (lmax + 1) * (lmax + 1);
  GridField w = r.e2u;
  for (size_t i = 0; i < w.v.size(); ++i) w.v[i] *= K_vals.v[i];
  MatrixXd A = (-2.0 * multiplier_matrix(w, g, lmax)).eval();
  A.diagonal() += laplacian_diag(lmax);

  // Constraint direction: integral K exp(2u) v dv = <analyze(K exp(2u)), v>.
  SpectralField gc = sht::analyze(w, g, lmax);
  VectorXd c = to_vec(gc);
  Eigen::HouseholderQR<VectorXd> qr(c);
  MatrixXd Qfull = qr.householderQ() * MatrixXd::Identity(n, n);
  MatrixXd Q = Qfull.rightCols(n - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es((Q.transpose() * A * Q).eval());
  double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int idx = 0;
  for (int i = 0; i < n - 1; ++i)
    if (es.eigenvalues()(i) < -1e-8 * scale) ++idx;
  return idx;
}

double hersch_lambda1(const SpectralField& u, const SpectralField& K, const SphereGrid& g) {
  GridField rho = ops::exp_field(u, g, 2.0);
  GridField Kv = sht::synthesize(K, g);
  for (size_t i = 0; i < rho.v.size(); ++i) rho.v[i] *= Kv.v[i];
  if (!(rho.min() > 0.0)) throw Error(Errc::nonpositive_mass, "metric density K exp(2u) must be positive");
  const int lmax = u.lmax;
  MatrixXd B = multiplier_matrix(rho, g, lmax);
  MatrixXd A = MatrixXd::Zero(B.rows(), B.cols());
  A.diagonal() = laplacian_diag(lmax);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A, B);
  return es.eigenvalues()(1);
}

EnumerationResult multistart_enumerate(const SpectralField& K, const SphereGrid& g, int n_starts,
                                       const SolveOptions& opts, bool deflate) {
  EnumerationResult out;
  try {
    morse::MorseReport rep = morse::classify_regions(K, g);
    if (!rep.in_c || !rep.in_n)
      out.warnings.push_back("K is outside the stable region; enumeration is advisory");
  } catch (const Error& e) {
    if (e.code() != Errc::constant_input) throw;
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DeflationSet deflation;
  SymmetryBasis sym;

  auto slice_rep = [&](const SpectralField& u) -> std::optional<SpectralField> {
    try {
      auto [sp, map] = conformal::project_to_slice(u, g);
      return sp.u;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  for (int s = 0; s < n_starts; ++s) {
    SpectralField u0(K.lmax);
    if (s > 0) {
      int lcut = std::min(6, K.lmax);
      for (int l = 0; l <= lcut; ++l)
        for (int m = -l; m <= l; ++m) u0.at(l, m) = 0.35 * gauss(rng) * std::exp(-0.6 * l);
    }
    ++out.attempts;
    SolveResult r = newton_core(K, u0, g, opts, deflate ? &deflation : nullptr, sym);
    if (!r.converged) continue;
    ++out.converged_runs;
    auto rep = slice_rep(r.u);

    bool duplicate = false;
    for (auto& known : out.solutions) {
      if (rep.has_value() && known.slice_ok) {
        SpectralField d = *rep - known.slice_u;
        if (d.norm_l2() < 1e-6) {
          duplicate = true;
          break;
        }
      } else {
        SpectralField d = r.u - known.u;
        if (d.norm_l2() < 1e-4) {
          duplicate = true;
          break;
        }
      }
    }
    if (duplicate) continue;

    fill_diagnostics(r, K, g, opts);
    if (deflate) deflation.roots.push_back(to_vec(r.u));
    out.solutions.push_back(std::move(r));
  }

  for (const auto& sol : out.solutions) {
    if (sol.morse_index < 0) {
      out.index_complete = false;
      continue;
    }
    out.signed_count += (sol.morse_index % 2 == 0) ? 1 : -1;
  }
  return out;
}

namespace {

struct BorderedSystem {
  MatrixXd J;  // (n+1) x (n+1): [A, F_t; tau^T]
  Eigen::PartialPivLU<MatrixXd> lu;

  void assemble(const MatrixXd& A, const VectorXd& Ft, const VectorXd& tau) {
    const long n = A.rows();
    J.resize(n + 1, n + 1);
    J.topLeftCorner(n, n) = A;
    // A carries an exact 3-dim kernel at the round solution (the conformal
    // directions); a vanishing shift keeps the factorization clean there and
    // is negligible against genuine fold behavior.
    double reg = 1e-9 * std::max(1.0, A.cwiseAbs().maxCoeff());
    J.topLeftCorner(n, n).diagonal().array() += reg;
    J.topRightCorner(n, 1) = Ft;
    J.bottomRows(1) = tau.transpose();
    lu.compute(J);
  }
};

}  // namespace

ContinuationResult continuation(const PathSpec& path, const SpectralField& u_start, const SphereGrid& g,
                                const ContinuationOptions& opts) {
  const int lmax = path.base.lmax;
  const int n = (lmax + 1) * (lmax + 1);
  GridField base_vals = sht::synthesize(path.base, g);
  GridField dir_vals = sht::synthesize(path.direction, g);

  auto k_vals_at = [&](double t) {
    GridField K(g.nlat, g.nlon);
    for (size_t i = 0; i < K.v.size(); ++i) K.v[i] = base_vals.v[i] + t * dir_vals.v[i];
    return K;
  };

  SolveOptions so = opts.solve;
  so.diagnostics = false;
  SolveResult first = newton_core(path.at(path.t0), u_start, g, so, nullptr, SymmetryBasis{});
  if (!first.converged)
    throw Error(Errc::step_failure, "no converged solution at the start of the path");

  ContinuationResult out;
  VectorXd lap = laplacian_diag(lmax);

  auto assemble_A = [&](const SpectralField& u, const GridField& K_vals, const GridField& e2u) {
    GridField w(g.nlat, g.nlon);
    for (size_t i = 0; i < w.v.size(); ++i) w.v[i] = K_vals.v[i] * e2u.v[i];
    MatrixXd A = (-2.0 * multiplier_matrix(w, g, lmax)).eval();
    A.diagonal() += lap;
    (void)u;
    return A;
  };

  auto f_t = [&](const GridField& e2u) {
    GridField pt(g.nlat, g.nlon);
    for (size_t i = 0; i < pt.v.size(); ++i) pt.v[i] = -dir_vals.v[i] * e2u.v[i];
    return to_vec(sht::analyze(pt, g, lmax));
  };

  struct Diag {
    double mu_min;
    int index;
    double area;
  };
  auto diagnostics = [&](const SpectralField& u, const GridField& K_vals, const GridField& e2u,
                         const MatrixXd& A) -> Diag {
    MatrixXd B = multiplier_matrix(e2u, g, lmax);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A, B);
    double mu_min = es.eigenvalues()(0);
    for (int i = 0; i < n; ++i)
      if (std::abs(es.eigenvalues()(i)) < std::abs(mu_min)) mu_min = es.eigenvalues()(i);

    GridField w(g.nlat, g.nlon);
    for (size_t i = 0; i < w.v.size(); ++i) w.v[i] = K_vals.v[i] * e2u.v[i];
    SpectralField gc = sht::analyze(w, g, lmax);
    VectorXd c = to_vec(gc);
    Eigen::HouseholderQR<VectorXd> qr(c);
    MatrixXd Qfull = qr.householderQ() * MatrixXd::Identity(n, n);
    MatrixXd Q = Qfull.rightCols(n - 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ces((Q.transpose() * A * Q).eval());
    double scale = std::max(1.0, ces.eigenvalues().cwiseAbs().maxCoeff());
    int idx = 0;
    for (int i = 0; i < n - 1; ++i)
      if (ces.eigenvalues()(i) < -1e-8 * scale) ++idx;
    (void)u;
    return {mu_min, idx, ops::integrate(e2u, g)};
  };

  // Corrector: Newton on [F(u, t); tau . (X - X_pred)] = 0.
  auto correct = [&](VectorXd& X, const VectorXd& X_pred, const VectorXd& tau, int max_it,
                     int& used) -> bool {
    for (used = 0; used < max_it; ++used) {
      SpectralField u = to_field(X.head(n), lmax);
      double t = X[n];
      GridField K_vals = k_vals_at(t);
      Residual r = residual(u, K_vals, g);
      double constraint = tau.dot(X - X_pred);
      if (r.linf < opts.solve.tol && std::abs(constraint) < 1e-12) return true;
      MatrixXd A = assemble_A(u, K_vals, r.e2u);
      BorderedSystem bs;
      bs.assemble(A, f_t(r.e2u), tau);
      VectorXd rhs(n + 1);
      rhs.head(n) = -to_vec(r.field);
      rhs[n] = -constraint;
      VectorXd delta = bs.lu.solve(rhs);
      if (!delta.allFinite()) return false;
      X += delta;
    }
    SpectralField u = to_field(X.head(n), lmax);
    Residual r = residual(u, k_vals_at(X[n]), g);
    return r.linf < opts.solve.tol;
  };

  auto tangent = [&](const VectorXd& X, const VectorXd& tau_prev) -> VectorXd {
    SpectralField u = to_field(X.head(n), lmax);
    GridField K_vals = k_vals_at(X[n]);
    Residual r = residual(u, K_vals, g);
    MatrixXd A = assemble_A(u, K_vals, r.e2u);
    BorderedSystem bs;
    bs.assemble(A, f_t(r.e2u), tau_prev);
    VectorXd rhs = VectorXd::Zero(n + 1);
    rhs[n] = 1.0;
    VectorXd tau = bs.lu.solve(rhs);
    tau.normalize();
    if (tau.dot(tau_prev) < 0) tau = -tau;
    return tau;
  };

  // Bookkeeping for the first point.
  VectorXd X(n + 1);
  X.head(n) = to_vec(first.u);
  X[n] = path.t0;
  {
    GridField K_vals = k_vals_at(path.t0);
    Residual r = residual(first.u, K_vals, g);
    MatrixXd A = assemble_A(first.u, K_vals, r.e2u);
    Diag d = diagnostics(first.u, K_vals, r.e2u, A);
    out.points.push_back({path.t0, 0.0, first.u, r.linf, d.mu_min, d.area, d.index, false});
  }

  VectorXd tau_prev = VectorXd::Zero(n + 1);
  tau_prev[n] = 1.0;
  VectorXd tau = tangent(X, tau_prev);

  double ds = opts.ds0;
  double s_acc = 0.0;
  out.status = BranchStatus::max_steps;

  auto eval_point = [&](const VectorXd& Xp, double s, bool fold) {
    SpectralField u = to_field(Xp.head(n), lmax);
    GridField K_vals = k_vals_at(Xp[n]);
    Residual r = residual(u, K_vals, g);
    MatrixXd A = assemble_A(u, K_vals, r.e2u);
    Diag d = diagnostics(u, K_vals, r.e2u, A);
    return BranchPoint{Xp[n], s, u, r.linf, d.mu_min, d.area, d.index, fold};
  };

  for (int step = 0; step < opts.max_steps; ++step) {
    VectorXd X_pred = X + ds * tau;
    VectorXd X_new = X_pred;
    int used = 0;
    bool ok = correct(X_new, X_pred, tau, 10, used);
    if (!ok) {
      ds *= 0.5;
      if (ds < opts.ds_min) {
        out.status = BranchStatus::step_failure;
        break;
      }
      continue;
    }
    s_acc += ds;
    BranchPoint bp = eval_point(X_new, s_acc, false);
    const BranchPoint& prev = out.points.back();

    // Fold: dt/ds changed sign and the smallest weighted eigenvalue crossed
    // zero inside the step. Bisect the arclength to bracket the crossing.
    {
      VectorXd tau_next = tangent(X_new, tau);
      bool dt_flip = (tau_next[n] > 0) != (tau[n] > 0);
      bool mu_flip = (bp.min_eigenvalue > 0) != (prev.min_eigenvalue > 0);
      if (dt_flip && mu_flip) {
        double lo = 0.0, hi = ds;
        VectorXd X_lo = X;
        double mu_lo = prev.min_eigenvalue;
        while (hi - lo > opts.fold_bracket_tol) {
          double mid = 0.5 * (lo + hi);
          VectorXd Xm_pred = X + mid * tau;
          VectorXd Xm = Xm_pred;
          int u2;
          if (!correct(Xm, Xm_pred, tau, 10, u2)) break;
          BranchPoint mp = eval_point(Xm, s_acc - ds + mid, false);
          if ((mp.min_eigenvalue > 0) == (mu_lo > 0)) {
            lo = mid;
            X_lo = Xm;
            mu_lo = mp.min_eigenvalue;
          } else {
            hi = mid;
          }
        }
        VectorXd Xf_pred = X + 0.5 * (lo + hi) * tau;
        VectorXd Xf = Xf_pred;
        int u3;
        if (correct(Xf, Xf_pred, tau, 10, u3)) {
          BranchPoint fp = eval_point(Xf, s_acc - ds + 0.5 * (lo + hi), true);
          out.fold_indices.push_back(out.points.size());
          out.points.push_back(fp);
        }
      }
      tau_prev = tau;
      tau = tau_next;
    }

    out.points.push_back(bp);
    X = X_new;

    if (bp.area > opts.area_cap || ops::norm_inf(bp.u, g) > opts.uinf_cap) {
      out.status = BranchStatus::blow_up_guard;
      break;
    }
    if (bp.t >= path.t1) {
      // Clamp: plain solve at exactly t1 from the current iterate.
      SolveResult fin = newton_core(path.at(path.t1), bp.u, g, so, nullptr, SymmetryBasis{});
      if (fin.converged) {
        GridField K_vals = k_vals_at(path.t1);
        Residual r = residual(fin.u, K_vals, g);
        MatrixXd A = assemble_A(fin.u, K_vals, r.e2u);
        Diag d = diagnostics(fin.u, K_vals, r.e2u, A);
        out.points.push_back({path.t1, s_acc, fin.u, r.linf, d.mu_min, d.area, d.index, false});
      }
      out.status = BranchStatus::reached_end;
      break;
    }
    if (bp.t < path.t0) {
      out.status = BranchStatus::fold_return;
      break;
    }

    if (used <= 3) ds = std::min(ds * 1.4, opts.ds_max);
  }
  return out;
}

SolveResult solve_symmetric(const SpectralField& K, const SphereGrid& g, const SolveOptions& opts) {
  if (opts.symmetry == Symmetry::none)
    throw Error(Errc::config_error, "solve_symmetric needs a symmetry tag");
  SymmetryBasis sym = build_symmetry_basis(opts, g, K.lmax);

  // K must itself be invariant.
  VectorXd kv = to_vec(K);
  double dev = (kv - sym.project(kv)).norm();
  if (dev > 1e-10 * std::max(1.0, kv.norm()))
    throw Error(Errc::not_invariant, "K deviates from the symmetry class by " + std::to_string(dev));

  SolveResult res = newton_core(K, SpectralField(K.lmax), g, opts, nullptr, sym);
  fill_diagnostics(res, K, g, opts);
  return res;
}

}  // namespace solver
}  // namespace nirenberg
