#include "nirenberg/sphere_grid.hpp"

#include <cmath>
#include <numbers>

#include "nirenberg/errors.hpp"

namespace nirenberg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kQ00 = 0.28209479177387814;  // 1/sqrt(4 pi)
}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on P_n from the standard asymptotic initial guess.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // Recompute dp at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int l = 2; l <= n; ++l) {
      double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    // cos is decreasing, so this ordering makes x descend and theta ascend.
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

void legendre_column(int lmax, int m, double x, double s, double* q) {
  // Diagonal term Q_m^m.
  double qmm = kQ00;
  for (int k = 1; k <= m; ++k) qmm *= s * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
  q[m] = qmm;
  if (m == lmax) return;
  double qlm1 = qmm;
  double ql = std::sqrt(2.0 * m + 3.0) * x * qmm;
  q[m + 1] = ql;
  for (int l = m + 2; l <= lmax; ++l) {
    double l2 = static_cast<double>(l) * l;
    double m2 = static_cast<double>(m) * m;
    double alpha = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
    double beta = std::sqrt((2.0 * l + 1.0) / (2.0 * l - 3.0) * ((l - 1.0) * (l - 1.0) - m2) / (l2 - m2));
    double qn = alpha * x * ql - beta * qlm1;
    qlm1 = ql;
    ql = qn;
    q[l] = qn;
  }
}

SphereGrid SphereGrid::make(int lmax, double oversample) {
  if (lmax < 2) throw Error(Errc::invalid_band_limit, "band limit must be >= 2");
  if (oversample < 1.0) throw Error(Errc::invalid_band_limit, "oversample factor must be >= 1");

  SphereGrid g;
  g.lmax = lmax;
  g.oversample = oversample;
  g.nlat = static_cast<int>(std::ceil(oversample * (lmax + 1) - 1e-12));
  g.nlon = static_cast<int>(std::ceil(oversample * (2 * lmax + 1) - 1e-12));
  g.cap_ = std::min(g.nlat - 1, (g.nlon - 1) / 2);

  gauss_legendre(g.nlat, g.x, g.w);
  g.theta.resize(g.nlat);
  g.sin_theta.resize(g.nlat);
  for (int j = 0; j < g.nlat; ++j) {
    g.theta[j] = std::acos(g.x[j]);
    g.sin_theta[j] = std::sin(g.theta[j]);
  }

  const int cap = g.cap_;
  g.plm.assign(static_cast<size_t>(cap + 1) * (cap + 2) / 2 * g.nlat, 0.0);
  std::vector<double> col(cap + 1);
  for (int j = 0; j < g.nlat; ++j) {
    for (int m = 0; m <= cap; ++m) {
      legendre_column(cap, m, g.x[j], g.sin_theta[j], col.data());
      for (int l = m; l <= cap; ++l) g.plm[static_cast<size_t>(g.pair_index(l, m)) * g.nlat + j] = col[l];
    }
  }

  g.cos_m.resize(static_cast<size_t>(cap + 1) * g.nlon);
  g.sin_m.resize(static_cast<size_t>(cap + 1) * g.nlon);
  for (int m = 0; m <= cap; ++m) {
    for (int k = 0; k < g.nlon; ++k) {
      double ph = m * g.phi(k);
      g.cos_m[static_cast<size_t>(m) * g.nlon + k] = std::cos(ph);
      g.sin_m[static_cast<size_t>(m) * g.nlon + k] = std::sin(ph);
    }
  }
  return g;
}

double SphereGrid::phi(int k) const { return 2.0 * kPi * k / nlon; }

void SphereGrid::node(int j, int k, double out[3]) const {
  double ph = phi(k);
  out[0] = sin_theta[j] * std::cos(ph);
  out[1] = sin_theta[j] * std::sin(ph);
  out[2] = x[j];
}

}  // namespace nirenberg
