#include "nirenberg/sht.hpp"

#include <cmath>
#include <numbers>

namespace nirenberg {
namespace sht {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;

void check_synth(const SpectralField& f, const SphereGrid& g) {
  if (f.lmax > g.capacity())
    throw Error(Errc::band_limit_mismatch, "grid cannot resolve band limit " + std::to_string(f.lmax));
}

void check_analyze(const GridField& v, const SphereGrid& g, int out_lmax) {
  if (v.nlat != g.nlat || v.nlon != g.nlon) throw Error(Errc::shape_mismatch, "grid field shape");
  if (out_lmax > g.capacity())
    throw Error(Errc::band_limit_mismatch, "analysis band limit exceeds grid capacity");
}
}  // namespace

GridField synthesize(const SpectralField& f, const SphereGrid& g) {
  check_synth(f, g);
  const int L = f.lmax;
  GridField out(g.nlat, g.nlon);

#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.nlat; ++j) {
    // Legendre stage: A_m(x_j), B_m(x_j).
    std::vector<double> A(L + 1, 0.0), B(L + 1, 0.0);
    for (int m = 0; m <= L; ++m) {
      double a = 0.0, b = 0.0;
      for (int l = m; l <= L; ++l) {
        double ql = g.plm[static_cast<size_t>(g.pair_index(l, m)) * g.nlat + j];
        a += f.at(l, m) * ql;
        if (m > 0) b += f.at(l, -m) * ql;
      }
      A[m] = (m == 0) ? a : kSqrt2 * a;
      B[m] = kSqrt2 * b;
    }
    // Fourier stage.
    double* row = out.v.data() + static_cast<size_t>(j) * g.nlon;
    for (int k = 0; k < g.nlon; ++k) row[k] = A[0];
    for (int m = 1; m <= L; ++m) {
      const double* cm = g.cos_m.data() + static_cast<size_t>(m) * g.nlon;
      const double* sm = g.sin_m.data() + static_cast<size_t>(m) * g.nlon;
      for (int k = 0; k < g.nlon; ++k) row[k] += A[m] * cm[k] + B[m] * sm[k];
    }
  }
  return out;
}

SpectralField analyze(const GridField& v, const SphereGrid& g, int out_lmax) {
  const int L = (out_lmax < 0) ? g.lmax : out_lmax;
  check_analyze(v, g, L);
  SpectralField f(L);

  // Fourier stage: Fc[j][m], Fs[j][m] with the longitude quadrature factor.
  const double wlon = 2.0 * std::numbers::pi / g.nlon;
  std::vector<double> Fc(static_cast<size_t>(g.nlat) * (L + 1), 0.0);
  std::vector<double> Fs(static_cast<size_t>(g.nlat) * (L + 1), 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.nlat; ++j) {
    const double* row = v.v.data() + static_cast<size_t>(j) * g.nlon;
    for (int m = 0; m <= L; ++m) {
      const double* cm = g.cos_m.data() + static_cast<size_t>(m) * g.nlon;
      const double* sm = g.sin_m.data() + static_cast<size_t>(m) * g.nlon;
      double sc = 0.0, ss = 0.0;
      for (int k = 0; k < g.nlon; ++k) {
        sc += row[k] * cm[k];
        ss += row[k] * sm[k];
      }
      Fc[static_cast<size_t>(j) * (L + 1) + m] = wlon * sc;
      Fs[static_cast<size_t>(j) * (L + 1) + m] = wlon * ss;
    }
  }

  // Legendre stage.
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m <= L; ++m) {
    for (int l = m; l <= L; ++l) {
      const double* q = g.plm.data() + static_cast<size_t>(g.pair_index(l, m)) * g.nlat;
      double sc = 0.0, ss = 0.0;
      for (int j = 0; j < g.nlat; ++j) {
        double wq = g.w[j] * q[j];
        sc += wq * Fc[static_cast<size_t>(j) * (L + 1) + m];
        if (m > 0) ss += wq * Fs[static_cast<size_t>(j) * (L + 1) + m];
      }
      if (m == 0) {
        f.at(l, 0) = sc;
      } else {
        f.at(l, m) = kSqrt2 * sc;
        f.at(l, -m) = kSqrt2 * ss;
      }
    }
  }
  return f;
}

double eval_point(const SpectralField& f, double theta, double phi) {
  const int L = f.lmax;
  double x = std::cos(theta), s = std::sin(theta);
  std::vector<double> col(L + 1);
  double acc = 0.0;
  for (int m = 0; m <= L; ++m) {
    legendre_column(L, m, x, s, col.data());
    double a = 0.0, b = 0.0;
    for (int l = m; l <= L; ++l) {
      a += f.at(l, m) * col[l];
      if (m > 0) b += f.at(l, -m) * col[l];
    }
    if (m == 0)
      acc += a;
    else
      acc += kSqrt2 * (a * std::cos(m * phi) + b * std::sin(m * phi));
  }
  return acc;
}

double eval_dir(const SpectralField& f, const double p[3]) {
  double z = std::max(-1.0, std::min(1.0, p[2]));
  return eval_point(f, std::acos(z), std::atan2(p[1], p[0]));
}

namespace serial {

GridField synthesize(const SpectralField& f, const SphereGrid& g) {
  check_synth(f, g);
  const int L = f.lmax;
  GridField out(g.nlat, g.nlon);
  std::vector<double> col(L + 1);
  for (int j = 0; j < g.nlat; ++j) {
    for (int k = 0; k < g.nlon; ++k) {
      double phi = g.phi(k);
      double acc = 0.0;
      for (int m = 0; m <= L; ++m) {
        legendre_column(L, m, g.x[j], g.sin_theta[j], col.data());
        double a = 0.0, b = 0.0;
        for (int l = m; l <= L; ++l) {
          a += f.at(l, m) * col[l];
          if (m > 0) b += f.at(l, -m) * col[l];
        }
        acc += (m == 0) ? a : kSqrt2 * (a * std::cos(m * phi) + b * std::sin(m * phi));
      }
      out.at(j, k) = acc;
    }
  }
  return out;
}

SpectralField analyze(const GridField& v, const SphereGrid& g, int out_lmax) {
  const int L = (out_lmax < 0) ? g.lmax : out_lmax;
  check_analyze(v, g, L);
  SpectralField f(L);
  const double wlon = 2.0 * std::numbers::pi / g.nlon;
  std::vector<double> col(L + 1);
  for (int j = 0; j < g.nlat; ++j) {
    for (int k = 0; k < g.nlon; ++k) {
      double quad = g.w[j] * wlon * v.at(j, k);
      double phi = g.phi(k);
      for (int m = 0; m <= L; ++m) {
        legendre_column(L, m, g.x[j], g.sin_theta[j], col.data());
        for (int l = m; l <= L; ++l) {
          if (m == 0) {
            f.at(l, 0) += quad * col[l];
          } else {
            f.at(l, m) += quad * kSqrt2 * col[l] * std::cos(m * phi);
            f.at(l, -m) += quad * kSqrt2 * col[l] * std::sin(m * phi);
          }
        }
      }
    }
  }
  return f;
}

}  // namespace serial

}  // namespace sht
}  // namespace nirenberg
