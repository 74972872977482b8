#pragma once

#include <cmath>
#include <vector>

#include "nirenberg/errors.hpp"

namespace nirenberg {

inline constexpr double kFourPi = 12.566370614359172;
inline constexpr double kSqrtFourPi = 3.5449077018110318;

// Real function on S^2 as coefficients in the real orthonormal
// spherical-harmonic basis: index (l, m), 0 <= l <= lmax, -l <= m <= l,
// with Y_{0,0} = 1/sqrt(4 pi), Y_{1,0} = sqrt(3/4pi) z, Y_{1,+-1} the x/y
// partners. mean(f) = c00 / sqrt(4 pi); integral over S^2 = sqrt(4 pi) c00.
struct SpectralField {
  int lmax = 0;
  std::vector<double> c;  // size (lmax+1)^2

  SpectralField() = default;
  explicit SpectralField(int L) : lmax(L), c(static_cast<size_t>(L + 1) * (L + 1), 0.0) {}

  static int index(int l, int m) { return l * l + l + m; }
  double& at(int l, int m) { return c[index(l, m)]; }
  double at(int l, int m) const { return c[index(l, m)]; }
  int size() const { return static_cast<int>(c.size()); }

  static SpectralField constant(int L, double value) {
    SpectralField f(L);
    f.c[0] = value * kSqrtFourPi;
    return f;
  }

  double mean() const { return c[0] / kSqrtFourPi; }
  double integral() const { return c[0] * kSqrtFourPi; }

  // l^2 norm of the coefficient vector = L^2(S^2) norm of the function.
  double norm_l2() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    return std::sqrt(s);
  }

  // Truncation / zero-padding to a new band limit.
  SpectralField projected(int L) const {
    SpectralField out(L);
    int lo = std::min(L, lmax);
    for (int l = 0; l <= lo; ++l)
      for (int m = -l; m <= l; ++m) out.at(l, m) = at(l, m);
    return out;
  }

  SpectralField& operator+=(const SpectralField& o) {
    if (o.lmax != lmax) throw Error(Errc::band_limit_mismatch, "field sum");
    for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    if (o.lmax != lmax) throw Error(Errc::band_limit_mismatch, "field difference");
    for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (double& v : c) v *= a;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double a, SpectralField f) { return f *= a; }
};

// Point samples on a SphereGrid, row-major (colatitude ring, longitude).
struct GridField {
  int nlat = 0;
  int nlon = 0;
  std::vector<double> v;

  GridField() = default;
  GridField(int nla, int nlo) : nlat(nla), nlon(nlo), v(static_cast<size_t>(nla) * nlo, 0.0) {}

  double& at(int j, int k) { return v[static_cast<size_t>(j) * nlon + k]; }
  double at(int j, int k) const { return v[static_cast<size_t>(j) * nlon + k]; }

  double max() const {
    double m = v.empty() ? 0.0 : v[0];
    for (double x : v) m = std::max(m, x);
    return m;
  }
  double min() const {
    double m = v.empty() ? 0.0 : v[0];
    for (double x : v) m = std::min(m, x);
    return m;
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

}  // namespace nirenberg
