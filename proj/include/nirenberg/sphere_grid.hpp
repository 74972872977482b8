#pragma once

#include <vector>

namespace nirenberg {

// Gauss-Legendre colatitude nodes x uniform longitudes, plus the transform
// plan (normalized associated Legendre table and trig tables) shared by all
// spectral operations on this grid.
//
// A grid made for band limit L with oversampling q has
//   nlat = ceil(q*(L+1))   >=  L+1,
//   nlon = ceil(q*(2L+1))  >=  2L+1,
// which integrates band-limited integrands exactly up to the plan capacity
// below. Pointwise nonlinearities (exp, products) are evaluated on the grid
// and re-projected; the oversampling keeps products of band-limited fields
// alias-free up to capacity().
struct SphereGrid {
  int lmax = 0;        // declared band limit of fields living on this grid
  double oversample = 2.0;
  int nlat = 0;
  int nlon = 0;

  std::vector<double> theta;  // colatitudes, increasing, size nlat
  std::vector<double> x;      // cos(theta)
  std::vector<double> sin_theta;
  std::vector<double> w;      // Gauss-Legendre weights, sum = 2

  // plm[pair_index(l,m) * nlat + j] = normalized associated Legendre
  // Q_l^m(x_j) with  integral over S^2 of (sqrt(2-delta_m0) Q cos(m phi))^2 = 1,
  // built for all 0 <= m <= l <= capacity().
  std::vector<double> plm;
  // cos_m[m * nlon + k] = cos(m phi_k), sin_m likewise, m <= capacity().
  std::vector<double> cos_m;
  std::vector<double> sin_m;

  static SphereGrid make(int lmax, double oversample = 2.0);

  // Largest band limit this grid can analyze exactly.
  int capacity() const { return cap_; }

  double phi(int k) const;
  // Unit vector of node (j, k).
  void node(int j, int k, double out[3]) const;

  int pair_index(int l, int m) const { return l * (l + 1) / 2 + m; }
  const double* plm_row(int l, int m) const { return plm.data() + static_cast<size_t>(pair_index(l, m)) * nlat; }

 private:
  int cap_ = 0;
};

// Gauss-Legendre nodes and weights on [-1, 1]; nodes descending so that the
// corresponding colatitudes increase. Weights sum to 2.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Fills q[l] = Q_l^m(x) for l = m..lmax (normalized as above); entries below
// m are untouched. Used for point evaluation away from the precomputed grid.
void legendre_column(int lmax, int m, double x, double s, double* q);

}  // namespace nirenberg
