#include "nirenberg/obstruction.hpp"

#include <cmath>

namespace nirenberg {
namespace obstruction {

Vec3 kw_vector(const SpectralField& K, const SpectralField& u, const SphereGrid& g) {
  auto grad = ops::gradient_field(K, g);
  GridField e2u = ops::exp_field(u, g, 2.0);
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    GridField gi = sht::synthesize(grad[i], g);
    for (size_t n = 0; n < gi.v.size(); ++n) gi.v[n] *= e2u.v[n];
    out[i] = ops::integrate(gi, g);
  }
  return out;
}

Certificate sign_certificate(const SpectralField& K, const SphereGrid& g, const std::vector<Vec3>& extra_axes) {
  auto grad = ops::gradient_field(K, g);
  GridField gx = sht::synthesize(grad[0], g);
  GridField gy = sht::synthesize(grad[1], g);
  GridField gz = sht::synthesize(grad[2], g);

  double scale = 0.0;
  for (size_t n = 0; n < gx.v.size(); ++n)
    scale = std::max(scale, std::sqrt(gx.v[n] * gx.v[n] + gy.v[n] * gy.v[n] + gz.v[n] * gz.v[n]));
  const double eps_pos = 1e-8 * scale;
  const double eps_null = 1e-12 * scale;

  std::vector<Vec3> axes = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0),
                            Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
  for (const Vec3& a : extra_axes) {
    if (a.norm() > 0) {
      axes.push_back(a.normalized());
      axes.push_back(-a.normalized());
    }
  }

  Certificate best;
  for (const Vec3& a : axes) {
    double lo = 0.0, hi = 0.0;
    for (size_t n = 0; n < gx.v.size(); ++n) {
      double s = a.x() * gx.v[n] + a.y() * gy.v[n] + a.z() * gz.v[n];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    if (lo >= -eps_null && hi > eps_pos) {
      best.obstructed = true;
      best.axis = a;
      best.min_value = lo;
      best.max_value = hi;
      return best;
    }
  }
  return best;
}

SweepResult large_linear_sweep(const SpectralField& K, const Vec3& axis, const std::vector<double>& c_values,
                               const SphereGrid& g) {
  Vec3 p = axis.normalized();
  SpectralField ell(K.lmax);
  const double c1 = std::sqrt(kFourPi / 3.0);
  ell.at(1, 1) = c1 * p.x();
  ell.at(1, -1) = c1 * p.y();
  ell.at(1, 0) = c1 * p.z();

  SweepResult out;
  for (double c : c_values) {
    SweepRow row;
    row.c = c;
    SpectralField Kc = K + c * ell;
    Certificate cert = sign_certificate(Kc, g, {p});
    row.certificate_fired = cert.obstructed;
    row.axis = cert.axis;
    out.rows.push_back(row);
    if (cert.obstructed && !out.threshold.has_value()) out.threshold = c;
  }
  return out;
}

}  // namespace obstruction
}  // namespace nirenberg
