#include "nirenberg/conformal.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace nirenberg {
namespace conformal {

namespace {

using C = std::complex<double>;

// 2x2 complex matrix in PGL(2,C), kept at det = 1. The Moebius action on
// the stereographic coordinate zeta = (x + iy)/(1 - z) realizes the
// conformal group; rotations sit in SU(2), dilations along an axis are
// positive hermitian.
struct M2 {
  C a, b, c, d;
  M2 mul(const M2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  C det() const { return a * d - b * c; }
  M2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
  void normalize_det() {
    C s = std::sqrt(det());
    a /= s;
    b /= s;
    c /= s;
    d /= s;
  }
};

struct Quat {
  double w, x, y, z;
};

Quat quat_from_matrix(const Mat3& R) {
  Quat q;
  double tr = R(0, 0) + R(1, 1) + R(2, 2);
  if (tr > 0) {
    double s = std::sqrt(tr + 1.0) * 2;
    q.w = 0.25 * s;
    q.x = (R(2, 1) - R(1, 2)) / s;
    q.y = (R(0, 2) - R(2, 0)) / s;
    q.z = (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2;
    q.w = (R(2, 1) - R(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (R(0, 1) + R(1, 0)) / s;
    q.z = (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2;
    q.w = (R(0, 2) - R(2, 0)) / s;
    q.x = (R(0, 1) + R(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (R(1, 2) + R(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2;
    q.w = (R(1, 0) - R(0, 1)) / s;
    q.x = (R(0, 2) + R(2, 0)) / s;
    q.y = (R(1, 2) + R(2, 1)) / s;
    q.z = 0.25 * s;
  }
  return q;
}

Mat3 quat_to_matrix(const Quat& qin) {
  Quat q = qin;
  double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  q.w /= n;
  q.x /= n;
  q.y /= n;
  q.z /= n;
  Mat3 R;
  R << 1 - 2 * (q.y * q.y + q.z * q.z), 2 * (q.x * q.y - q.w * q.z), 2 * (q.x * q.z + q.w * q.y),
      2 * (q.x * q.y + q.w * q.z), 1 - 2 * (q.x * q.x + q.z * q.z), 2 * (q.y * q.z - q.w * q.x),
      2 * (q.x * q.z - q.w * q.y), 2 * (q.y * q.z + q.w * q.x), 1 - 2 * (q.x * q.x + q.y * q.y);
  return R;
}

// Rotation by angle g about axis n <-> U = cos(g/2) I + i sin(g/2) H(n),
// dilation along p <-> exp(-(log t / 2) H(p)), with the hermitian generator
// H(p) = [[p_z, p_x + i p_y], [p_x - i p_y, -p_z]]. The sign of the y entry
// matches the orientation of the chart zeta = (x + iy)/(1 - z).
M2 su2_from_rotation(const Mat3& R) {
  Quat q = quat_from_matrix(R);
  return {C(q.w, q.z), C(-q.y, q.x), C(q.y, q.x), C(q.w, -q.z)};
}

M2 hermitian_from_dilation(const Vec3& p, double t) {
  double s = 0.5 * std::log(t);
  double ch = std::cosh(s), sh = std::sinh(s);
  return {C(ch - sh * p.z(), 0), C(-sh * p.x(), -sh * p.y()), C(-sh * p.x(), sh * p.y()), C(ch + sh * p.z(), 0)};
}

M2 to_mobius(const ConformalMap& m) { return su2_from_rotation(m.rotation).mul(hermitian_from_dilation(m.pole, m.t)); }

ConformalMap from_mobius(M2 A) {
  A.normalize_det();
  M2 H = A.adjoint().mul(A);  // = P^2, positive hermitian, det 1
  double trH = (H.a + H.d).real();
  double denom = std::sqrt(std::max(trH + 2.0, 1e-300));
  M2 P{(H.a + 1.0) / denom, H.b / denom, H.c / denom, (H.d + 1.0) / denom};

  ConformalMap out;
  double ch = 0.5 * (P.a + P.d).real();
  double sh = std::sqrt(std::max(ch * ch - 1.0, 0.0));
  if (sh < 1e-14) {
    out.pole = Vec3(0, 0, 1);
    out.t = 1.0;
  } else {
    Vec3 p;
    p.z() = (ch - P.a.real()) / sh;
    C xi = -P.b / sh;  // = p_x + i p_y
    p.x() = xi.real();
    p.y() = xi.imag();
    p.normalize();
    double s = std::asinh(sh);
    out.pole = p;
    out.t = std::exp(2.0 * s);
    // Recompute the hermitian factor from the extracted (p, t) so the
    // rotation part below stays orthogonal to machine precision.
  }
  // Q = A P^{-1}, P^{-1} = (tr P) I - P since det P = 1.
  double trP = (P.a + P.d).real();
  M2 Pinv{trP - P.a, -P.b, -P.c, trP - P.d};
  M2 Q = A.mul(Pinv);
  Quat q;
  q.w = 0.5 * (Q.a + Q.d).real();
  q.z = 0.5 * (Q.a - Q.d).imag();
  q.x = 0.5 * (Q.b + Q.c).imag();
  q.y = 0.5 * (Q.c - Q.b).real();
  out.rotation = quat_to_matrix(q);
  return out;
}

// Dilation geometry in closed form: with c = <p, x>,
//   denom = (1 + c) + t^2 (1 - c),
//   cos r' = ((1 + c) - t^2 (1 - c)) / denom,  sin r' = 2 t sin r / denom,
//   chi = 2 t / denom.
Vec3 dilate_point(const Vec3& p, double t, const Vec3& x) {
  double c = p.dot(x);
  Vec3 tang = x - c * p;
  double s = tang.norm();
  double denom = (1.0 + c) + t * t * (1.0 - c);
  double cosr = ((1.0 + c) - t * t * (1.0 - c)) / denom;
  if (s < 1e-15) return (c >= 0) ? p : -p;
  double sinr = 2.0 * t * s / denom;
  return cosr * p + (sinr / s) * tang;
}

}  // namespace

ConformalMap ConformalMap::dilation(const Vec3& p, double t) {
  if (!(t > 0.0)) throw Error(Errc::config_error, "dilation parameter must be positive");
  ConformalMap m;
  m.pole = p.normalized();
  m.t = t;
  return m;
}

ConformalMap ConformalMap::from_rotation(const Mat3& R) {
  ConformalMap m;
  m.rotation = R;
  return m;
}

Vec3 ConformalMap::apply(const Vec3& x) const { return rotation * dilate_point(pole, t, x); }

double ConformalMap::factor(const Vec3& x) const {
  double c = pole.dot(x);
  return 2.0 * t / ((1.0 + c) + t * t * (1.0 - c));
}

ConformalMap ConformalMap::inverse() const {
  ConformalMap inv;
  inv.rotation = rotation.transpose();
  inv.pole = rotation * pole;
  inv.t = 1.0 / t;
  return inv;
}

bool ConformalMap::is_identity(double tol) const {
  return std::abs(t - 1.0) < tol && (rotation - Mat3::Identity()).norm() < tol;
}

ConformalMap compose(const ConformalMap& f, const ConformalMap& g) {
  return from_mobius(to_mobius(f).mul(to_mobius(g)));
}

SpectralField pullback_u(const SpectralField& u, const ConformalMap& phi, const SphereGrid& g,
                         double tail_tol) {
  GridField vals(g.nlat, g.nlon);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) {
      double p[3];
      g.node(j, k, p);
      Vec3 x(p[0], p[1], p[2]);
      Vec3 y = phi.apply(x);
      double img[3] = {y.x(), y.y(), y.z()};
      vals.at(j, k) = sht::eval_dir(u, img) + std::log(phi.factor(x));
    }
  auto pr = ops::project_with_tail(vals, g, u.lmax);
  // Judge the tail against the larger of the output and input scales, so a
  // pullback that legitimately cancels to near zero is not flagged for its
  // roundoff floor.
  double input_energy = u.norm_l2() * u.norm_l2();
  double reference = std::max({pr.head_energy + pr.tail_energy, input_energy, 1e-30});
  if (pr.tail_energy > tail_tol * reference)
    throw Error(Errc::resolution_exceeded,
                "pullback tail fraction " + std::to_string(pr.tail_fraction));
  return pr.field;
}

Vec3 center_of_mass(const SpectralField& u, const SphereGrid& g) {
  GridField e2u = ops::exp_field(u, g, 2.0);
  Vec3 m = Vec3::Zero();
  const double wlon = 2.0 * std::numbers::pi / g.nlon;
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) {
      double p[3];
      g.node(j, k, p);
      double wq = g.w[j] * wlon * e2u.at(j, k);
      m += wq * Vec3(p[0], p[1], p[2]);
    }
  return m;
}

namespace {

ConformalMap dilation_from_coords(const Vec3& a) {
  double n = a.norm();
  if (n < 1e-16) return ConformalMap::identity();
  return ConformalMap::dilation(a / n, std::exp(n));
}

// Moments of pullback_u(u, phi_a) by change of variables: only the inverse
// map moves, exp(2u) is sampled once.
Vec3 moments_of_pullback(const GridField& e2u, const SphereGrid& g, const Vec3& a) {
  ConformalMap inv = dilation_from_coords(a).inverse();
  const double wlon = 2.0 * std::numbers::pi / g.nlon;
  Vec3 m = Vec3::Zero();
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) {
      double p[3];
      g.node(j, k, p);
      Vec3 y = inv.apply(Vec3(p[0], p[1], p[2]));
      m += g.w[j] * wlon * e2u.at(j, k) * y;
    }
  return m;
}

}  // namespace

std::pair<SlicePoint, ConformalMap> project_to_slice(const SpectralField& u, const SphereGrid& g,
                                                     const SliceOptions& opts) {
  GridField e2u = ops::exp_field(u, g, 2.0);
  Vec3 a = Vec3::Zero();
  Vec3 m = moments_of_pullback(e2u, g, a);
  double target = 0.1 * opts.tol;
  int it = 0;
  for (; it < opts.max_iter && m.norm() > target; ++it) {
    // Finite-difference Jacobian of the moment map.
    Mat3 J;
    double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
      Vec3 ap = a, am = a;
      ap[c] += h;
      am[c] -= h;
      J.col(c) = (moments_of_pullback(e2u, g, ap) - moments_of_pullback(e2u, g, am)) / (2 * h);
    }
    Vec3 step = J.fullPivLu().solve(-m);
    double alpha = 1.0;
    Vec3 m_new;
    while (true) {
      m_new = moments_of_pullback(e2u, g, a + alpha * step);
      if (m_new.norm() < (1.0 - 1e-4 * alpha) * m.norm() || alpha < 1e-4) break;
      alpha *= 0.5;
    }
    if (m_new.norm() >= m.norm()) break;  // stalled
    a += alpha * step;
    m = m_new;
  }
  if (m.norm() > opts.tol)
    throw Error(Errc::slice_projection_failed,
                "moment norm " + std::to_string(m.norm()) + " after " + std::to_string(it) + " iterations");

  ConformalMap phi = dilation_from_coords(a);
  SlicePoint sp;
  sp.u = phi.is_identity() ? u : pullback_u(u, phi, g);
  sp.moments = center_of_mass(sp.u, g);
  return {sp, phi};
}

nlohmann::json map_to_json(const ConformalMap& m) {
  nlohmann::json j;
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(m.rotation(r, c));
  j["rotation"] = rot;
  j["pole"] = {m.pole.x(), m.pole.y(), m.pole.z()};
  j["t"] = m.t;
  return j;
}

ConformalMap map_from_json(const nlohmann::json& j) {
  ConformalMap m;
  auto rot = j.at("rotation");
  if (rot.size() != 9) throw Error(Errc::parse_error, "rotation needs 9 entries");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.rotation(r, c) = rot[3 * r + c].get<double>();
  auto pole = j.at("pole");
  if (pole.size() != 3) throw Error(Errc::parse_error, "pole needs 3 entries");
  for (int c = 0; c < 3; ++c) m.pole[c] = pole[c].get<double>();
  m.t = j.at("t").get<double>();
  if (!(m.t > 0)) throw Error(Errc::parse_error, "dilation parameter must be positive");
  return m;
}

}  // namespace conformal
}  // namespace nirenberg
