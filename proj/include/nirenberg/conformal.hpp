#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include "nirenberg/ops.hpp"

namespace nirenberg {
namespace conformal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Element of Conf(S^2): rotation composed after the dilation along `pole`
// with parameter t, i.e. apply(x) = rotation * dilate_{pole,t}(x).
//
// The dilation is scaling by t in the stereographic chart centered at the
// pole (pole at the chart origin), so the pole is the source and -pole the
// sink for t > 1; t = 1 with rotation = identity is the identity map.
struct ConformalMap {
  Mat3 rotation = Mat3::Identity();
  Vec3 pole = Vec3(0, 0, 1);
  double t = 1.0;

  static ConformalMap identity() { return {}; }
  static ConformalMap dilation(const Vec3& p, double t);
  static ConformalMap from_rotation(const Mat3& R);

  Vec3 apply(const Vec3& x) const;
  // chi with chi^2 = det D(apply); equals the dilation factor (rotations
  // contribute 1).
  double factor(const Vec3& x) const;

  ConformalMap inverse() const;
  bool is_identity(double tol = 1e-14) const;
};

// Composition (a then b is compose(b, a)): compose(f, g).apply(x) =
// f.apply(g.apply(x)). Goes through SL(2,C) and re-extracts the
// rotation/dilation split by polar decomposition.
ConformalMap compose(const ConformalMap& f, const ConformalMap& g);

// Pullback of a conformal factor: phi* u = u(phi(.)) + log chi_phi, so that
// exp(2 phi*u) g_round = phi^*(exp(2u) g_round). Throws resolution-exceeded
// when the re-projected field leaves more than `tail_tol` of its energy
// above band u.lmax.
SpectralField pullback_u(const SpectralField& u, const ConformalMap& phi, const SphereGrid& g,
                         double tail_tol = 1e-6);

// The three moments integral exp(2u) x_i dv.
Vec3 center_of_mass(const SpectralField& u, const SphereGrid& g);

struct SlicePoint {
  SpectralField u;
  Vec3 moments;  // certificate: all below the slice tolerance
};

struct SliceOptions {
  double tol = 1e-9;
  int max_iter = 50;
};

// Unique dilation phi with center_of_mass(pullback_u(u, phi)) = 0, found by
// damped Newton in the coordinates log(t) * pole of the dilation factor.
// Returns the slice representative and the normalizing map.
std::pair<SlicePoint, ConformalMap> project_to_slice(const SpectralField& u, const SphereGrid& g,
                                                     const SliceOptions& opts = {});

// Serialization: {"rotation": [9 row-major], "pole": [3], "t": value}.
nlohmann::json map_to_json(const ConformalMap& m);
ConformalMap map_from_json(const nlohmann::json& j);

}  // namespace conformal
}  // namespace nirenberg
