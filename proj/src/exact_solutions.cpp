#include "nirenberg/exact_solutions.hpp"

#include <cmath>
#include <numbers>

#include "nirenberg/morse.hpp"

namespace nirenberg {
namespace exact {

EigenPair eigenfunction_pair(int l, const std::vector<double>& m_coeffs, double scale, int lmax,
                             const SphereGrid& g) {
  if (l < 1) throw Error(Errc::zero_input, "eigenfunction degree must be >= 1");
  if (static_cast<int>(m_coeffs.size()) != 2 * l + 1)
    throw Error(Errc::config_error, "need 2l+1 coefficients");
  EigenPair pair;
  pair.degree_l = l;
  pair.lambda = static_cast<double>(l) * (l + 1);
  pair.crit_level = (pair.lambda - 2.0) / (2.0 * pair.lambda);
  pair.u = SpectralField(lmax);
  double total = 0.0;
  for (int m = -l; m <= l; ++m) {
    pair.u.at(l, m) = scale * m_coeffs[m + l];
    total += std::abs(m_coeffs[m + l]);
  }
  if (total == 0.0 || scale == 0.0) throw Error(Errc::zero_input, "eigenfunction with zero amplitude");

  double lambda = pair.lambda;
  SpectralField u = pair.u;
  pair.K_exact = [u, lambda](double x, double y, double z) {
    double p[3] = {x, y, z};
    double uv = sht::eval_dir(u, p);
    return std::exp(-2.0 * uv) * (1.0 + lambda * uv);
  };
  pair.u_exact_lap_K = [u, lambda](double x, double y, double z) {
    double p[3] = {x, y, z};
    double uv = sht::eval_dir(u, p);
    return -std::exp(-2.0 * uv) * ((lambda - 2.0) - 2.0 * lambda * uv) * lambda * uv;
  };

  GridField Kv = ops::sample(g, pair.K_exact);
  pair.K = sht::analyze(Kv, g, lmax);
  return pair;
}

EigenPair eigenfunction_r46(int lmax, const SphereGrid& g) {
  // u = (x^2 - y^2)/4 lives purely in the (2, 2) real harmonic.
  SpectralField probe = sht::analyze(
      ops::sample(g, [](double x, double y, double) { return 0.25 * (x * x - y * y); }), g, 2);
  std::vector<double> coeffs(5, 0.0);
  for (int m = -2; m <= 2; ++m) coeffs[m + 2] = probe.at(2, m);
  return eigenfunction_pair(2, coeffs, 1.0, lmax, g);
}

BubblePair bubble_pair(const conformal::Vec3& p, double t, int lmax, const SphereGrid& g) {
  if (!(t > 0)) throw Error(Errc::config_error, "dilation parameter must be positive");
  BubblePair out;
  out.map = conformal::ConformalMap::dilation(p, t);
  out.u = conformal::pullback_u(SpectralField(lmax), out.map, g);
  out.K = SpectralField::constant(lmax, 1.0);
  return out;
}

namespace {

// Polynomial polar cap (z^10 + z^11)/2: value 1 at the north pole, 0 at the
// south, ~5e-6 by thirty degrees off the equator. Exactly band-limited with
// degree 11, so the perturbed field has no projection tail. Near the pole
// the cap is 1 - q theta^2 with q = 5.25, so it shifts the Laplacian there
// by -4 q eps while moving the saddle Hessian eigenvalues (+2, -2) only by
// -q eps.
double cap_north(double z) {
  double z2 = z * z;
  double z10 = z2 * z2 * z2 * z2 * z2;
  return 0.5 * (z10 + z10 * z);
}

}  // namespace

SpectralField perturbed_saddle_family(int north_sign, int south_sign, double amplitude, int lmax,
                                      const SphereGrid& g) {
  if (north_sign == 0 || south_sign == 0) throw Error(Errc::config_error, "signs are +1 or -1");
  if (lmax < 11) throw Error(Errc::invalid_band_limit, "family needs band limit >= 11");
  EigenPair base = eigenfunction_r46(lmax, g);

  auto build = [&](double eps_n, double eps_s) {
    GridField vals = ops::sample(g, [&](double x, double y, double z) {
      (void)x;
      (void)y;
      return eps_n * cap_north(z) + eps_s * cap_north(-z);
    });
    SpectralField K = base.K + sht::analyze(vals, g, lmax);
    return K;
  };

  double eps_n = -north_sign * amplitude;
  double eps_s = -south_sign * amplitude;
  SpectralField K = build(eps_n, eps_s);

  // Classifier feedback: confirm the two near-pole saddles carry the
  // requested Laplacian signs; flip the mapping if the first guess missed.
  auto verify = [&](const SpectralField& cand) {
    morse::MorseReport rep = morse::classify_regions(cand, g);
    int got_n = 0, got_s = 0;
    for (const auto& cp : rep.points) {
      if (cp.type != morse::CritType::saddle) continue;
      if (cp.location.z() > 0.8) got_n = (cp.lap > rep.eps_n) ? 1 : (cp.lap < -rep.eps_n ? -1 : 0);
      if (cp.location.z() < -0.8) got_s = (cp.lap > rep.eps_n) ? 1 : (cp.lap < -rep.eps_n ? -1 : 0);
    }
    return got_n == north_sign && got_s == south_sign;
  };
  if (verify(K)) return K;
  K = build(-eps_n, -eps_s);
  if (verify(K)) return K;
  throw Error(Errc::classification_failed, "requested saddle signs not achieved at this amplitude");
}

Preset make_preset(const std::string& name, int lmax) {
  SphereGrid g = SphereGrid::make(lmax);
  Preset p;
  p.name = name;
  if (name == "round") {
    p.K = SpectralField::constant(lmax, 1.0);
    p.u = SpectralField(lmax);
    p.description = "constant curvature 1";
  } else if (name == "tilt-z") {
    p.K = SpectralField::constant(lmax, 1.0);
    p.K.at(1, 0) += 0.1 * std::sqrt(kFourPi / 3.0);
    p.description = "K = 1 + 0.1 z";
  } else if (name == "one-plus-z") {
    p.K = SpectralField::constant(lmax, 1.0);
    p.K.at(1, 0) += std::sqrt(kFourPi / 3.0);
    p.description = "K = 1 + z (obstructed)";
  } else if (name == "eig-l2-xy") {
    EigenPair e = eigenfunction_r46(lmax, g);
    p.K = e.K;
    p.u = e.u;
    p.description = "curvature of the (x^2 - y^2)/4 eigenfunction factor";
  } else if (name == "bubble-t2") {
    BubblePair b = bubble_pair(conformal::Vec3(0, 0, 1), 2.0, lmax, g);
    p.K = b.K;
    p.u = b.u;
    p.description = "round curvature with the t = 2 dilation factor";
  } else if (name == "r46-plus-plus") {
    p.K = perturbed_saddle_family(+1, +1, 0.05, lmax, g);
    p.description = "r46 with both pole saddles resolved to positive Lap K";
  } else if (name == "r46-minus-minus") {
    p.K = perturbed_saddle_family(-1, -1, 0.05, lmax, g);
    p.description = "r46 with both pole saddles resolved to negative Lap K";
  } else if (name == "r46-plus-minus") {
    p.K = perturbed_saddle_family(+1, -1, 0.05, lmax, g);
    p.description = "r46 with pole saddles resolved to opposite Lap K signs";
  } else {
    throw Error(Errc::config_error, "unknown preset: " + name);
  }
  return p;
}

std::vector<std::string> preset_names() {
  return {"round", "tilt-z", "one-plus-z", "eig-l2-xy", "bubble-t2", "r46-plus-plus", "r46-minus-minus",
          "r46-plus-minus"};
}

}  // namespace exact
}  // namespace nirenberg
