#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nirenberg/conformal.hpp"
#include "nirenberg/curvature.hpp"

namespace nirenberg {
namespace exact {

// (u, K) with u an eigenfunction of the sphere Laplacian (Lap u = -lambda u,
// lambda = l(l+1)), so that K = exp(-2u)(1 + lambda u) in closed form. The
// critical locus of K is crit(u) together with the level set
// {u = (lambda-2)/(2 lambda)}, and at critical points of u
//   Lap K = -exp(-2u)((lambda-2) - 2 lambda u) lambda u.
struct EigenPair {
  SpectralField u;
  SpectralField K;  // band-limited projection of the closed form
  int degree_l = 0;
  double lambda = 0.0;
  double crit_level = 0.0;  // (lambda-2)/(2 lambda)
  std::function<double(double, double, double)> K_exact;
  std::function<double(double, double, double)> u_exact_lap_K;  // closed-form Lap K at crit(u)
};

// u = scale * sum_m coeffs[m + l] Y_{l,m}; zero-input error when all
// coefficients vanish.
EigenPair eigenfunction_pair(int l, const std::vector<double>& m_coeffs, double scale, int lmax,
                             const SphereGrid& g);

// The quarter (x^2 - y^2) example: three pairs of critical points, saddles
// at the poles with Lap K = 0.
EigenPair eigenfunction_r46(int lmax, const SphereGrid& g);

// u = log chi_{p,t}, K = 1. resolution-exceeded for t beyond the band limit.
struct BubblePair {
  SpectralField u;
  SpectralField K;
  conformal::ConformalMap map;
};
BubblePair bubble_pair(const conformal::Vec3& p, double t, int lmax, const SphereGrid& g);

// Curvature of a perturbation of the r46 factor by localized bumps at the
// poles, resolving each pole saddle to the requested sign of Lap K.
// signs: +1 or -1 per pole (north, south). classification-failed when the
// classifier does not confirm the request.
SpectralField perturbed_saddle_family(int north_sign, int south_sign, double amplitude, int lmax,
                                      const SphereGrid& g);

// Named presets for the CLI: returns the curvature field to feed commands,
// plus the exact factor u when one exists.
struct Preset {
  std::string name;
  SpectralField K;
  std::optional<SpectralField> u;
  std::string description;
};
Preset make_preset(const std::string& name, int lmax);
std::vector<std::string> preset_names();

}  // namespace exact
}  // namespace nirenberg
