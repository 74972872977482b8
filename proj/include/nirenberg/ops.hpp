#pragma once

#include <array>
#include <functional>

#include "nirenberg/sht.hpp"

namespace nirenberg {
namespace ops {

// Laplace-Beltrami on the unit round sphere: c_{l,m} -> -l(l+1) c_{l,m}.
SpectralField laplacian(const SpectralField& f);

// Quadrature of point samples over S^2 (round measure, total 4 pi).
double integrate(const GridField& v, const SphereGrid& g);

// L^2 inner product of two coefficient vectors (band limits may differ).
double inner(const SpectralField& a, const SpectralField& b);

// sup over the grid of |f|.
double norm_inf(const SpectralField& f, const SphereGrid& g);

// Pointwise product projected back to band `out_lmax` (default: max input band).
SpectralField multiply(const SpectralField& a, const SpectralField& b, const SphereGrid& g, int out_lmax = -1);

// exp(scale * f) on the grid.
GridField exp_field(const SpectralField& f, const SphereGrid& g, double scale);

// Pointwise |grad f|^2 from the identity |grad f|^2 = 1/2 Lap(f^2) - f Lap f,
// evaluated spectrally; exact for band-limited f within grid capacity.
GridField gradient_sq(const SpectralField& f, const SphereGrid& g);

// Pointwise <grad f, grad h> by polarization:
// 1/2 (Lap(f h) - f Lap h - h Lap f).
GridField grad_inner(const SpectralField& f, const SpectralField& h, const SphereGrid& g);

// Ambient Cartesian components of the tangential gradient of f, as three
// spectral fields of band f.lmax + 1: component i is <grad f, grad x_i>.
// At a point q the vector (a_0, a_1, a_2)(q) is tangent to S^2 at q and
// equals grad f(q).
std::array<SpectralField, 3> gradient_field(const SpectralField& f, const SphereGrid& g);

// Coordinate functions x, y, z sampled on the grid.
GridField coordinate(const SphereGrid& g, int axis);

// f compose R: (f.R)(x) = f(Rx); R given row-major. Exact for band-limited f.
SpectralField rotate(const SpectralField& f, const double R[9], const SphereGrid& g);

// Sample an arbitrary function of the unit vector on the grid.
GridField sample(const SphereGrid& g, const std::function<double(double, double, double)>& fn);

// Analysis at the grid's full capacity, returning the fraction of energy
// above band `lmax` (used by the resolution guards) alongside the truncated
// field.
struct ProjectionResult {
  SpectralField field;   // truncated to the requested band
  double tail_fraction;  // energy in (lmax, capacity] / total energy
  double head_energy;
  double tail_energy;
};
ProjectionResult project_with_tail(const GridField& v, const SphereGrid& g, int lmax);

}  // namespace ops
}  // namespace nirenberg
