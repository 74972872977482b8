#pragma once

#include "nirenberg/sphere_grid.hpp"
#include "nirenberg/spectral_field.hpp"

namespace nirenberg {
namespace sht {

// Forward and inverse spherical-harmonic transforms. These use the grid's
// precomputed Legendre/trig plan and parallelize over latitude rings
// (synthesis) or azimuthal orders (analysis). analyze(synthesize(f)) is the
// identity on band-limited fields within the grid capacity.
GridField synthesize(const SpectralField& f, const SphereGrid& g);
SpectralField analyze(const GridField& v, const SphereGrid& g, int out_lmax = -1);

// Single-point evaluation (on-the-fly recurrences, no plan).
double eval_point(const SpectralField& f, double theta, double phi);
double eval_dir(const SpectralField& f, const double p[3]);

namespace serial {
// Plain reference transforms: direct quadrature loops, no plan, no
// parallelism. Kept as the oracle that the planned kernels are tested and
// benchmarked against.
GridField synthesize(const SpectralField& f, const SphereGrid& g);
SpectralField analyze(const GridField& v, const SphereGrid& g, int out_lmax = -1);
}  // namespace serial

}  // namespace sht
}  // namespace nirenberg
