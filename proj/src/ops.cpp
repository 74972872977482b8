#include "nirenberg/ops.hpp"

#include <cmath>
#include <numbers>

namespace nirenberg {
namespace ops {

SpectralField laplacian(const SpectralField& f) {
  SpectralField out(f.lmax);
  for (int l = 0; l <= f.lmax; ++l) {
    double mult = -static_cast<double>(l) * (l + 1);
    for (int m = -l; m <= l; ++m) out.at(l, m) = mult * f.at(l, m);
  }
  return out;
}

double integrate(const GridField& v, const SphereGrid& g) {
  if (v.nlat != g.nlat || v.nlon != g.nlon) throw Error(Errc::shape_mismatch, "integrate");
  const double wlon = 2.0 * std::numbers::pi / g.nlon;
  double total = 0.0;
#pragma omp parallel for reduction(+ : total) schedule(static)
  for (int j = 0; j < g.nlat; ++j) {
    double ring = 0.0;
    const double* row = v.v.data() + static_cast<size_t>(j) * g.nlon;
    for (int k = 0; k < g.nlon; ++k) ring += row[k];
    total += g.w[j] * wlon * ring;
  }
  return total;
}

double inner(const SpectralField& a, const SpectralField& b) {
  int lo = std::min(a.lmax, b.lmax);
  double s = 0.0;
  for (int l = 0; l <= lo; ++l)
    for (int m = -l; m <= l; ++m) s += a.at(l, m) * b.at(l, m);
  return s;
}

double norm_inf(const SpectralField& f, const SphereGrid& g) { return sht::synthesize(f, g).max_abs(); }

SpectralField multiply(const SpectralField& a, const SpectralField& b, const SphereGrid& g, int out_lmax) {
  if (out_lmax < 0) out_lmax = std::max(a.lmax, b.lmax);
  GridField va = sht::synthesize(a, g);
  GridField vb = sht::synthesize(b, g);
  for (size_t i = 0; i < va.v.size(); ++i) va.v[i] *= vb.v[i];
  return sht::analyze(va, g, out_lmax);
}

GridField exp_field(const SpectralField& f, const SphereGrid& g, double scale) {
  GridField v = sht::synthesize(f, g);
  for (double& x : v.v) x = std::exp(scale * x);
  return v;
}

GridField gradient_sq(const SpectralField& f, const SphereGrid& g) {
  GridField fv = sht::synthesize(f, g);
  GridField f2 = fv;
  for (size_t i = 0; i < f2.v.size(); ++i) f2.v[i] *= fv.v[i];
  int band2 = std::min(2 * f.lmax, g.capacity());
  SpectralField lap_f2 = laplacian(sht::analyze(f2, g, band2));
  GridField lap_f2_v = sht::synthesize(lap_f2, g);
  GridField lap_f_v = sht::synthesize(laplacian(f), g);
  GridField out(g.nlat, g.nlon);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = 0.5 * lap_f2_v.v[i] - fv.v[i] * lap_f_v.v[i];
  return out;
}

GridField grad_inner(const SpectralField& f, const SpectralField& h, const SphereGrid& g) {
  GridField fv = sht::synthesize(f, g);
  GridField hv = sht::synthesize(h, g);
  GridField fh = fv;
  for (size_t i = 0; i < fh.v.size(); ++i) fh.v[i] *= hv.v[i];
  int band = std::min(f.lmax + h.lmax, g.capacity());
  GridField lap_fh = sht::synthesize(laplacian(sht::analyze(fh, g, band)), g);
  GridField lap_f = sht::synthesize(laplacian(f), g);
  GridField lap_h = sht::synthesize(laplacian(h), g);
  GridField out(g.nlat, g.nlon);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = 0.5 * (lap_fh.v[i] - fv.v[i] * lap_h.v[i] - hv.v[i] * lap_f.v[i]);
  return out;
}

GridField coordinate(const SphereGrid& g, int axis) {
  GridField out(g.nlat, g.nlon);
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) {
      double p[3];
      g.node(j, k, p);
      out.at(j, k) = p[axis];
    }
  return out;
}

std::array<SpectralField, 3> gradient_field(const SpectralField& f, const SphereGrid& g) {
  int band = std::min(f.lmax + 1, g.capacity());
  GridField fv = sht::synthesize(f, g);
  GridField lap_fv = sht::synthesize(laplacian(f), g);
  std::array<SpectralField, 3> out;
  for (int i = 0; i < 3; ++i) {
    GridField xi = coordinate(g, i);
    GridField fx(g.nlat, g.nlon);
    for (size_t n = 0; n < fx.v.size(); ++n) fx.v[n] = fv.v[n] * xi.v[n];
    SpectralField fxs = sht::analyze(fx, g, band);
    // <grad f, grad x_i> = 1/2 (Lap(f x_i) + 2 f x_i - x_i Lap f)
    GridField lap_fx = sht::synthesize(laplacian(fxs), g);
    GridField comp(g.nlat, g.nlon);
    for (size_t n = 0; n < comp.v.size(); ++n)
      comp.v[n] = 0.5 * (lap_fx.v[n] + 2.0 * fx.v[n] - xi.v[n] * lap_fv.v[n]);
    out[i] = sht::analyze(comp, g, band);
  }
  return out;
}

GridField sample(const SphereGrid& g, const std::function<double(double, double, double)>& fn) {
  GridField out(g.nlat, g.nlon);
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) {
      double p[3];
      g.node(j, k, p);
      out.at(j, k) = fn(p[0], p[1], p[2]);
    }
  return out;
}

SpectralField rotate(const SpectralField& f, const double R[9], const SphereGrid& g) {
  GridField vals(g.nlat, g.nlon);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) {
      double p[3];
      g.node(j, k, p);
      double q[3] = {R[0] * p[0] + R[1] * p[1] + R[2] * p[2], R[3] * p[0] + R[4] * p[1] + R[5] * p[2],
                     R[6] * p[0] + R[7] * p[1] + R[8] * p[2]};
      vals.at(j, k) = sht::eval_dir(f, q);
    }
  return sht::analyze(vals, g, f.lmax);
}

ProjectionResult project_with_tail(const GridField& v, const SphereGrid& g, int lmax) {
  SpectralField full = sht::analyze(v, g, g.capacity());
  double head = 0.0, tail = 0.0;
  for (int l = 0; l <= full.lmax; ++l)
    for (int m = -l; m <= l; ++m) {
      double c2 = full.at(l, m) * full.at(l, m);
      (l <= lmax ? head : tail) += c2;
    }
  ProjectionResult r;
  r.field = full.projected(lmax);
  r.head_energy = head;
  r.tail_energy = tail;
  double total = head + tail;
  r.tail_fraction = (total > 0.0) ? tail / total : 0.0;
  return r;
}

}  // namespace ops
}  // namespace nirenberg
