#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nirenberg/ops.hpp"
#include "nirenberg/sht.hpp"

using namespace nirenberg;

namespace {

SpectralField random_field(int lmax, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField f(lmax);
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) f.at(l, m) = amp * gauss(rng) / (1.0 + l);
  return f;
}

double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (int l = 0; l <= std::max(a.lmax, b.lmax); ++l)
    for (int mm = -l; mm <= l; ++mm) {
      double va = (l <= a.lmax) ? a.at(l, mm) : 0.0;
      double vb = (l <= b.lmax) ? b.at(l, mm) : 0.0;
      m = std::max(m, std::abs(va - vb));
    }
  return m;
}

}  // namespace

TEST_CASE("grid construction and quadrature normalization") {
  SphereGrid g = SphereGrid::make(8, 2.0);
  CHECK(g.nlat >= 17);
  CHECK(g.nlon >= 33);
  double wsum = 0.0;
  for (double w : g.w) wsum += w;
  CHECK(std::abs(wsum - 2.0) < 1e-14);

  SphereGrid gmin = SphereGrid::make(2, 1.0);
  CHECK(gmin.nlat >= 3);
  CHECK(gmin.nlon >= 5);

  CHECK_THROWS_AS(SphereGrid::make(1, 1.0), Error);
}

TEST_CASE("synthesis of elementary fields") {
  SphereGrid g = SphereGrid::make(8);
  SpectralField one = SpectralField::constant(8, 1.0);
  GridField v = sht::synthesize(one, g);
  for (double x : v.v) CHECK(std::abs(x - 1.0) < 1e-13);

  SpectralField y10(8);
  y10.at(1, 0) = 1.0;
  GridField vy = sht::synthesize(y10, g);
  const double c = std::sqrt(3.0 / kFourPi);
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) CHECK(std::abs(vy.at(j, k) - c * g.x[j]) < 1e-13);
}

TEST_CASE("l=1 basis spans the coordinate functions") {
  SphereGrid g = SphereGrid::make(6);
  const double c = std::sqrt(3.0 / kFourPi);
  for (int axis = 0; axis < 3; ++axis) {
    SpectralField f = sht::analyze(ops::coordinate(g, axis), g, 6);
    // +x pairs with m=+1, +y pairs with m=-1, +z with m=0.
    int m = (axis == 0) ? 1 : (axis == 1) ? -1 : 0;
    CHECK(f.at(1, m) * c == doctest::Approx(1.0).epsilon(1e-12));
    for (int l = 0; l <= 6; ++l)
      for (int mm = -l; mm <= l; ++mm)
        if (!(l == 1 && mm == m)) CHECK(std::abs(f.at(l, mm)) < 1e-13);
  }
}

TEST_CASE("round trip analyze(synthesize) is the identity") {
  for (int lmax : {8, 16, 32, 48}) {
    SphereGrid g = SphereGrid::make(lmax);
    SpectralField f = random_field(lmax, 7 + lmax);
    SpectralField back = sht::analyze(sht::synthesize(f, g), g, lmax);
    CHECK(max_coeff_diff(f, back) < 1e-12);
  }
}

TEST_CASE("analyze of zeros and of cos(colatitude)") {
  SphereGrid g = SphereGrid::make(8);
  GridField zeros(g.nlat, g.nlon);
  SpectralField z = sht::analyze(zeros, g, 8);
  CHECK(z.norm_l2() == 0.0);

  GridField cosv(g.nlat, g.nlon);
  for (int j = 0; j < g.nlat; ++j)
    for (int k = 0; k < g.nlon; ++k) cosv.at(j, k) = g.x[j];
  SpectralField f = sht::analyze(cosv, g, 8);
  // z = sqrt(4pi/3) Y_{1,0}
  CHECK(f.at(1, 0) == doctest::Approx(std::sqrt(kFourPi / 3.0)).epsilon(1e-13));
  for (int l = 0; l <= 8; ++l)
    for (int m = -l; m <= l; ++m)
      if (!(l == 1 && m == 0)) CHECK(std::abs(f.at(l, m)) < 1e-13);
}

TEST_CASE("planned kernels match the serial reference") {
  SphereGrid g = SphereGrid::make(10, 1.5);
  SpectralField f = random_field(10, 3);
  GridField a = sht::synthesize(f, g);
  GridField b = sht::serial::synthesize(f, g);
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  CHECK(m < 1e-12);

  SpectralField ca = sht::analyze(a, g, 10);
  SpectralField cb = sht::serial::analyze(a, g, 10);
  CHECK(max_coeff_diff(ca, cb) < 1e-12);
}

TEST_CASE("laplacian spectral multiplier") {
  SpectralField one = SpectralField::constant(8, 3.5);
  CHECK(ops::laplacian(one).norm_l2() == 0.0);

  SpectralField y1(8);
  y1.at(1, -1) = 2.0;
  SpectralField l1 = ops::laplacian(y1);
  CHECK(l1.at(1, -1) == doctest::Approx(-4.0));

  // u = (x^2 - y^2)/4 is a lambda = 6 eigenfunction.
  SphereGrid g = SphereGrid::make(8);
  SpectralField u = sht::analyze(ops::sample(g, [](double x, double y, double) { return 0.25 * (x * x - y * y); }), g, 8);
  SpectralField lap_u = ops::laplacian(u);
  SpectralField expect = -6.0 * u;
  CHECK(max_coeff_diff(lap_u, expect) < 1e-13);
}

TEST_CASE("integrate closed forms") {
  SphereGrid g = SphereGrid::make(8);
  GridField one(g.nlat, g.nlon);
  for (double& v : one.v) v = 1.0;
  CHECK(ops::integrate(one, g) == doctest::Approx(kFourPi).epsilon(1e-12));

  SpectralField y10(8);
  y10.at(1, 0) = 1.0;
  CHECK(std::abs(ops::integrate(sht::synthesize(y10, g), g)) < 1e-13);

  GridField z2 = ops::sample(g, [](double, double, double z) { return z * z; });
  CHECK(ops::integrate(z2, g) == doctest::Approx(kFourPi / 3.0).epsilon(1e-13));
}

TEST_CASE("gradient_sq closed forms and finite-difference cross check") {
  SphereGrid g = SphereGrid::make(12);
  GridField gz = ops::gradient_sq(SpectralField::constant(12, 2.0), g);
  CHECK(gz.max_abs() < 1e-10);

  // For any linear ell: integral |grad ell|^2 = 2 integral ell^2.
  SpectralField ell(12);
  ell.at(1, 0) = 0.7;
  ell.at(1, 1) = -0.3;
  ell.at(1, -1) = 0.45;
  GridField gs = ops::gradient_sq(ell, g);
  double lhs = ops::integrate(gs, g);
  GridField ev = sht::synthesize(ell, g);
  for (double& v : ev.v) v *= v;
  CHECK(lhs == doctest::Approx(2.0 * ops::integrate(ev, g)).epsilon(1e-12));

  SpectralField y10(12);
  y10.at(1, 0) = 1.0;
  CHECK(ops::integrate(ops::gradient_sq(y10, g), g) == doctest::Approx(2.0).epsilon(1e-12));

  // Central differences along colatitude at a few interior points, against a
  // field with no azimuthal dependence so d/dtheta captures the gradient.
  SpectralField zonal(12);
  zonal.at(2, 0) = 0.8;
  zonal.at(3, 0) = -0.35;
  GridField gsq = ops::gradient_sq(zonal, g);
  double h = 1e-5;
  for (int j = 3; j < g.nlat - 3; j += 5) {
    double th = g.theta[j];
    double up = sht::eval_point(zonal, th + h, 0.0);
    double dn = sht::eval_point(zonal, th - h, 0.0);
    double dfd = (up - dn) / (2 * h);
    CHECK(gsq.at(j, 0) == doctest::Approx(dfd * dfd).epsilon(1e-5));
  }
}

TEST_CASE("gradient_field components assemble gradient exactly") {
  SphereGrid g = SphereGrid::make(10);
  SpectralField f = random_field(8, 11).projected(8);
  auto grad = ops::gradient_field(f, g);
  // Tangency: sum_i x_i a_i = 0, and sum a_i^2 = |grad f|^2.
  GridField gsq = ops::gradient_sq(f, g);
  GridField ax = sht::synthesize(grad[0], g);
  GridField ay = sht::synthesize(grad[1], g);
  GridField az = sht::synthesize(grad[2], g);
  for (int j = 0; j < g.nlat; j += 3)
    for (int k = 0; k < g.nlon; k += 5) {
      double p[3];
      g.node(j, k, p);
      double tangency = p[0] * ax.at(j, k) + p[1] * ay.at(j, k) + p[2] * az.at(j, k);
      CHECK(std::abs(tangency) < 1e-10);
      double s2 = ax.at(j, k) * ax.at(j, k) + ay.at(j, k) * ay.at(j, k) + az.at(j, k) * az.at(j, k);
      CHECK(s2 == doctest::Approx(gsq.at(j, k)).epsilon(1e-9));
    }
}

TEST_CASE("Parseval and self-adjointness of the laplacian") {
  for (int lmax : {8, 16, 32}) {
    SphereGrid g = SphereGrid::make(lmax);
    SpectralField f = random_field(lmax, 100 + lmax);
    SpectralField h = random_field(lmax, 200 + lmax);

    GridField fv = sht::synthesize(f, g);
    for (double& v : fv.v) v *= v;
    double quad = ops::integrate(fv, g);
    double coeff = 0.0;
    for (double v : f.c) coeff += v * v;
    CHECK(std::abs(quad - coeff) < 1e-10 * std::max(1.0, coeff));

    double a = ops::inner(f, ops::laplacian(h));
    double b = ops::inner(h, ops::laplacian(f));
    CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(a)));

    // integral of Lap f vanishes exactly in coefficients.
    CHECK(ops::laplacian(f).at(0, 0) == 0.0);
  }
}

TEST_CASE("rotation acts exactly on band-limited fields") {
  SphereGrid g = SphereGrid::make(10);
  SpectralField f = random_field(10, 17);
  double ang = 0.83;
  double R[9] = {std::cos(ang), -std::sin(ang), 0, std::sin(ang), std::cos(ang), 0, 0, 0, 1};
  SpectralField fr = ops::rotate(f, R, g);
  // Spot check: (f.R)(p) = f(Rp).
  for (int j = 2; j < g.nlat; j += 7)
    for (int k = 0; k < g.nlon; k += 9) {
      double p[3];
      g.node(j, k, p);
      double q[3] = {R[0] * p[0] + R[1] * p[1] + R[2] * p[2], R[3] * p[0] + R[4] * p[1] + R[5] * p[2],
                     R[6] * p[0] + R[7] * p[1] + R[8] * p[2]};
      CHECK(sht::eval_dir(fr, p) == doctest::Approx(sht::eval_dir(f, q)).epsilon(1e-10));
    }
  // Rotation preserves the L2 norm.
  CHECK(fr.norm_l2() == doctest::Approx(f.norm_l2()).epsilon(1e-12));
}

TEST_CASE("projection tail guard sees unresolved content") {
  SphereGrid g = SphereGrid::make(8);
  SpectralField smooth = random_field(8, 5);
  auto pr = ops::project_with_tail(sht::synthesize(smooth, g), g, 8);
  CHECK(pr.tail_fraction < 1e-28);

  SpectralField spiky(g.capacity());
  spiky.at(g.capacity(), 0) = 1.0;
  auto ps = ops::project_with_tail(sht::synthesize(spiky, g), g, 8);
  CHECK(ps.tail_fraction > 0.99);
}
