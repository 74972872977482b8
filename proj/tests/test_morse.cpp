#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nirenberg/exact_solutions.hpp"
#include "nirenberg/morse.hpp"

using namespace nirenberg;
using morse::CritType;

namespace {

SpectralField one_plus_tilt(int lmax, double amp) {
  SpectralField K = SpectralField::constant(lmax, 1.0);
  K.at(1, 0) += amp * std::sqrt(kFourPi / 3.0);
  return K;
}

// Random positive Morse candidates: 1 + amplitude * band-limited noise.
SpectralField random_positive(int lmax, unsigned seed, double amp, int lcut, const SphereGrid& g) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField f(lmax);
  for (int l = 1; l <= lcut; ++l)
    for (int m = -l; m <= l; ++m) f.at(l, m) = gauss(rng) / (1.0 + l);
  double sup = ops::norm_inf(f, g);
  f *= amp / sup;
  f.at(0, 0) += kSqrtFourPi;
  return f;
}

}  // namespace

TEST_CASE("two-point field: axis extrema with the exact values") {
  SphereGrid g = SphereGrid::make(8);
  SpectralField K = one_plus_tilt(8, 0.1);
  auto pts = morse::find_critical_points(K, g);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].type == CritType::maximum);
  CHECK(pts[0].value == doctest::Approx(1.1).epsilon(1e-12));
  CHECK((pts[0].location - morse::Vec3(0, 0, 1)).norm() < 1e-8);
  CHECK(pts[1].type == CritType::minimum);
  CHECK(pts[1].value == doctest::Approx(0.9).epsilon(1e-12));
  CHECK((pts[1].location - morse::Vec3(0, 0, -1)).norm() < 1e-8);
  // Lap(0.1 z) = -0.2 z.
  CHECK(pts[0].lap == doctest::Approx(-0.2).epsilon(1e-10));
  CHECK(pts[1].lap == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("constant input is rejected") {
  SphereGrid g = SphereGrid::make(8);
  CHECK_THROWS_AS(morse::find_critical_points(SpectralField::constant(8, 1.0), g), Error);
}

TEST_CASE("eigenfunction curvature: six critical points in three pairs") {
  SphereGrid g = SphereGrid::make(16);
  exact::EigenPair pair = exact::eigenfunction_r46(16, g);
  auto pts = morse::find_critical_points(pair.K, g);
  REQUIRE(pts.size() == 6);

  int maxima = 0, minima = 0, saddles = 0;
  const double kmax = 2.5 * std::exp(-0.5);
  for (const auto& cp : pts) {
    if (cp.type == CritType::maximum) {
      ++maxima;
      CHECK(std::abs(cp.location.x()) == doctest::Approx(1.0).epsilon(1e-7));
      CHECK(cp.value == doctest::Approx(kmax).epsilon(1e-9));
    } else if (cp.type == CritType::minimum) {
      ++minima;
      CHECK(std::abs(cp.location.y()) == doctest::Approx(1.0).epsilon(1e-7));
    } else {
      ++saddles;
      CHECK(std::abs(cp.location.z()) == doctest::Approx(1.0).epsilon(1e-7));
      CHECK(std::abs(cp.lap) < 1e-7);
      CHECK(cp.value == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  CHECK(maxima == 2);
  CHECK(minima == 2);
  CHECK(saddles == 2);
}

TEST_CASE("region classification: interior, eigenfunction boundary, positivity") {
  SphereGrid g = SphereGrid::make(16);

  morse::MorseReport tilt = morse::classify_regions(one_plus_tilt(16, 0.1), g);
  CHECK(tilt.in_c);
  CHECK(tilt.in_n);
  CHECK(tilt.positivity);
  CHECK(tilt.is_morse);
  REQUIRE(tilt.degree.has_value());
  CHECK(morse::degree(tilt) == 0);

  exact::EigenPair pair = exact::eigenfunction_r46(16, g);
  morse::MorseReport eig = morse::classify_regions(pair.K, g);
  CHECK(eig.in_c);
  CHECK_FALSE(eig.in_n);
  CHECK(eig.boundary_n);
  CHECK(eig.positivity);
  CHECK_FALSE(eig.degree.has_value());
  CHECK_THROWS_AS(morse::degree(eig), Error);

  // K = z: two critical points, max value 1 > 0, no zero-value maxima.
  SpectralField kz(16);
  kz.at(1, 0) = std::sqrt(kFourPi / 3.0);
  morse::MorseReport mz = morse::classify_regions(kz, g);
  CHECK(mz.in_c);
  CHECK(mz.positivity);
}

TEST_CASE("boundary band of the zero-level region is detected") {
  SphereGrid g = SphereGrid::make(16);
  // Maximum value exactly 0: 0.1(z - 1) has its maximum 0 at the north pole.
  SpectralField K(16);
  K.at(1, 0) = 0.1 * std::sqrt(kFourPi / 3.0);
  K.at(0, 0) = -0.1 * kSqrtFourPi;
  morse::MorseReport rep = morse::classify_regions(K, g);
  CHECK_FALSE(rep.in_c);
  CHECK(rep.boundary_c);
}

TEST_CASE("random Morse fields: Euler count and matching degree formulas") {
  SphereGrid g = SphereGrid::make(12);
  int morse_samples = 0;
  for (unsigned seed = 0; seed < 40 && morse_samples < 20; ++seed) {
    SpectralField K = random_positive(12, 1000 + seed, 0.35, 4, g);
    morse::MorseReport rep = morse::classify_regions(K, g);
    if (!rep.is_morse || !rep.degree.has_value()) continue;
    ++morse_samples;
    CHECK(rep.n_max - rep.n_saddle + rep.n_min == 2);
    CHECK_NOTHROW(morse::degree(rep));  // cross-checks the two formulas
  }
  CHECK(morse_samples >= 20);
}

TEST_CASE("degree is invariant under rotation") {
  SphereGrid g = SphereGrid::make(12);
  SpectralField K = random_positive(12, 77, 0.3, 4, g);
  morse::MorseReport rep = morse::classify_regions(K, g);
  REQUIRE(rep.degree.has_value());

  double a = 0.93, b = 0.41;
  double Rz[9] = {std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1};
  double Rx[9] = {1, 0, 0, 0, std::cos(b), -std::sin(b), 0, std::sin(b), std::cos(b)};
  SpectralField Kr = ops::rotate(ops::rotate(K, Rz, g), Rx, g);
  morse::MorseReport repr = morse::classify_regions(Kr, g);
  REQUIRE(repr.degree.has_value());
  CHECK(*repr.degree == *rep.degree);
}

TEST_CASE("flipping one saddle's Laplacian sign moves the degree by one") {
  SphereGrid g = SphereGrid::make(24);
  SpectralField pp = exact::perturbed_saddle_family(+1, +1, 0.05, 24, g);
  SpectralField pm = exact::perturbed_saddle_family(+1, -1, 0.05, 24, g);
  morse::MorseReport rpp = morse::classify_regions(pp, g);
  morse::MorseReport rpm = morse::classify_regions(pm, g);
  REQUIRE(rpp.degree.has_value());
  REQUIRE(rpm.degree.has_value());
  CHECK(std::abs(*rpp.degree - *rpm.degree) == 1);
}

TEST_CASE("report serialization carries counts and flags") {
  SphereGrid g = SphereGrid::make(12);
  morse::MorseReport rep = morse::classify_regions(one_plus_tilt(12, 0.1), g);
  nlohmann::json j = morse::report_to_json(rep);
  CHECK(j["counts"]["max"] == 1);
  CHECK(j["counts"]["min"] == 1);
  CHECK(j["in_C"] == true);
  CHECK(j["degree"] == 0);
  CHECK(j["critical_points"].size() == 2);
}
