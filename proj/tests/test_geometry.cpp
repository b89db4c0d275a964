#include "doctest.h"
#include "fatou/geometry.h"
#include "support.h"

using namespace fatou;

TEST_CASE("puncture Mobius normalisation") {
  const Mobius m = Mobius::puncture(1.0, 0.0);
  CHECK(std::abs(m(1.0) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(m(2.0) - cplx(0.5)) < 1e-15);
  CHECK(m.derivative_modulus(2.0) == doctest::Approx(0.25).epsilon(1e-15));
  for (int k = 0; k < 16; ++k) CHECK(m.derivative_modulus(std::polar(1.0, 0.3 * k)) == doctest::Approx(1.0));
  const Mobius p = Mobius::puncture(0.3, cplx(1.0, -2.0));
  CHECK(std::abs(p(cplx(1.3, -2.0)) - cplx(0.3)) < 1e-15);
}

TEST_CASE("identity Mobius") {
  const Mobius id = Mobius::identity();
  CHECK(id(cplx(3.0, 4.0)) == cplx(3.0, 4.0));
  CHECK(id.derivative_modulus(cplx(-7.0, 0.5)) == 1.0);
  CHECK(id.apply(ExtendedPoint::infinity()).infinite);
}

TEST_CASE("infinity marker") {
  const Mobius m = Mobius::puncture(1.0, cplx(2.0, 0.0));
  CHECK(m.apply(ExtendedPoint(cplx(2.0, 0.0))).infinite);
  const ExtendedPoint at_inf = m.apply(ExtendedPoint::infinity());
  CHECK(at_inf.is_finite());
  CHECK(at_inf.z == cplx(0.0, 0.0));
  CHECK_THROWS_AS(m(cplx(2.0, 0.0)), Error);
  CHECK_THROWS_AS(m.derivative_modulus(cplx(2.0, 0.0)), Error);
}

TEST_CASE("degenerate transforms rejected at construction") {
  CHECK_THROWS_AS(Mobius(1.0, 2.0, 2.0, 4.0), Error);
  CHECK_THROWS_AS(Mobius(0.0, 0.0, 0.0, 0.0), Error);
  CHECK_NOTHROW(Mobius(1e-8, 0.0, 0.0, 1e-8));
}

TEST_CASE("Mobius round trip and composition modulus") {
  Stream rng(11, 0);
  for (int k = 0; k < 1000; ++k) {
    const Mobius m = testing::random_mobius(rng);
    const Mobius n = testing::random_mobius(rng);
    const cplx z(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    const ExtendedPoint back = m.inverse().apply(m.apply(ExtendedPoint(z)));
    REQUIRE(back.is_finite());
    CHECK(std::abs(back.z - z) < 1e-10 * (1.0 + std::abs(z)));
    const double lhs = (n * m).derivative_modulus(z);
    const double rhs = n.derivative_modulus(m(z)) * m.derivative_modulus(z);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * rhs);
  }
}

TEST_CASE("image of a disk under a Mobius map") {
  const Mobius m = Mobius::inversion(0.0);
  const Disk img = m.image(Disk(cplx(2.0, 0.0), 1.0));
  CHECK(std::abs(img.center - cplx(2.0 / 3.0, 0.0)) < 1e-14);
  CHECK(img.radius == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(m.image(Disk(cplx(0.5, 0.0), 1.0)), Error);
}

TEST_CASE("Koebe constants") {
  CHECK(koebe_quarter_radius(1.0, 1.0) == 0.25);
  CHECK(koebe_quarter_radius(2.0, 0.5) == 0.25);
  CHECK_THROWS_AS(koebe_quarter_radius(0.0, 1.0), Error);
  CHECK_THROWS_AS(koebe_quarter_radius(1.0, -1.0), Error);
  auto f0 = koebe_distortion_factors(0.0);
  CHECK(f0.lower == 1.0);
  CHECK(f0.upper == 1.0);
  auto fh = koebe_distortion_factors(0.5);
  CHECK(fh.lower == doctest::Approx(0.148148148148148).epsilon(1e-14));
  CHECK(fh.upper == doctest::Approx(12.0).epsilon(1e-14));
  auto ft = koebe_distortion_factors(1.0 / 3.0);
  CHECK(ft.lower == doctest::Approx(0.28125).epsilon(1e-14));
  CHECK(ft.upper == doctest::Approx(4.5).epsilon(1e-14));
  CHECK_THROWS_AS(koebe_distortion_factors(1.0), Error);
}

TEST_CASE("Koebe function contains the quarter disk") {
  const auto cat = testing::univalent_catalog();
  const auto& k = cat[2];
  std::vector<cplx> poly(10000);
  for (int j = 0; j < 10000; ++j) poly[j] = k.phi(std::polar(0.99, kTwoPi * j / 10000.0));
  CHECK(koebe_quarter_radius(1.0, 0.99) == doctest::Approx(0.2475));
  for (int j = 0; j < 360; ++j) CHECK(winding_number(poly, std::polar(0.2475 * 0.999, kTwoPi * j / 360.0)) == 1);
  CHECK(winding_number(poly, cplx(-0.26, 0.0)) == 0);
}

TEST_CASE("Koebe suite on the univalent catalog") {
  for (const auto& m : testing::univalent_catalog()) {
    const auto t = testing::koebe_suite(m, 2000, 3);
    CHECK(t.quarter_violations == 0);
    CHECK(t.distortion_violations == 0);
  }
}

TEST_CASE("winding number and distances") {
  const std::vector<cplx> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(winding_number(sq, {0.5, 0.5}) == 1);
  CHECK(winding_number(sq, {1.5, 0.5}) == 0);
  const std::vector<cplx> rev(sq.rbegin(), sq.rend());
  CHECK(winding_number(rev, {0.5, 0.5}) == -1);
  CHECK(segment_distance({0.5, 1.0}, {0, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(segment_distance({2.0, 0.0}, {0, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(chordal_distance(ExtendedPoint::infinity(), ExtendedPoint(0.0)) == 1.0);
  CHECK(disk_hyperbolic_distance(0.0, 0.5) == doctest::Approx(2.0 * std::atanh(0.5)));
}
