#include <algorithm>

#include "doctest.h"
#include "fatou/maps.h"
#include "fatou/rng.h"

using namespace fatou;

namespace {

std::vector<Map> family_samples() {
  return {
      Map::quadratic(cplx(-0.1, 0.0)),
      Map::polynomial({cplx(0.2, 0.1), cplx(1.0, -0.5), 0.0, cplx(0.5, 0.3)}),
      Map::blaschke({0.0, 0.5}),
      Map::blaschke({cplx(0.3, 0.2), cplx(-0.4, 0.1), cplx(0.0, -0.6)}, std::polar(1.0, 0.7)),
      Map::exp_family(0.3),
      Map::sine_family(cplx(1.0, 0.2)),
      Map::fatou_baker(),
  };
}

bool contains(const std::vector<cplx>& v, cplx z, double tol) {
  return std::any_of(v.begin(), v.end(), [&](cplx x) { return std::abs(x - z) < tol; });
}

}  // namespace

TEST_CASE("evaluate examples") {
  CHECK(Map::power(2)(2.0) == cplx(4.0));
  CHECK(Map::fatou_baker()(0.0) == cplx(1.0));
  CHECK(std::abs(Map::blaschke({0.0})(cplx(0.0, 1.0)) - cplx(0.0, 1.0)) < 1e-15);
  CHECK(evaluate(Map::exp_family(1.0), ExtendedPoint(cplx(1000.0, 0.0))).infinite);
  CHECK(evaluate(Map::power(2), ExtendedPoint::infinity()).infinite);
}

TEST_CASE("derivative examples") {
  CHECK(derivative(Map::fatou_baker(), 0.0) == cplx(0.0));
  CHECK(derivative(Map::quadratic(cplx(0.3, 0.1)), 3.0) == cplx(6.0));
  const Map g = Map::blaschke({0.0, 0.0});
  for (int k = 0; k < 8; ++k) CHECK(std::abs(g.derivative(std::polar(1.0, 0.7 * k))) == doctest::Approx(2.0));
}

TEST_CASE("derivative matches central finite differences") {
  for (const Map& f : family_samples()) {
    Stream rng(5, 0);
    for (int k = 0; k < 1000; ++k) {
      cplx z(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
      if (f.is_blaschke()) z *= 0.9;
      const double h = 1e-6;
      const cplx fd = (f(z + h) - f(z - h)) / (2.0 * h);
      const cplx d = f.derivative(z);
      CHECK(std::abs(fd - d) <= 1e-6 * std::max(std::abs(d), 1.0));
    }
  }
}

TEST_CASE("singular data") {
  const cplx c(0.3, -0.2);
  const Map fq = Map::quadratic(c);
  const auto& sq = singular_data(fq);
  REQUIRE(sq.critical_values.size() == 1);
  CHECK(std::abs(sq.critical_values[0] - c) < 1e-15);
  CHECK(sq.asymptotic_values.empty());

  const Map fs = Map::sine_family(1.0);
  const auto& ss = singular_data(fs);
  REQUIRE(ss.critical_values.size() == 2);
  CHECK(contains(ss.critical_values, 1.0, 1e-15));
  CHECK(contains(ss.critical_values, -1.0, 1e-15));

  const Map fe = Map::exp_family(0.3);
  const auto& se = singular_data(fe);
  REQUIRE(se.asymptotic_values.size() == 1);
  CHECK(se.asymptotic_values[0] == cplx(0.0));
  CHECK(se.critical_values.empty());
  REQUIRE(se.punctures.size() == 1);
  CHECK(se.punctures[0].infinite);

  const Map fb = Map::fatou_baker();
  const auto& sb = singular_data(fb);
  CHECK(sb.critical_values.size() == 9);
  for (int k = -4; k <= 4; ++k) CHECK(contains(sb.critical_values, cplx(1.0, kTwoPi * k), 1e-12));

  // Blaschke critical points come in pairs c, 1/conj(c); values verified through g.
  const Map g = Map::blaschke({0.0, 0.5});
  const auto& sg = singular_data(g);
  CHECK(sg.critical_points.size() == 2);
  for (const cplx& p : sg.critical_points) CHECK(std::abs(g.derivative(p)) < 1e-10);
}

TEST_CASE("preimages_all examples") {
  const Map sq = Map::power(2);
  auto p = preimages_all(sq, 4.0);
  CHECK(p.roots.size() == 2);
  CHECK(contains(p.roots, 2.0, 1e-14));
  CHECK(contains(p.roots, -2.0, 1e-14));
  CHECK_FALSE(p.ill_conditioned);

  auto zero = preimages_all(sq, 0.0);
  CHECK(zero.roots.size() == 2);
  CHECK(std::abs(zero.roots[0]) < 1e-15);
  CHECK(std::abs(zero.roots[1]) < 1e-15);
  CHECK(zero.ill_conditioned);

  // Quadratic-formula oracle: z^2 + c = w has roots +-sqrt(w - c).
  const cplx c = 0.25, w = 0.5;
  auto q = preimages_all(Map::quadratic(c), w);
  const cplx s = std::sqrt(w - c);
  CHECK(contains(q.roots, s, 1e-15));
  CHECK(contains(q.roots, -s, 1e-15));
  CHECK_THROWS_AS(preimages_all(Map::exp_family(1.0), 1.0), Error);
}

TEST_CASE("preimage completeness") {
  Stream rng(9, 0);
  for (const Map& f : family_samples()) {
    if (!f.finite_degree()) continue;
    for (int k = 0; k < 200; ++k) {
      const cplx w(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      const auto pre = f.preimages_all(w);
      CHECK(static_cast<int>(pre.roots.size()) == f.degree());
      for (const cplx& z : pre.roots) CHECK(std::abs(f(z) - w) < 1e-10 * (1.0 + std::abs(w)));
    }
  }
}

TEST_CASE("preimage_continue examples") {
  const Map sq = Map::power(2);
  CHECK(preimage_continue(sq, {4.0, 4.0}, 2.0) == cplx(2.0));

  std::vector<cplx> seg;
  for (int k = 0; k <= 60; ++k) seg.push_back(4.0 - 3.0 * k / 60.0);
  const cplx end = preimage_continue(sq, seg, 2.0);
  CHECK(std::abs(end - std::sqrt(cplx(1.0))) < 1e-12);

  std::vector<cplx> loop;
  for (int k = 0; k <= 64; ++k) loop.push_back(std::polar(1.0, kTwoPi * k / 64.0));
  loop.back() = 1.0;
  CHECK(std::abs(preimage_continue(sq, loop, 1.0) - cplx(-1.0)) < 1e-12);
}

TEST_CASE("preimage_continue errors") {
  const Map sq = Map::power(2);
  CHECK_THROWS_AS(preimage_continue(sq, {4.0, 0.5}, 2.0), Error);
  try {
    preimage_continue(sq, {4.0, 0.5}, 2.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StepTooLarge);
  }
  try {
    sq.continue_step(1e-9, 1e-18, 2e-18);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CriticalProximity);
  }
  CHECK_THROWS_AS(preimage_continue(sq, {4.0, 3.9}, 3.0), Error);
}

TEST_CASE("continuation agrees with its refinement") {
  Stream rng(4, 0);
  for (const Map& f : family_samples()) {
    for (int trial = 0; trial < 20; ++trial) {
      const cplx seed(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
      const cplx w0 = f(seed);
      std::vector<cplx> path{w0};
      for (int k = 1; k <= 8; ++k) {
        const double h = 0.2 * f.step_bound(path.back());
        path.push_back(path.back() + std::polar(std::min(h, 0.05), rng.uniform(0.0, kTwoPi)));
      }
      std::vector<cplx> fine{path[0]};
      for (std::size_t k = 1; k < path.size(); ++k) {
        fine.push_back(0.5 * (path[k - 1] + path[k]));
        fine.push_back(path[k]);
      }
      try {
        const cplx a = f.preimage_continue(path, seed);
        const cplx b = f.preimage_continue(fine, seed);
        CHECK(std::abs(a - b) < 1e-9 * (1.0 + std::abs(a)));
      } catch (const Error& e) {
        CHECK(e.code() == Errc::CriticalProximity);
      }
    }
  }
}

TEST_CASE("adaptive segment continuation") {
  const Map sq = Map::power(2);
  CHECK(std::abs(sq.continue_segment(2.0, 4.0, cplx(0.0, 4.0)) - std::sqrt(cplx(0.0, 4.0))) < 1e-12);
  const Map e = Map::exp_family(1.0);
  const cplx z = e.continue_segment(0.0, 1.0, cplx(-1.0, 0.1));
  CHECK(std::abs(e(z) - cplx(-1.0, 0.1)) < 1e-12);
}

TEST_CASE("boundary cloud lies on the Julia set") {
  const Map f = Map::power(2);
  for (const cplx& z : boundary_cloud(f, 200, 1)) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
  const Map q = Map::quadratic(-0.1);
  const auto cloud = boundary_cloud(q, 500, 2);
  CHECK(cloud.size() == 500);
  for (const cplx& z : cloud) {
    cplx x = z;
    int k = 0;
    while (k < 30 && std::abs(x) < 10.0) {
      x = q(x);
      ++k;
    }
    CHECK(k >= 10);
  }
}

TEST_CASE("map validation") {
  CHECK_THROWS_AS(Map::polynomial({1.0, 2.0}), Error);
  CHECK_THROWS_AS(Map::blaschke({1.0}), Error);
  CHECK_THROWS_AS(Map::blaschke({0.5}, 2.0), Error);
  CHECK(Map::blaschke({0.0, 0.5}).centered());
  CHECK(Map::power(3).preserves_unit_circle());
  CHECK_FALSE(Map::quadratic(0.1).preserves_unit_circle());
}
