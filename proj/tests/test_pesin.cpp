#include <cmath>

#include "doctest.h"
#include "fatou/ergodic.h"
#include "fatou/pesin.h"
#include "support.h"

using namespace fatou;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

// Points of the Julia curve of z^2 - 0.1 seen from the attracting fixed point, one per
// direction 2 pi k / count.
std::vector<cplx> julia_ring(const Map& f, int count) {
  const cplx center = 0.5 - std::sqrt(0.25 + 0.1);
  const std::vector<cplx> cloud = boundary_cloud(f, 20000, 77);
  std::vector<cplx> out;
  for (int k = 0; k < count; ++k) {
    const double a = kTwoPi * k / count;
    cplx best = cloud[0];
    double gap = 1e300;
    for (const cplx& z : cloud) {
      const double d = std::abs(std::remainder(std::arg(z - center) - a, kTwoPi));
      if (d < gap) {
        gap = d;
        best = z;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

TEST_CASE("backward sampler in the plane") {
  const Map sq = Map::power(2);
  const BackwardOrbit o = sample_backward_orbit(sq, 1.0, 3, OrbitMode::PlaneEqualWeight, 4);
  REQUIRE(o.depth() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(o.points[k + 1] * o.points[k + 1] == o.points[k]);
    CHECK(o.log_weights[k] == doctest::Approx(-std::log(2.0)));
    CHECK(o.step_derivs[k] == 2.0 * o.points[k + 1]);
  }
  CHECK(sample_backward_orbit(sq, 1.0, 0, OrbitMode::PlaneEqualWeight, 4).points.size() == 1);

  const Map f = Map::quadratic(0.5);
  const cplx x0 = boundary_cloud(f, 1, 3)[0];
  const BackwardOrbit deep = sample_backward_orbit(f, x0, 40, OrbitMode::PlaneEqualWeight, 11);
  CHECK(chain_residual(f, deep) < 1e-10);

  const BackwardOrbit circ = sample_backward_orbit(sq, std::polar(1.0, 0.2), 10, OrbitMode::CircleTransfer, 2);
  CHECK(circ.mode == OrbitMode::CircleTransfer);
  CHECK(chain_residual(sq, circ) < 1e-14);
  CHECK(code_of([&] { sample_backward_orbit(Map::exp_family(1.0), 1.0, 3, OrbitMode::PlaneEqualWeight, 1); }) ==
        Errc::InvalidArgument);
}

TEST_CASE("eta defaults to half the distance to the critical orbits") {
  CHECK(default_eta(Map::power(2), cplx(0.0, 3.0)) == doctest::Approx(1.5));
  const Map f = Map::quadratic(-0.1);
  // The critical orbit 0, -0.1, -0.09, ... comes closest to 1 at its second image.
  CHECK(default_eta(f, 1.0) == doctest::Approx(0.5 * 1.09).epsilon(1e-12));
}

TEST_CASE("tower for z^2 follows the closed-form derivative chain") {
  const Map sq = Map::power(2);
  const BackwardOrbit o = sample_backward_orbit(sq, 1.0, 20, OrbitMode::PlaneEqualWeight, 8);
  const BranchTower t = build_branch_tower(sq, o);
  REQUIRE(t.depth() == 20);
  CHECK(t.n2 == 1);
  CHECK(std::abs(t.chi_hat - std::log(2.0)) < 1e-14);
  for (int n = 0; n < 20; ++n) CHECK(t.b[n] == doctest::Approx(0.5 * std::pow(2.0, -(n + 1) / 4.0)).epsilon(1e-12));
  for (int n = 0; n <= 20; ++n) CHECK(t.deriv_at_base[n] == doctest::Approx(std::pow(2.0, -n)).epsilon(1e-12));
  CHECK(32.0 * t.base.radius * t.P < t.eta);
  CHECK(t.P >= 1.0);
  for (int n = 1; n <= 20; ++n) {
    CHECK(t.level_radii[n] <= t.level_radii[n - 1]);
    CHECK(t.level_radii[n] >= t.base.radius);
  }
  // F_n is a branch of z^(1/2^n): the image of D(x0, rho) has diameter close to 2 rho 2^-n.
  for (int n = t.first_certified; n <= 20; ++n) {
    const double linear = 2.0 * t.level_radii[n] * std::pow(2.0, -n);
    CHECK(t.diam_certs[n] == doctest::Approx(linear).epsilon(0.05));
    CHECK(t.identity_residuals[n] < 1e-8);
    CHECK(t.composition_residuals[n] < 1e-9);
  }
  CHECK(t.certificates_hold());
  CHECK(t.koebe_sound());

  const ContractionReport c = verify_contraction(t, std::log(2.0));
  CHECK(c.slope == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(c.slope_ok);
}

TEST_CASE("tower for z^2 - 0.1 at depth 40") {
  const Map f = Map::quadratic(-0.1);
  const cplx x0 = boundary_cloud(f, 1, 21)[0];
  const BackwardOrbit o = sample_backward_orbit(f, x0, 40, OrbitMode::PlaneEqualWeight, 22);
  const BranchTower t = build_branch_tower(f, o);
  CHECK(t.certificates_hold());
  CHECK(t.koebe_sound());
  double worst = 0.0, comp = 0.0;
  for (int n = t.first_certified; n <= t.depth(); ++n) {
    worst = std::max(worst, t.identity_residuals[n]);
    comp = std::max(comp, t.composition_residuals[n]);
  }
  CHECK(worst < 1e-8);
  CHECK(comp < 1e-9);
  CHECK(t.M > t.M_lower);
  CHECK(t.M < 1.0);
}

TEST_CASE("tower error paths") {
  // Chebyshev z^2 - 2: the chain 2 <- -2 <- 0 passes through the critical point.
  const Map cheb = Map::quadratic(-2.0);
  BackwardOrbit o;
  o.points = {2.0, -2.0, cplx(0.0, 1e-9)};
  for (int k = 0; k < 60; ++k) {
    const auto roots = cheb.preimages_all(o.points.back()).roots;
    o.points.push_back(roots[k % 2]);
  }
  for (int k = 0; k + 1 < static_cast<int>(o.points.size()); ++k) o.step_derivs.push_back(cheb.derivative(o.points[k + 1]));
  TowerOptions opts;
  opts.M = 0.99;
  opts.eta = 0.5;
  try {
    build_branch_tower(cheb, o, opts);
    FAIL("expected BranchObstructed");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BranchObstructed);
    CHECK(e.index() == 2);
  }

  BackwardOrbit flat;
  flat.points = {1.0, 1.0, 1.0, 1.0};
  flat.step_derivs = {0.5, 0.5, 0.5};
  CHECK(code_of([&] { build_branch_tower(Map::power(2), flat); }) == Errc::ScheduleNeverStarts);

  BranchTower shallow;
  shallow.deriv_at_base.assign(6, 1.0);
  shallow.first_certified = 1;
  CHECK(code_of([&] { verify_contraction(shallow, 1.0); }) == Errc::InsufficientDepth);
}

TEST_CASE("contraction fit on a synthetic tower") {
  BranchTower t;
  for (int n = 0; n <= 30; ++n) t.deriv_at_base.push_back(std::exp(-static_cast<double>(n)));
  t.first_certified = 2;
  const ContractionReport c = verify_contraction(t, 1.0);
  CHECK(c.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(c.relative_error < 1e-12);
  CHECK(c.C == doctest::Approx(1.0));
}

TEST_CASE("periodic points of z^2") {
  PeriodicSearchBudget budget;
  const PeriodicPointRecord one = find_periodic_point(Map::power(2), Disk(1.0, 0.2), budget, 3);
  CHECK(one.period == 1);
  CHECK(std::abs(one.point - 1.0) < 1e-12);
  CHECK(one.multiplier_modulus == doctest::Approx(2.0).epsilon(1e-12));

  const cplx w = std::polar(1.0, kTwoPi / 3.0);
  const PeriodicPointRecord two = find_periodic_point(Map::power(2), Disk(w, 0.2), budget, 4);
  CHECK(two.period == 2);
  CHECK(std::abs(two.point - w) < 1e-12);
  CHECK(two.multiplier_modulus == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(two.residual < 1e-9);
}

TEST_CASE("periodic records verify by direct iteration") {
  const Map f = Map::quadratic(-0.1);
  const std::vector<cplx> ring = julia_ring(f, 6);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const PeriodicPointRecord rec = find_periodic_point(f, Disk(ring[i], 0.2), {}, 50 + i);
    cplx z = rec.point;
    cplx d = 1.0;
    for (int j = 0; j < rec.period; ++j) {
      d *= 2.0 * z;
      z = z * z - 0.1;
    }
    CHECK(std::abs(z - rec.point) < 1e-9);
    CHECK(std::abs(d) > 1.0);
    // Multiplier against a central finite difference of f^m.
    const double h = 1e-6;
    auto fm = [&](cplx u) {
      for (int j = 0; j < rec.period; ++j) u = u * u - 0.1;
      return u;
    };
    const cplx fd = (fm(rec.point + h) - fm(rec.point - h)) / (2.0 * h);
    CHECK(std::abs(std::abs(fd) - rec.multiplier_modulus) < 1e-5 * rec.multiplier_modulus);
    CHECK(std::abs(rec.point - ring[i]) < 0.2 + rec.radius);
  }
}

TEST_CASE("density scan") {
  const Map f = Map::quadratic(-0.1);
  const auto huge = density_scan(f, {Disk(0.0, 10.0)}, {}, 1);
  REQUIRE(huge.size() == 1);
  CHECK(huge[0].found);
  const auto none = density_scan(f, {Disk(cplx(5.0, 5.0), 0.5)}, {}, 1);
  CHECK_FALSE(none[0].found);
  CHECK(none[0].note.find("HypothesisViolated") != std::string::npos);
}

TEST_CASE("first-return towers") {
  const Map sq = Map::power(2);
  const ReturnPartition part = circle_partition(sq, 8);
  REQUIRE(part.cells.size() == 8);
  REQUIRE(part.excluded_points.size() == 1);
  CHECK(std::abs(part.excluded_points[0]) < 1e-12);

  const cplx x0 = std::polar(1.0, 0.3);
  const BackwardOrbit ro = sample_return_orbit(sq, part.cells[0], x0, 20, 5);
  REQUIRE(ro.depth() == 20);
  for (int k = 0; k < 20; ++k) {
    cplx z = ro.points[k + 1];
    for (int j = 0; j < ro.return_times[k]; ++j) z = z * z;
    // Forward squaring amplifies rounding by the derivative 2^T.
    CHECK(std::abs(z - ro.points[k]) < 1e-14 * std::pow(2.0, ro.return_times[k]));
    CHECK(std::abs(std::abs(ro.step_derivs[k]) - std::pow(2.0, ro.return_times[k])) < 1e-9 * std::pow(2.0, ro.return_times[k]));
  }
  // Every return step expands by at least 2, so M above 2^(-1/4) always starts the schedule.
  const BranchTower t = build_return_branch_tower(sq, part, 0, ro, 0.4, 0.9);
  CHECK(t.certificates_hold());
  CHECK(t.koebe_sound());
  int checked = 0;
  for (int n = t.first_certified; n <= t.depth(); ++n) {
    if (t.deriv_at_base[n] >= 1e-24) {
      CHECK(t.identity_residuals[n] >= 0.0);
      CHECK(t.identity_residuals[n] < 1e-8);
      ++checked;
    } else {
      CHECK(t.identity_residuals[n] == -1.0);
    }
  }
  CHECK(checked >= 2);

  // The whole circle as the cell: T = 1 and the tower equals the plain one.
  const ReturnPartition whole = circle_partition(sq, 1);
  const BackwardOrbit plain = sample_backward_orbit(sq, x0, 15, OrbitMode::PlaneEqualWeight, 6);
  TowerOptions opts;
  opts.eta = 0.4;
  const BranchTower a = build_return_branch_tower(sq, whole, 0, plain, 0.4);
  const BranchTower b = build_branch_tower(sq, plain, opts);
  CHECK(a.diam_certs == b.diam_certs);
  CHECK(a.level_radii == b.level_radii);

  BackwardOrbit blow = ro;
  blow.return_times.assign(20, 1);
  blow.return_times[4] = blow.return_times[5] = blow.return_times[6] = 40;
  CHECK(code_of([&] { build_return_branch_tower(sq, part, 0, blow, 0.4); }) == Errc::ReturnTimeBlowup);
}

TEST_CASE("annular partitions avoid exceptional points") {
  const Map f = Map::quadratic(-0.1);
  const cplx p = 0.5 + std::sqrt(0.35);
  const ReturnPartition part = annular_partition(f, p, 0.3, 3, 4);
  CHECK(part.cells.size() == 12);
  for (std::size_t i = 0; i < part.cells.size(); ++i) {
    for (std::size_t j = i + 1; j < part.cells.size(); ++j) {
      // Disjointness on a probe grid.
      for (int s = 0; s < 200; ++s) {
        const cplx z = p + std::polar(0.3 * s / 200.0, 0.37 * s);
        CHECK_FALSE((part.cells[i].contains(z) && part.cells[j].contains(z)));
      }
    }
  }
  // Centered on the exceptional point 0 of z^2: the innermost ring touches the exclusion disk.
  const ReturnPartition sq = annular_partition(Map::power(2), 0.0, 1.0, 2, 2);
  CHECK(sq.cells.size() == 2);
  for (const ReturnSet& c : sq.cells) CHECK(c.inner > 1e-3);
}

TEST_CASE("towers are deterministic") {
  const Map f = Map::quadratic(-0.1);
  const cplx x0 = boundary_cloud(f, 1, 2)[0];
  const BackwardOrbit o1 = sample_backward_orbit(f, x0, 20, OrbitMode::PlaneEqualWeight, 9);
  const BackwardOrbit o2 = sample_backward_orbit(f, x0, 20, OrbitMode::PlaneEqualWeight, 9);
  CHECK(o1.points == o2.points);
  CHECK(build_branch_tower(f, o1).diam_certs == build_branch_tower(f, o2).diam_certs);
}
