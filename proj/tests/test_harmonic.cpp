#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "fatou/harmonic.h"
#include "fatou/rng.h"

using namespace fatou;

namespace {

// Independent oracle: arc endpoints by bisection, then the Poisson kernel integrated numerically.
double poisson_oracle(cplx base, const Disk& target) {
  const double psi = std::arg(target.center);
  auto inside = [&](double t) { return std::abs(std::polar(1.0, psi + t) - target.center) < target.radius; };
  if (!inside(0.0)) return 0.0;
  if (inside(kPi)) return 1.0;
  double lo = 0.0, hi = kPi;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  const double rho2 = std::norm(base);
  auto kernel = [&](double t) {
    return (1.0 - rho2) / std::norm(std::polar(1.0, t) - base) / kTwoPi;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(kernel, psi - lo, psi + lo, 15, 1e-14);
}

double joint_sigma(const HarmonicEstimate& a, const HarmonicEstimate& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

}  // namespace

TEST_CASE("unit disk closed form") {
  const DomainSpec disk = DomainSpec::unit_disk();
  const HarmonicEstimate e = estimate_disk_measure(disk, Disk(1.0, 0.1), 0, 1);
  CHECK(e.backend == Backend::Riemann);
  CHECK(e.std_error == 0.0);
  CHECK(std::abs(e.value - 2.0 / kPi * std::asin(0.05)) < 1e-15);
  CHECK(std::abs(e.value - 0.031844266473320690) < 1e-15);
  CHECK(estimate_disk_measure(disk, Disk(1.0, 2.0), 0, 1).value == 1.0);
  CHECK(estimate_disk_measure(disk, Disk(3.0, 0.5), 0, 1).value == 0.0);
  for (double r : {1e-1, 1e-3, 1e-6, 1.9}) {
    CHECK(std::abs(riemann_measure(disk, Disk(1.0, r)) - 2.0 / kPi * std::asin(r / 2.0)) < 1e-12);
  }
}

TEST_CASE("unit disk closed form matches the Poisson oracle") {
  Stream rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const cplx base = std::polar(rng.uniform(0.0, 0.95), rng.uniform(0.0, kTwoPi));
    const Disk target(std::polar(rng.uniform(0.2, 2.0), rng.uniform(0.0, kTwoPi)), rng.uniform(0.01, 1.5));
    const double exact = riemann_measure(DomainSpec::unit_disk(base), target);
    CHECK(std::abs(exact - poisson_oracle(base, target)) < 1e-10);
  }
}

TEST_CASE("arc partitions sum to one") {
  Stream rng(5, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const cplx base = std::polar(rng.uniform(0.0, 0.99), rng.uniform(0.0, kTwoPi));
    std::vector<double> cuts{rng.uniform(0.0, kTwoPi)};
    const int pieces = 2 + static_cast<int>(rng.below(10));
    std::vector<double> w;
    for (int k = 0; k < pieces; ++k) w.push_back(rng.uniform(0.01, 1.0));
    double total_w = 0.0;
    for (double x : w) total_w += x;
    CompensatedSum sum;
    double t = cuts[0];
    for (double x : w) {
      const double t1 = t + kTwoPi * x / total_w;
      sum.add(disk_arc_measure(base, t, t1));
      t = t1;
    }
    CHECK(std::abs(sum.value() - 1.0) < 1e-12);
  }
}

TEST_CASE("walk on spheres agrees with the closed form on the unit disk") {
  const DomainSpec disk = DomainSpec::unit_disk(cplx(0.3, -0.2));
  const Disk target(std::polar(1.0, 0.7), 0.4);
  const HarmonicEstimate w = estimate_disk_measure(disk, target, 20000, 3, Backend::Wos);
  CHECK(w.backend == Backend::Wos);
  CHECK(w.std_error > 0.0);
  CHECK(w.censored == 0);
  CHECK(std::abs(w.value - riemann_measure(disk, target)) < 4.0 * w.std_error);

  // Four quarter arcs from independent runs.
  const DomainSpec centered = DomainSpec::unit_disk();
  double total = 0.0, var = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Disk quarter(std::polar(1.0, kPi / 2.0 * k), 2.0 * std::sin(kPi / 8.0));
    CHECK(std::abs(riemann_measure(centered, quarter) - 0.25) < 1e-14);
    const HarmonicEstimate q = estimate_disk_measure(centered, quarter, 5000, 100 + k, Backend::Wos);
    total += q.value;
    var += q.std_error * q.std_error;
  }
  CHECK(std::abs(total - 1.0) <= 4.0 * std::sqrt(var));
}

TEST_CASE("slit plane and sector closed forms") {
  const DomainSpec slit = DomainSpec::slit_plane();
  std::vector<double> radii, values;
  for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double v = riemann_measure(slit, Disk(0.0, r));
    CHECK(std::abs(v - 2.0 / kPi * std::atan(std::sqrt(r))) < 1e-15);
    radii.push_back(r);
    values.push_back(v);
  }
  CHECK(std::abs(fit_decay_exponent(radii, values).slope - 0.5) < 0.02);

  for (double alpha : {0.25, 0.4, 0.7}) {
    const DomainSpec sec = DomainSpec::sector(alpha);
    const double beta = 1.0 / (2.0 * alpha);
    for (double r : {0.5, 1e-2, 1e-4}) {
      CHECK(std::abs(riemann_measure(sec, Disk(0.0, r)) - 2.0 / kPi * std::atan(std::pow(r, beta))) < 1e-15);
    }
  }
  // Off-vertex target against the sampler.
  const DomainSpec sec = DomainSpec::sector(0.3, cplx(1.0, 0.2));
  const Disk target(std::polar(0.8, 0.3 * kPi), 0.3);
  const HarmonicEstimate w = estimate_disk_measure(sec, target, 20000, 7, Backend::Wos);
  CHECK(std::abs(w.value - riemann_measure(sec, target)) < 4.0 * w.std_error);
  const HarmonicEstimate ws = estimate_disk_measure(slit, Disk(cplx(-0.5, 0.0), 0.3), 20000, 8, Backend::Wos);
  CHECK(std::abs(ws.value - riemann_measure(slit, Disk(cplx(-0.5, 0.0), 0.3))) < 4.0 * ws.std_error);
}

TEST_CASE("splitting reaches small sector targets") {
  const DomainSpec sec = DomainSpec::sector(0.25);
  WosOptions opts;
  opts.splitting = true;
  const Disk target(0.0, 1e-2);
  const HarmonicEstimate e = estimate_disk_measure(sec, target, 20000, 21, Backend::Wos, opts);
  const double exact = riemann_measure(sec, target);
  CHECK(e.value > 0.0);
  CHECK(e.std_error < 0.2 * e.value);
  CHECK(std::abs(e.value - exact) < 4.0 * e.std_error);
}

TEST_CASE("decay exponent fit") {
  std::vector<double> r{1.0, 0.5, 0.25, 0.1, 0.01}, v;
  for (double x : r) v.push_back(x * x);
  const SlopeFit fit = fit_decay_exponent(r, v);
  CHECK(std::abs(fit.slope - 2.0) < 1e-12);
  CHECK(fit.std_error < 1e-12);
  CHECK_THROWS_AS(fit_decay_exponent({1.0, 0.5, 0.25}, {1.0, 0.5, 0.25}), Error);
  try {
    fit_decay_exponent({1.0, 0.5, 0.25, 0.1}, {1.0, 0.0, 0.2, 0.1});
    FAIL("expected NonPositiveValue");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonPositiveValue);
  }
  CHECK_THROWS_AS(fit_decay_exponent({1.0, 0.5, 0.5, 0.1}, {1.0, 0.5, 0.2, 0.1}), Error);
}

TEST_CASE("backend availability and preconditions") {
  const DomainSpec star = random_star_domain(1);
  try {
    estimate_disk_measure(star, Disk(1.0, 0.1), 5000, 1, Backend::Riemann);
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BackendUnavailable);
  }
  CHECK_THROWS_AS(estimate_disk_measure(star, Disk(1.0, 0.1), 100, 1, Backend::Wos), Error);
  CHECK_THROWS_AS(DomainSpec::unit_disk(1.0), Error);
  CHECK_THROWS_AS(DomainSpec::slit_plane(-1.0), Error);
  CHECK_THROWS_AS(DomainSpec::sector(0.25, cplx(0.0, 1.0)), Error);
  CHECK_THROWS_AS(DomainSpec::jordan({0.0, 1.0, cplx(0.0, 1.0)}, 5.0), Error);
}

TEST_CASE("basin of infinity via the Bottcher pullback") {
  const DomainSpec basin = DomainSpec::poly_basin(Map::power(2));
  const Disk target(1.0, 0.1);
  const HarmonicEstimate e = estimate_disk_measure(basin, target, 20000, 9);
  CHECK(e.backend == Backend::Bottcher);
  CHECK(std::abs(e.value - 2.0 / kPi * std::asin(0.05)) < 4.0 * e.std_error);

  // Samples sit on the Julia set of z^2 - 0.1 and are balanced under z -> -z.
  const DomainSpec quad = DomainSpec::poly_basin(Map::quadratic(-0.1));
  const ExitSample s = sample_exit_points(quad, 4000, 2);
  for (const cplx& p : s.points) {
    cplx z = p;
    for (int k = 0; k < 10; ++k) z = z * z - 0.1;
    CHECK(std::abs(z) < 2.0);
  }
  const HarmonicEstimate right = measure_from_sample(s, Disk(cplx(1e6, 0.0), 1e6));
  CHECK(std::abs(right.value - 0.5) < 4.0 * right.std_error);
  CHECK_THROWS_AS(estimate_disk_measure(quad, target, 5000, 1, Backend::Wos), Error);
}

TEST_CASE("Beurling bound after normalization") {
  const DomainSpec disk = DomainSpec::unit_disk();
  const Normalization norm = beurling_normalization(disk);
  CHECK(std::abs(norm.diameter_before - 2.0) < 1e-9);
  std::vector<Disk> shrinking;
  for (double r = 0.5; r > 1e-6; r *= 0.3) shrinking.emplace_back(std::polar(1.0, 0.4), r);
  const BeurlingReport rep = beurling_bound_check(disk, shrinking, 0, 1);
  CHECK(rep.pass);
  CHECK(rep.worst_margin > 0.0);
  for (const BeurlingRow& row : rep.rows) CHECK(row.estimate.std_error == 0.0);

  // A target whose normalized radius is 2 gives the vacuous bound 2.
  const Disk big = norm.map.inverse().image(Disk(3.0, 2.0));
  const BeurlingReport vac = beurling_bound_check(disk, {Disk(big.center, big.radius)}, 0, 1);
  CHECK(std::abs(vac.rows[0].r_normalized - 2.0) < 1e-9);
  CHECK(std::abs(vac.rows[0].bound - 2.0) < 1e-9);

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const DomainSpec star = random_star_domain(seed);
    std::vector<Disk> targets;
    for (double r : {0.1, 0.01}) {
      for (int k = 0; k < 4; ++k) targets.emplace_back(star.nearest_boundary_point(std::polar(3.0, 1.57 * k)), r);
    }
    const BeurlingReport sr = beurling_bound_check(star, targets, 4000, seed);
    CHECK(sr.violations == 0);
  }

  const BeurlingReport slit = beurling_bound_check(DomainSpec::slit_plane(), {Disk(0.0, 0.01)}, 0, 1);
  CHECK(slit.pass);
}

TEST_CASE("comparison and monotonicity") {
  // V = unit disk cut by Re z > -0.3 shares the arc near 1 with U = unit disk.
  std::vector<cplx> cut;
  const double t0 = std::acos(-0.3);
  for (int j = 0; j <= 128; ++j) cut.push_back(std::polar(1.0, -t0 + 2.0 * t0 * j / 128));
  const DomainSpec V = DomainSpec::jordan(cut, 0.0);
  const DomainSpec U = DomainSpec::unit_disk();
  const Disk target(1.0, 0.5);
  const HarmonicEstimate v = estimate_disk_measure(V, target, 10000, 4, Backend::Wos);
  const HarmonicEstimate u = estimate_disk_measure(U, target, 10000, 5, Backend::Wos);
  CHECK(v.value <= u.value + 3.0 * joint_sigma(u, v));
  CHECK(v.value <= riemann_measure(U, target));

  const DomainSpec star = random_star_domain(17);
  const cplx x = star.nearest_boundary_point(2.0);
  const HarmonicEstimate small = estimate_disk_measure(star, Disk(x, 0.2), 10000, 6);
  const HarmonicEstimate large = estimate_disk_measure(star, Disk(x, 0.4), 10000, 7);
  CHECK(small.value <= large.value + 3.0 * joint_sigma(small, large));
}

TEST_CASE("shrinking target series") {
  const DomainSpec disk = DomainSpec::unit_disk();
  const SeriesReport s = shrinking_target_series(disk, 1.0, 1.0, 0.5, 30, 0, 1);
  REQUIRE(s.terms.size() == 31);
  for (std::size_t k = 0; k < s.terms.size(); ++k) {
    CHECK(std::abs(s.terms[k].value - 2.0 / kPi * std::asin(std::pow(0.5, k) / 2.0)) < 1e-12);
  }
  // Geometric tail: S_N - S_{N/2} is at most twice the first omitted term.
  CHECK(s.tail <= 2.0 * s.terms[16].value);

  const SeriesReport far = shrinking_target_series(disk, 5.0, 1.0, 0.5, 10, 0, 1);
  CHECK(far.partial_sums.back() == 0.0);

  const SeriesReport tip = shrinking_target_series(DomainSpec::slit_plane(), 0.0, 1.0, 0.9, 120, 0, 1);
  std::vector<double> r(tip.radii.begin() + 60, tip.radii.end()), v;
  for (std::size_t k = 60; k < tip.terms.size(); ++k) v.push_back(tip.terms[k].value);
  CHECK(std::abs(fit_decay_exponent(r, v).slope - 0.5) < 1e-3);
  CHECK(tip.tail < tip.partial_sums.back());
  CHECK_THROWS_AS(shrinking_target_series(disk, 1.0, 1.0, 1.5, 5, 0, 1), Error);
}

TEST_CASE("samplers are deterministic in the seed") {
  const DomainSpec star = random_star_domain(3);
  const ExitSample a = sample_exit_points(star, 2000, 42);
  const ExitSample b = sample_exit_points(star, 2000, 42);
  CHECK(a.points == b.points);
  const ExitSample c = sample_exit_points(star, 2000, 43);
  CHECK(a.points != c.points);
}
