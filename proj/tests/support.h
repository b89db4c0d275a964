#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fatou/geometry.h"
#include "fatou/maps.h"
#include "fatou/rng.h"

namespace fatou::testing {

struct UnivalentMap {
  std::string name;
  std::function<cplx(cplx)> phi;
  std::function<cplx(cplx)> dphi;
  cplx center;
  double radius;  // phi is univalent on D(center, radius)
};

inline std::vector<UnivalentMap> univalent_catalog() {
  return {
      {"identity", [](cplx z) { return z; }, [](cplx) { return cplx(1.0); }, 0.0, 1.0},
      {"z+z^2/2", [](cplx z) { return z + 0.5 * z * z; }, [](cplx z) { return 1.0 + z; }, 0.0, 0.9},
      {"koebe", [](cplx z) { return z / ((1.0 - z) * (1.0 - z)); },
       [](cplx z) { return (1.0 + z) / ((1.0 - z) * (1.0 - z) * (1.0 - z)); }, 0.0, 0.99},
  };
}

struct KoebeTally {
  long quarter_samples = 0;
  long quarter_violations = 0;
  long distortion_samples = 0;
  long distortion_violations = 0;
};

// Quarter inclusion and lambda = 1/2 distortion sandwich on random subdisks of
// the univalence disk; containment by winding number of the image polygon.
inline KoebeTally koebe_suite(const UnivalentMap& m, long samples, std::uint64_t seed) {
  KoebeTally t;
  constexpr int kDisks = 100;
  constexpr int kPolygon = 4096;
  const long per_disk = samples / kDisks;
  const DistortionFactors fac = koebe_distortion_factors(0.5);
  for (int k = 0; k < kDisks; ++k) {
    Stream rng(seed, static_cast<std::uint64_t>(k));
    cplx z0 = m.center;
    double r = m.radius;
    if (k > 0) {
      const double rho = 0.6 * m.radius * std::sqrt(rng.uniform());
      z0 = m.center + std::polar(rho, kTwoPi * rng.uniform());
      r = (m.radius - rho) * rng.uniform(0.2, 1.0);
    }
    std::vector<cplx> poly(kPolygon);
    for (int j = 0; j < kPolygon; ++j) poly[j] = m.phi(z0 + std::polar(r, kTwoPi * j / kPolygon));
    const double d0 = std::abs(m.dphi(z0));
    const double q = koebe_quarter_radius(d0, r);
    const cplx w0 = m.phi(z0);
    for (long s = 0; s < per_disk; ++s) {
      const cplx w = w0 + std::polar(q * std::sqrt(rng.uniform()), kTwoPi * rng.uniform());
      ++t.quarter_samples;
      if (winding_number(poly, w) != 1) ++t.quarter_violations;
      const cplx z = z0 + std::polar(0.5 * r * std::sqrt(rng.uniform()), kTwoPi * rng.uniform());
      const double ratio = std::abs(m.dphi(z)) / d0;
      ++t.distortion_samples;
      if (ratio < fac.lower * (1.0 - 1e-12) || ratio > fac.upper * (1.0 + 1e-12)) ++t.distortion_violations;
    }
  }
  return t;
}

inline Mobius random_mobius(Stream& rng) {
  for (;;) {
    auto c = [&] { return cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)); };
    try {
      return Mobius(c(), c(), c(), c());
    } catch (const Error&) {
    }
  }
}

}  // namespace fatou::testing

#include "fatou/rho.h"

namespace fatou::testing {

struct ThinCase {
  std::string name;
  SingularData svs;
  std::vector<cplx> boundary;
  RhoConfig cfg;
  ThinSVParams params;
  bool expect_a;
  bool expect_b;
};

inline std::vector<cplx> sampled_segment(cplx a, cplx b, double spacing) {
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(b - a) / spacing));
  std::vector<cplx> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = a + (b - a) * (static_cast<double>(k) / static_cast<double>(n));
  return out;
}

// Synthetic singular sets with known verdicts; the expected answer is a direct
// count at each scale, fixed by construction.
inline std::vector<ThinCase> thin_families(std::uint64_t seed, int instances) {
  std::vector<ThinCase> cases;
  const RhoConfig none({}, 1.0);
  for (int k = 0; k < instances; ++k) {
    Stream rng(seed, static_cast<std::uint64_t>(k));
    {
      // One value per scale, stacked on a normal to the boundary: one cluster
      // at every scale, so the count is 1 <= n.
      const double mu = rng.uniform(0.3, 0.6);
      const int horizon = 10;
      const double x0 = rng.uniform(0.2, 0.8);
      SingularData s;
      for (int n = 1; n <= horizon; ++n) s.critical_values.push_back(cplx(x0, std::pow(mu, n)));
      cases.push_back({"one-per-scale", s, sampled_segment(0.0, 1.0, 0.5 * std::pow(mu, horizon)), none,
                       ThinSVParams{mu, 1, 0.1, horizon}, true, true});
    }
    for (int d = 0; d <= 4; ++d) {
      // 2^n values at spacing 1.01 mu^n and height mu^n/2 for the last scales;
      // 2^17 > 17^4 so the top scale breaks every exponent d <= 4.
      const double mu = rng.uniform(0.44, 0.47);
      const int horizon = 17;
      SingularData s;
      for (int n = horizon - 2; n <= horizon; ++n) {
        const double sc = std::pow(mu, n);
        const double start = rng.uniform(0.005, 0.02);
        for (long j = 0; j < (1L << n); ++j)
          s.critical_values.push_back(cplx(start + 1.01 * sc * static_cast<double>(j), 0.5 * sc));
      }
      const double length = 1.02 * std::pow(2.0 * mu, horizon) + 0.03;
      cases.push_back({"exponential-count d=" + std::to_string(d), s,
                       sampled_segment(0.0, length, 0.9 * std::pow(mu, horizon)), none, ThinSVParams{mu, d, 0.1, horizon},
                       false, true});
    }
    {
      // Boundary enters the puncture disk along one ray, singular values along
      // the orthogonal ray: the chart keeps them at distance > eps.
      const double eps = rng.uniform(0.2, 0.5);
      const cplx v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      const double theta = rng.uniform(0.0, kTwoPi);
      SingularData s;
      for (int j = 1; j <= 30; ++j) s.critical_values.push_back(v + std::polar(eps * std::pow(0.5, j), theta + 0.5 * kPi));
      std::vector<cplx> b;
      for (int j = 0; j <= 10000; ++j) b.push_back(v + std::polar(2.0 * eps * std::pow(0.999, j), theta));
      cases.push_back({"puncture-orthogonal", s, b, RhoConfig({v}, eps), ThinSVParams{0.5, 1, 0.9 * eps, 4}, true,
                       true});
    }
    {
      // Singular values hugging the boundary ray inside the puncture disk: in the
      // chart they stay within 0.1 eps of the boundary image.
      const double eps = rng.uniform(0.2, 0.5);
      const cplx v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      const double theta = rng.uniform(0.0, kTwoPi);
      SingularData s;
      std::vector<cplx> b;
      for (int j = 0; j <= 10000; ++j) b.push_back(v + std::polar(2.0 * eps * std::pow(0.999, j), theta));
      for (int j = 1; j <= 12; ++j) {
        const double t = eps * std::pow(0.5, j);
        s.critical_values.push_back(v + std::polar(t, theta) + std::polar(0.1 * t * t / eps, theta + 0.5 * kPi));
      }
      cases.push_back({"puncture-tangential", s, b, RhoConfig({v}, eps), ThinSVParams{0.5, 1, 0.5 * eps, 4}, true,
                       false});
    }
  }
  cases.push_back({"empty", SingularData{}, {}, none, ThinSVParams{0.5, 0, 1.0, 5}, true, true});
  return cases;
}

// Centered finite Blaschke products (g(0) = 0).
inline std::vector<Map> centered_blaschke_catalog() {
  return {
      Map::power(2),
      Map::power(3),
      Map::blaschke({0.0, 0.5}),
      Map::blaschke({0.0, cplx(0.3, 0.4), -0.6}),
      Map::blaschke({0.0, cplx(0.0, 0.9)}, std::polar(1.0, 0.7)),
  };
}

// M o g o M^{-1} for the disk automorphism M(z) = e^{i theta} (z - b)/(1 - conj(b) z).
inline Map conjugate_blaschke(const Map& g, cplx b, double theta) {
  const cplx rot = std::polar(1.0, theta);
  auto M = [&](cplx z) { return rot * (z - b) / (1.0 - std::conj(b) * z); };
  auto Minv = [&](cplx w) { return (w / rot + b) / (1.0 + std::conj(b) * w / rot); };
  std::vector<cplx> zeros;
  for (const cplx& a : g.preimages_all(b).roots) zeros.push_back(M(a));
  const Map unrotated = Map::blaschke(zeros);
  const cplx probe(0.1, 0.2);
  const cplx w = M(g(Minv(probe))) / unrotated(probe);
  return Map::blaschke(zeros, w / std::abs(w));
}

}  // namespace fatou::testing
