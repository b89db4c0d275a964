#include "fatou/orbit.h"

#include <algorithm>
#include <cmath>

#include "fatou/inner.h"
#include "fatou/rng.h"

namespace fatou {

BackwardOrbit sample_backward_orbit(const Map& f, cplx x0, int n, OrbitMode mode, std::uint64_t seed) {
  if (n < 0) throw Error(Errc::InvalidArgument, "depth must be non-negative");
  if (mode == OrbitMode::CircleTransfer) return backward_sample_circle(f, x0, n, seed);
  if (mode == OrbitMode::FirstReturn) {
    throw Error(Errc::InvalidArgument, "first-return chains are built by sample_return_orbit");
  }
  if (!f.finite_degree()) throw Error(Errc::InvalidArgument, "equal-weight sampling needs a finite-degree map");
  const auto& crit = f.singular_data().critical_points;
  const double log_w = -std::log(static_cast<double>(f.degree()));
  BackwardOrbit orb;
  orb.mode = OrbitMode::PlaneEqualWeight;
  orb.points.reserve(static_cast<std::size_t>(n) + 1);
  orb.points.push_back(x0);
  Stream rng(seed, 0);
  cplx x = x0;
  for (int k = 0; k < n; ++k) {
    const PreimageSet pre = f.preimages_all(x);
    if (pre.roots.empty()) throw Error(Errc::RootFinding, "empty fiber", k);
    cplx next{};
    bool clear = false;
    for (int attempt = 0; attempt <= 32 && !clear; ++attempt) {
      next = pre.roots[rng.below(pre.roots.size())];
      clear = std::none_of(crit.begin(), crit.end(), [&](cplx c) { return std::abs(c - next) < 1e-8; });
    }
    if (!clear) throw Error(Errc::CriticalFiberHit, "every draw landed on a critical point", k);
    if (!(std::abs(f(next) - x) <= 1e-10 * (1.0 + std::abs(x)))) {
      throw Error(Errc::VerificationFailed, "forward image misses the previous point", k);
    }
    orb.points.push_back(next);
    orb.step_derivs.push_back(f.derivative(next));
    orb.log_weights.push_back(log_w);
    x = next;
  }
  return orb;
}

double chain_residual(const Map& f, const BackwardOrbit& orbit) {
  double worst = 0.0;
  for (int k = 0; k < orbit.depth(); ++k) {
    const cplx xk = orbit.points[k];
    worst = std::max(worst, std::abs(f(orbit.points[k + 1]) - xk) / (1.0 + std::abs(xk)));
  }
  return worst;
}

}  // namespace fatou
