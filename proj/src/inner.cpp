#include "fatou/inner.h"

#include <algorithm>
#include <cmath>

#include "fatou/geometry.h"
#include "fatou/rng.h"

namespace fatou {

namespace {

void require_circle_map(const Map& g) {
  if (!g.preserves_unit_circle()) throw Error(Errc::InvalidArgument, "map does not preserve the unit circle");
}

cplx to_circle(cplx z) { return z / std::abs(z); }

double angle_of(cplx z) {
  const double a = std::arg(z);
  return a < 0.0 ? a + kTwoPi : a;
}

cplx newton_fixed(const Map& g, cplx z) {
  for (int k = 0; k < 50; ++k) {
    const cplx h = g(z) - z;
    const cplx dh = g.derivative(z) - 1.0;
    if (std::abs(dh) < 1e-300) break;
    const cplx step = h / dh;
    z -= step;
    if (std::abs(step) < 1e-16 * (1.0 + std::abs(z))) break;
  }
  return z;
}

double bump(double theta, double center, double half_width) {
  const double s = std::remainder(theta - center, kTwoPi) / half_width;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

}  // namespace

const char* orbit_mode_name(OrbitMode mode) {
  switch (mode) {
    case OrbitMode::PlaneEqualWeight: return "plane_equal_weight";
    case OrbitMode::CircleTransfer: return "circle_transfer";
    case OrbitMode::FirstReturn: return "first_return";
  }
  return "?";
}

const char* cowen_name(CowenType t) {
  switch (t) {
    case CowenType::Elliptic: return "elliptic";
    case CowenType::Hyperbolic: return "hyperbolic";
    case CowenType::DoublyParabolic: return "doubly_parabolic";
    case CowenType::SimplyParabolic: return "simply_parabolic";
  }
  return "?";
}

Map half_plane_translation(double shift) {
  if (!(shift != 0.0)) throw Error(Errc::InvalidArgument, "translation must be nonzero");
  // g(z) = ((2i - s) z + s) / (-s z + s + 2i) in Blaschke form.
  const cplx two_i(0.0, 2.0);
  const cplx zero = -shift / (two_i - shift);
  const cplx rotation = (two_i - shift) / (shift + two_i);
  return Map::blaschke({zero}, rotation);
}

DenjoyWolff denjoy_wolff(const Map& g) {
  require_circle_map(g);
  if (g.degree() == 1 && std::abs(g(0.5) - 0.5) < 1e-14 && std::abs(g(0.25) - 0.25) < 1e-14) {
    throw Error(Errc::EllipticRotation, "identity map");
  }
  // A fixed point of multiplicity m scatters into a cluster of m roots; it is a
  // simple root of the (m-1)-th derivative of the fixed-point polynomial.
  const std::vector<cplx> eq = poly_sub(g.numerator(), poly_mul(g.denominator(), {0.0, 1.0}));
  const std::vector<cplx> fixed = poly_roots(eq);
  std::vector<cplx> centers;
  std::vector<bool> used(fixed.size(), false);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (used[i]) continue;
    cplx sum = fixed[i];
    int count = 1;
    for (std::size_t j = i + 1; j < fixed.size(); ++j) {
      if (!used[j] && std::abs(fixed[j] - fixed[i]) < 1e-3) {
        used[j] = true;
        sum += fixed[j];
        ++count;
      }
    }
    cplx c = sum / static_cast<double>(count);
    std::vector<cplx> q = eq;
    for (int k = 1; k < count; ++k) q = poly_derivative(q);
    const std::vector<cplx> dq = poly_derivative(q);
    for (int it = 0; it < 20; ++it) {
      const cplx d = poly_eval(dq, c);
      if (d == cplx(0.0, 0.0)) break;
      const cplx step = poly_eval(q, c) / d;
      c -= step;
      if (std::abs(step) < 1e-17) break;
    }
    centers.push_back(c);
  }
  for (const cplx& c : centers) {
    if (std::abs(c) < 1.0 - 1e-7) {
      const cplx p = newton_fixed(g, c);
      const double d = std::abs(g.derivative(p));
      if (g.degree() == 1) throw Error(Errc::EllipticRotation, "automorphism with an interior fixed point");
      return {p, d};
    }
  }
  bool found = false;
  DenjoyWolff best{};
  for (const cplx& c : centers) {
    if (std::abs(std::abs(c) - 1.0) > 1e-5) continue;
    const cplx xi = to_circle(c);
    const double d = std::abs(g.derivative(xi));
    if (d <= 1.0 + 1e-6 && (!found || d < best.derivative_modulus)) {
      best = {xi, std::min(d, 1.0)};
      found = true;
    }
  }
  if (!found) throw Error(Errc::RootFinding, "no attracting fixed point found in the closed disk");
  return best;
}

InnerMap make_inner(const Map& g) {
  const DenjoyWolff dw = denjoy_wolff(g);
  return {g, dw.point, dw.derivative_modulus};
}

CowenReport cowen_classify(const Map& g, long max_iterations, double step_threshold) {
  CowenReport rep;
  rep.dw = denjoy_wolff(g);
  rep.step_threshold = step_threshold;
  if (std::abs(rep.dw.point) < 1.0 - 1e-9) {
    rep.type = CowenType::Elliptic;
    return rep;
  }
  if (rep.dw.derivative_modulus < 1.0 - 1e-8) {
    rep.type = CowenType::Hyperbolic;
    return rep;
  }
  cplx z = 0.0;
  double half_step = 0.0;
  for (long n = 1; n <= max_iterations; ++n) {
    const cplx next = g(z);
    rep.last_step = disk_hyperbolic_distance(z, next);
    rep.iterations = n;
    z = next;
    if (n == max_iterations / 2) half_step = rep.last_step;
  }
  if (rep.last_step < step_threshold) {
    rep.type = CowenType::DoublyParabolic;
  } else if (std::abs(rep.last_step - half_step) < 0.01 * rep.last_step) {
    rep.type = CowenType::SimplyParabolic;
  } else {
    throw Error(Errc::Inconclusive, "hyperbolic step sequence has not resolved", max_iterations);
  }
  return rep;
}

CircleOrbit circle_orbit(const Map& g, cplx xi0, int n) {
  require_circle_map(g);
  if (std::abs(std::abs(xi0) - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "start point must lie on the unit circle");
  CircleOrbit out;
  cplx xi = to_circle(xi0);
  out.points.push_back(xi);
  for (int k = 0; k < n; ++k) {
    const cplx w = g(xi);
    out.max_drift = std::max(out.max_drift, std::abs(std::abs(w) - 1.0));
    xi = to_circle(w);
    out.points.push_back(xi);
  }
  return out;
}

std::vector<cplx> circle_preimages(const Map& g, cplx xi) {
  std::vector<cplx> roots = g.preimages_all(xi).roots;
  for (cplx& r : roots) r = to_circle(r);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return angle_of(a) < angle_of(b); });
  return roots;
}

BackwardOrbit backward_sample_circle(const Map& g, cplx xi0, int n, std::uint64_t seed) {
  require_circle_map(g);
  if (!g.centered()) throw Error(Errc::WrongNormalization, "circle transfer sampling needs g(0) = 0");
  if (std::abs(std::abs(xi0) - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "start point must lie on the unit circle");
  BackwardOrbit orb;
  orb.mode = OrbitMode::CircleTransfer;
  cplx xi = to_circle(xi0);
  orb.points.push_back(xi);
  Stream rng(seed, 0);
  std::vector<double> w;
  for (int k = 0; k < n; ++k) {
    const std::vector<cplx> pre = circle_preimages(g, xi);
    w.assign(pre.size(), 0.0);
    CompensatedSum raw;
    for (std::size_t j = 0; j < pre.size(); ++j) {
      const double d = std::abs(g.derivative(pre[j]));
      if (d < 1e-10) throw Error(Errc::CriticalFiber, "preimage at a critical point", k);
      w[j] = 1.0 / d;
      raw.add(w[j]);
    }
    const double total = raw.value();
    double u = rng.uniform() * total;
    std::size_t pick = pre.size() - 1;
    for (std::size_t j = 0; j < pre.size(); ++j) {
      if (u < w[j]) {
        pick = j;
        break;
      }
      u -= w[j];
    }
    xi = pre[pick];
    orb.points.push_back(xi);
    orb.step_derivs.push_back(g.derivative(xi));
    orb.log_weights.push_back(std::log(w[pick] / total));
    orb.raw_weight_sums.push_back(total);
  }
  return orb;
}

InvarianceReport invariance_check(const Map& g, CircleMeasure measure, int K, int n_quad, double gap) {
  require_circle_map(g);
  if (K < 1 || n_quad < 16) throw Error(Errc::InvalidArgument, "need K >= 1 and n_quad >= 16");
  InvarianceReport rep;
  rep.measure = measure;
  std::vector<double> theta(n_quad), image(n_quad);
  for (int i = 0; i < n_quad; ++i) {
    theta[i] = kTwoPi * i / n_quad;
    image[i] = angle_of(g(std::polar(1.0, theta[i])));
  }
  if (measure == CircleMeasure::Lebesgue) {
    if (!g.centered()) throw Error(Errc::WrongNormalization, "Lebesgue invariance needs g(0) = 0");
    auto phi = [](int idx, double t) {
      if (idx == 0) return 1.0;
      const int k = (idx + 1) / 2;
      return idx % 2 == 1 ? std::cos(k * t) : std::sin(k * t);
    };
    for (int idx = 0; idx <= 2 * K; ++idx) {
      CompensatedSum a, b;
      for (int i = 0; i < n_quad; ++i) {
        a.add(phi(idx, image[i]));
        b.add(phi(idx, theta[i]));
      }
      rep.pushed.push_back(a.value() / n_quad);
      rep.original.push_back(b.value() / n_quad);
    }
  } else {
    const DenjoyWolff dw = denjoy_wolff(g);
    if (std::abs(dw.point - 1.0) > 1e-8 || std::abs(dw.derivative_modulus - 1.0) > 1e-8) {
      throw Error(Errc::WrongNormalization, "lambda_R invariance needs Denjoy-Wolff point 1 with derivative 1");
    }
    rep.gap = gap;
    const double half_width = 0.35;
    for (int j = 1; j <= K; ++j) {
      const double center = 0.5 + half_width + (kTwoPi - 2.0 * (0.5 + half_width)) * (j - 1) / std::max(1, K - 1);
      double value[2][2];
      for (int level = 0; level < 2; ++level) {
        const double cut = level == 0 ? gap : 0.5 * gap;
        CompensatedSum a, b;
        for (int i = 0; i < n_quad; ++i) {
          const double t = theta[i];
          if (std::abs(std::remainder(t, kTwoPi)) < cut) continue;
          const double density = 1.0 / std::norm(std::polar(1.0, t) - 1.0);
          a.add(bump(image[i], center, half_width) * density);
          b.add(bump(t, center, half_width) * density);
        }
        value[level][0] = a.value() / n_quad;
        value[level][1] = b.value() / n_quad;
      }
      const double pushed = 2.0 * value[1][0] - value[0][0];
      const double original = 2.0 * value[1][1] - value[0][1];
      rep.richardson_shift = std::max(
          {rep.richardson_shift, std::abs(pushed - value[0][0]), std::abs(original - value[0][1])});
      rep.pushed.push_back(pushed);
      rep.original.push_back(original);
    }
  }
  for (std::size_t k = 0; k < rep.pushed.size(); ++k) {
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(rep.pushed[k] - rep.original[k]));
  }
  return rep;
}

StolzReport stolz_containment_check(const Map& g, cplx xi, double rho, double alpha, std::uint64_t branch) {
  require_circle_map(g);
  if (std::abs(std::abs(xi) - 1.0) > 1e-12) throw Error(Errc::InvalidArgument, "vertex must lie on the unit circle");
  if (!(alpha > 0.0 && alpha < kPi / 2.0) || !(rho > 0.0 && rho < 1.0)) {
    throw Error(Errc::InvalidArgument, "need alpha in (0, pi/2) and rho in (0, 1)");
  }
  xi = to_circle(xi);
  StolzReport rep;
  rep.rho0 = std::numeric_limits<double>::infinity();
  for (const cplx& v : g.singular_data().critical_values) rep.rho0 = std::min(rep.rho0, std::abs(v - xi));
  if (!(rep.rho0 > rho)) throw Error(Errc::BranchUndefined, "a critical value obstructs the inverse branch");
  rep.rho_used = std::min(rho, 0.5 * rep.rho0);
  const std::vector<cplx> pre = circle_preimages(g, xi);
  const cplx vertex = pre[branch % pre.size()];
  rep.image_vertex = vertex;
  constexpr int kSamples = 256;
  rep.samples = kSamples;
  cplx w = xi;
  cplx z = vertex;
  for (int j = 0; j < kSamples; ++j) {
    const double t = 1.0 - rep.rho_used * (j + 0.5) / kSamples;
    const cplx wn = t * xi;
    z = g.continue_segment(z, w, wn);
    w = wn;
    const double angle = std::abs(std::arg(1.0 - z / vertex));
    rep.worst_angle = std::max(rep.worst_angle, angle);
    const bool inside = angle < alpha && std::abs(z) > 1.0 - rep.rho_used;
    if (!inside) {
      ++rep.violations;
      if (rep.first_violation_t < 0.0) rep.first_violation_t = t;
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace fatou
