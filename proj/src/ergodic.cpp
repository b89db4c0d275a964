#include "fatou/ergodic.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fatou/inner.h"
#include "fatou/orbit.h"
#include "fatou/rng.h"

namespace fatou {

namespace {

bool tail_converged(const std::vector<double>& tail) {
  return tail.size() >= 2 && std::abs(tail[tail.size() - 1] - tail[tail.size() - 2]) < 1e-3;
}

void finish(LyapunovResult& r) {
  r.converged = tail_converged(r.running_tail);
  r.negative = r.chi < 0.0;
}

double trapezoid_log_derivative(const Map& g, int n) {
  CompensatedSum sum;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(g.derivative(std::polar(1.0, kTwoPi * i / n)));
    if (d < 1e-12) throw Error(Errc::CriticalOnCircle, "critical point on the unit circle", i);
    sum.add(std::log(d));
  }
  return sum.value() / n;
}

double angle_of(cplx z) {
  const double a = std::arg(z);
  return a < 0.0 ? a + kTwoPi : a;
}

struct ChainStepper {
  const Map& f;
  Stream rng;
  cplx x;

  // Moves to a preimage of x drawn with probability 1/d; returns log|f'| there.
  double step() {
    const PreimageSet pre = f.preimages_all(x);
    const auto& crit = f.singular_data().critical_points;
    for (int attempt = 0; attempt <= 32; ++attempt) {
      const cplx next = pre.roots[rng.below(pre.roots.size())];
      if (std::none_of(crit.begin(), crit.end(), [&](cplx c) { return std::abs(c - next) < 1e-8; })) {
        x = next;
        return f.log_abs_derivative(next);
      }
    }
    throw Error(Errc::CriticalFiberHit, "every draw landed on a critical point");
  }
};

}  // namespace

const char* lyapunov_method_name(LyapunovMethod m) {
  switch (m) {
    case LyapunovMethod::Quadrature: return "quadrature";
    case LyapunovMethod::BirkhoffForward: return "birkhoff_forward";
    case LyapunovMethod::BirkhoffBackward: return "birkhoff_backward";
  }
  return "?";
}

LyapunovResult lyapunov_quadrature_circle(const Map& g, int n_quad) {
  if (!g.preserves_unit_circle()) throw Error(Errc::InvalidArgument, "quadrature on the circle needs a circle map");
  if (g.degree() < 2) throw Error(Errc::InvalidArgument, "degree-1 automorphisms are excluded");
  if (n_quad < 8) throw Error(Errc::InvalidArgument, "need at least 8 quadrature nodes");
  LyapunovResult r;
  r.method = LyapunovMethod::Quadrature;
  r.n = n_quad;
  for (int m : {n_quad / 8, n_quad / 4, n_quad / 2}) r.running_tail.push_back(trapezoid_log_derivative(g, m));
  r.chi = trapezoid_log_derivative(g, n_quad);
  r.running_tail.push_back(r.chi);
  finish(r);
  return r;
}

double escape_radius(const Map& f) {
  if (!f.is_polynomial()) return std::numeric_limits<double>::infinity();
  const auto& a = std::get<Polynomial>(f.family()).coeffs;
  const int d = f.degree();
  const double lead = std::abs(a[d]);
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += std::abs(a[k]) / lead;
  return 1.0 + s + std::pow(2.0 / lead, 1.0 / (d - 1));
}

LyapunovResult birkhoff_average(const Map& f, cplx x0, long n, Direction direction, std::uint64_t seed) {
  if (n < 10) throw Error(Errc::InvalidArgument, "need at least 10 steps");
  LyapunovResult r;
  r.n = n;
  const long every = n / 10;
  CompensatedSum sum;
  if (direction == Direction::Forward) {
    r.method = LyapunovMethod::BirkhoffForward;
    const bool circle = f.preserves_unit_circle();
    const double R = escape_radius(f);
    cplx x = circle ? x0 / std::abs(x0) : x0;
    for (long k = 0; k < n; ++k) {
      if (!(std::abs(x) <= R) || !finite(x)) throw Error(Errc::OrbitEscaped, "orbit left the escape radius", k);
      sum.add(f.log_abs_derivative(x));
      x = f(x);
      if (circle) x /= std::abs(x);
      if ((k + 1) % every == 0) r.running_tail.push_back(sum.value() / static_cast<double>(k + 1));
    }
  } else {
    r.method = LyapunovMethod::BirkhoffBackward;
    if (f.preserves_unit_circle() && f.centered()) {
      const BackwardOrbit o = sample_backward_orbit(f, x0, static_cast<int>(n), OrbitMode::CircleTransfer, seed);
      for (long k = 0; k < n; ++k) {
        sum.add(std::log(std::abs(o.step_derivs[k])));
        if ((k + 1) % every == 0) r.running_tail.push_back(sum.value() / static_cast<double>(k + 1));
      }
    } else {
      if (!f.finite_degree()) throw Error(Errc::InvalidArgument, "backward sampling needs a finite-degree map");
      ChainStepper chain{f, Stream(seed, 0), x0};
      for (long k = 0; k < n; ++k) {
        const cplx prev = chain.x;
        sum.add(chain.step());
        if (!(std::abs(f(chain.x) - prev) <= 1e-10 * (1.0 + std::abs(prev)))) {
          throw Error(Errc::VerificationFailed, "forward image misses the previous point", k);
        }
        if ((k + 1) % every == 0) r.running_tail.push_back(sum.value() / static_cast<double>(k + 1));
      }
    }
  }
  r.chi = sum.value() / static_cast<double>(n);
  finish(r);
  return r;
}

EscapeRate escape_rate(const Map& f, cplx z, double tol, int max_iterations) {
  if (!f.is_polynomial() || f.degree() < 2) throw Error(Errc::InvalidArgument, "escape rate needs a polynomial of degree >= 2");
  const auto& a = std::get<Polynomial>(f.family()).coeffs;
  const double d = f.degree();
  const double shift = std::log(std::abs(a[f.degree()])) / (d - 1.0);
  const double R = escape_radius(f);
  EscapeRate out;
  double scale = 1.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int n = 0; n <= max_iterations; ++n) {
    out.iterations = n;
    if (std::abs(z) > R) {
      const double est = scale * (std::log(std::abs(z)) + shift);
      if (std::abs(est - prev) < tol && std::abs(z) > 1e30) {
        out.value = est;
        out.converged = true;
        return out;
      }
      prev = est;
    }
    z = f(z);
    scale /= d;
    if (!finite(z)) break;
  }
  if (std::isnan(prev)) {
    out.converged = true;  // bounded orbit
    return out;
  }
  out.value = prev;
  return out;
}

ReturnSet ReturnSet::arc(double start, double length) {
  if (!(length > 0.0)) throw Error(Errc::InvalidArgument, "arc length must be positive");
  ReturnSet s;
  s.kind = Kind::Arc;
  s.start = std::fmod(start, kTwoPi);
  if (s.start < 0.0) s.start += kTwoPi;
  s.length = std::min(length, kTwoPi);
  return s;
}

ReturnSet ReturnSet::disk(cplx center, double radius) {
  if (!(radius > 0.0)) throw Error(Errc::InvalidArgument, "disk radius must be positive");
  ReturnSet s;
  s.kind = Kind::Disk;
  s.center = center;
  s.radius = radius;
  return s;
}

ReturnSet ReturnSet::annular_sector(cplx center, double inner, double outer, double start, double length) {
  if (!(inner >= 0.0 && outer > inner)) throw Error(Errc::InvalidArgument, "need 0 <= inner < outer");
  ReturnSet s = arc(start, length);
  s.kind = Kind::AnnularSector;
  s.center = center;
  s.inner = inner;
  s.radius = outer;
  return s;
}

bool ReturnSet::contains(cplx z) const {
  if (kind == Kind::Disk) return std::abs(z - center) < radius;
  if (kind == Kind::AnnularSector) {
    const double d = std::abs(z - center);
    if (d < inner || d >= radius) return false;
    if (length >= kTwoPi) return true;
    double off = angle_of(z - center) - start;
    if (off < 0.0) off += kTwoPi;
    return off < length;
  }
  if (full_circle()) return true;
  double off = angle_of(z) - start;
  if (off < 0.0) off += kTwoPi;
  return off < length;
}

ReturnData first_return(const Map& f, const ReturnSet& set, long n_trials, std::uint64_t seed, long cap) {
  if (n_trials < 1 || cap < 1) throw Error(Errc::InvalidArgument, "need n_trials >= 1 and cap >= 1");
  ReturnData rd;
  rd.set = set;
  if (set.kind == ReturnSet::Kind::Arc) {
    if (!f.preserves_unit_circle()) throw Error(Errc::InvalidArgument, "arc sets need a circle map");
    if (!f.centered()) throw Error(Errc::WrongNormalization, "Lebesgue measure is invariant only for centered maps");
    rd.measure_of_set = set.length / kTwoPi;
    for (long t = 0; t < n_trials; ++t) {
      Stream rng(seed, static_cast<std::uint64_t>(t));
      cplx x = std::polar(1.0, set.start + set.length * rng.uniform());
      CompensatedSum logs;
      long T = 0;
      bool back = false;
      while (T < cap) {
        logs.add(f.log_abs_derivative(x));
        x = f(x);
        x /= std::abs(x);
        ++T;
        if (set.contains(x)) {
          back = true;
          break;
        }
      }
      if (back) {
        rd.return_times.push_back(T);
        rd.log_derivative_sums.push_back(logs.value());
      } else {
        ++rd.censored;
      }
    }
  } else {
    if (!f.finite_degree()) throw Error(Errc::InvalidArgument, "planar return sets need a finite-degree map");
    constexpr std::size_t kCloud = 20000;
    const std::vector<cplx> cloud = boundary_cloud(f, kCloud, splitmix64(seed ^ 0xC10DULL));
    const auto inside = std::count_if(cloud.begin(), cloud.end(), [&](cplx z) { return set.contains(z); });
    rd.measure_of_set = static_cast<double>(inside) / static_cast<double>(kCloud);
    if (inside == 0) throw Error(Errc::AllCensored, "return set misses the boundary cloud");
    constexpr long kVisitsPerChain = 1000;
    long trials = 0;
    for (std::uint64_t c = 0; trials < n_trials; ++c) {
      ChainStepper chain{f, Stream(seed, c), boundary_cloud(f, 1, splitmix64(seed + c))[0]};
      bool started = false;
      long gap = 0;
      CompensatedSum logs;
      long visits = 0;
      while (visits < kVisitsPerChain && trials < n_trials) {
        const double l = chain.step();
        ++gap;
        logs.add(l);
        if (started && gap >= cap) {
          ++rd.censored;
          ++trials;
          started = false;
        }
        if (set.contains(chain.x)) {
          if (started) {
            rd.return_times.push_back(gap);
            rd.log_derivative_sums.push_back(logs.value());
            ++trials;
            ++visits;
          }
          started = true;
          gap = 0;
          logs = CompensatedSum();
        }
      }
    }
  }
  if (rd.return_times.empty()) throw Error(Errc::AllCensored, "no trial returned before the cap");
  return rd;
}

KacReport kac_check(const ReturnData& rd) {
  KacReport k;
  const double n = static_cast<double>(rd.return_times.size());
  if (n == 0.0) return k;
  CompensatedSum s, s2;
  for (long t : rd.return_times) {
    s.add(static_cast<double>(t));
    s2.add(static_cast<double>(t) * static_cast<double>(t));
  }
  k.mean_return = s.value() / n;
  const double var = n > 1.0 ? std::max(0.0, (s2.value() - n * k.mean_return * k.mean_return) / (n - 1.0)) : 0.0;
  k.product = k.mean_return * rd.measure_of_set;
  k.sigma = std::sqrt(var / n) * rd.measure_of_set;
  k.margin = 3.0 * k.sigma - std::abs(k.product - 1.0);
  k.pass = k.margin >= -1e-12;
  return k;
}

ReturnLyapunovReport return_lyapunov_identity(const Map& f, const ReturnSet& set, long n_trials, std::uint64_t seed) {
  const ReturnData rd = first_return(f, set, n_trials, seed);
  ReturnLyapunovReport rep;
  const double n = static_cast<double>(rd.log_derivative_sums.size());
  CompensatedSum s, s2;
  for (double v : rd.log_derivative_sums) {
    s.add(v);
    s2.add(v * v);
  }
  rep.left = s.value() / n;
  rep.left_std_error = n > 1.0 ? std::sqrt(std::max(0.0, (s2.value() - n * rep.left * rep.left) / (n - 1.0)) / n) : 0.0;
  if (set.kind == ReturnSet::Kind::Arc) {
    rep.chi = lyapunov_quadrature_circle(f, 4096).chi;
  } else {
    constexpr int kChains = 16;
    CompensatedSum chi;
    for (int c = 0; c < kChains; ++c) {
      const cplx x0 = boundary_cloud(f, 1, splitmix64(seed ^ (0xB1ULL + c)))[0];
      chi.add(birkhoff_average(f, x0, 10000, Direction::Backward, splitmix64(seed + 0x51ULL + c)).chi);
    }
    rep.chi = chi.value() / kChains;
  }
  rep.right = rep.chi / rd.measure_of_set;
  rep.relative_discrepancy = std::abs(rep.left - rep.right) / std::abs(rep.right);
  return rep;
}

SectorGrowthReport sector_growth_check(const Map& f, const GrowthSectorParams& params, const std::vector<double>& radii,
                                       int samples_per_shell) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
  if (radii.size() < 3) throw Error(Errc::InvalidArgument, "need at least three radii");
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    if (!(radii[i + 1] < radii[i] && radii[i + 1] > 0.0)) throw Error(Errc::InvalidArgument, "radii must decrease");
  }
  if (std::abs(params.direction) == 0.0) throw Error(Errc::InvalidArgument, "direction must be nonzero");
  const cplx dir = params.direction / std::abs(params.direction);
  const int n_r = 20;
  const int n_phi = std::max(1, samples_per_shell / n_r);
  const double half = kPi * params.alpha;
  SectorGrowthReport rep;
  rep.radii = radii;
  rep.threshold = 1.0 / (2.0 * params.alpha);
  long inside_bounds = 0, total = 0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n_r; ++a) {
      const double s = radii[i] * std::pow(radii[i + 1] / radii[i], (a + 0.5) / n_r);
      for (int b = 0; b < n_phi; ++b) {
        const double phi = half * (-1.0 + (2.0 * b + 1.0) / n_phi);
        const cplx u = dir * std::polar(1.0, phi);
        const cplx z = params.vertex.is_finite() ? params.vertex.z + s * u : u / s;
        const double l = f.log_abs_derivative(z);
        if (!std::isfinite(l)) continue;
        best = std::max(best, l);
        ++total;
        const double lo = std::log(params.A) + params.B * std::pow(s, params.beta);
        const double hi = std::log(params.A) + params.B * std::pow(s, -params.beta);
        if (l >= lo && l <= hi) ++inside_bounds;
      }
    }
    if (!std::isfinite(best)) throw Error(Errc::EmptyShell, "no finite samples in shell", static_cast<long>(i));
    rep.envelope.push_back(std::max(best, 0.0));
    xs.push_back(-0.5 * std::log(radii[i] * radii[i + 1]));
  }
  for (double e : rep.envelope) ys.push_back(std::log1p(e));
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  rep.beta_hat = sxy / sxx;
  rep.integrable = rep.beta_hat < rep.threshold;
  rep.bound_fraction = total > 0 ? static_cast<double>(inside_bounds) / static_cast<double>(total) : 0.0;
  return rep;
}

DerivativeFloorReport derivative_floor_check(const Map& f, double x0, double x1, double y0, double y1, int nx, int ny) {
  if (!(x1 > x0 && y1 > y0) || nx < 1 || ny < 1) throw Error(Errc::InvalidArgument, "empty rectangle");
  DerivativeFloorReport rep;
  rep.min_modulus = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const cplx z(x0 + (x1 - x0) * (i + 0.5) / nx, y0 + (y1 - y0) * (j + 0.5) / ny);
      rep.min_modulus = std::min(rep.min_modulus, std::abs(f.derivative(z)));
      ++rep.samples;
    }
  }
  rep.expanding = rep.min_modulus > 1.0;
  return rep;
}

}  // namespace fatou
