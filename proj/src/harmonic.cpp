#include "fatou/harmonic.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>

#include "fatou/rng.h"

namespace fatou {

namespace {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;

double ray_distance(cplx z, double phi) {
  const cplx w = z * std::polar(1.0, -phi);
  return w.real() > 0.0 ? std::abs(w.imag()) : std::abs(z);
}

cplx ray_nearest(cplx z, double phi) {
  const cplx w = z * std::polar(1.0, -phi);
  return w.real() > 0.0 ? std::polar(w.real(), phi) : cplx(0.0, 0.0);
}

double opening(const DomainSpec& dom) { return dom.kind == DomainKind::SlitPlane ? kPi : kPi * dom.alpha; }

// Parameter interval {t >= 0 : |t e^{i phi} - x| < r}; empty when lo >= hi.
std::pair<double, double> ray_interval(cplx x, double r, double phi) {
  const cplx w = x * std::polar(1.0, -phi);
  const double q = std::abs(w.imag());
  if (q >= r) return {0.0, 0.0};
  const double h = std::sqrt((r - q) * (r + q));
  return {std::max(0.0, w.real() - h), std::max(0.0, w.real() + h)};
}

// atan(u) - atan(v) without cancellation.
double atan_diff(double u, double v) { return std::atan2(u - v, 1.0 + u * v); }

double sector_measure(const DomainSpec& dom, const Disk& target) {
  const double phi = opening(dom);
  const double beta = kPi / (2.0 * phi);
  const cplx zeta = std::pow(dom.basepoint.z, beta);
  const double a = zeta.real();
  const double b = zeta.imag();
  double total = 0.0;
  for (int side : {1, -1}) {
    const auto [lo, hi] = ray_interval(target.center, target.radius, side * phi);
    if (!(hi > lo)) continue;
    // The ray side*phi maps to the imaginary axis with y = side * t^beta.
    double y0 = side * std::pow(lo, beta);
    double y1 = side * std::pow(hi, beta);
    if (y0 > y1) std::swap(y0, y1);
    total += atan_diff((y1 - b) / a, (y0 - b) / a) / kPi;
  }
  return std::clamp(total, 0.0, 1.0);
}

double unit_disk_measure(const DomainSpec& dom, const Disk& target) {
  const double m = std::abs(target.center);
  const double r = target.radius;
  if (m == 0.0) return r > 1.0 ? 1.0 : 0.0;
  // sin^2 of the half-width of the arc inside the target.
  const double s = (r - (1.0 - m)) * (r + (1.0 - m)) / (4.0 * m);
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double h = 2.0 * std::asin(std::sqrt(s));
  const double psi = std::arg(target.center);
  return disk_arc_measure(dom.basepoint.z, psi - h, psi + h);
}

double hull_diameter(const std::vector<cplx>& pts, cplx* end0 = nullptr, cplx* end1 = nullptr) {
  bg::model::multi_point<BgPoint> mp;
  for (const cplx& p : pts) mp.emplace_back(p.real(), p.imag());
  bg::model::ring<BgPoint> hull;
  bg::convex_hull(mp, hull);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const cplx a(hull[i].x(), hull[i].y());
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      const cplx b(hull[j].x(), hull[j].y());
      const double d = std::abs(a - b);
      if (d > best) {
        best = d;
        if (end0) *end0 = a;
        if (end1) *end1 = b;
      }
    }
  }
  return best;
}

enum class WalkOutcome { Exit, Entered, Censored };

struct WalkEnd {
  WalkOutcome outcome;
  cplx point;
};

// Walk on spheres from z until the boundary shell, or (stop_r > 0) the shell of
// the closed disk D(stop_c, stop_r).
WalkEnd walk(const DomainSpec& dom, cplx z, Stream& rng, double shell, long cap, cplx stop_c = 0.0,
             double stop_r = -1.0) {
  for (long step = 0;; ++step) {
    const double d = dom.boundary_distance(z);
    if (d < shell) return {WalkOutcome::Exit, dom.nearest_boundary_point(z)};
    double radius = d;
    if (stop_r > 0.0) {
      const double gap = std::abs(z - stop_c) - stop_r;
      if (gap < shell) {
        const cplx u = z == stop_c ? cplx(1.0, 0.0) : (z - stop_c) / std::abs(z - stop_c);
        const cplx on = stop_c + stop_r * u;
        if (!dom.contains(on)) return {WalkOutcome::Exit, dom.nearest_boundary_point(on)};
        return {WalkOutcome::Entered, on};
      }
      radius = std::min(radius, gap);
    }
    if (step >= cap) return {WalkOutcome::Censored, z};
    z += std::polar(radius, kTwoPi * rng.uniform());
  }
}

void require_sampler(long n) {
  if (n < 1000) throw Error(Errc::InvalidArgument, "sampling backends need at least 1000 samples");
}

Backend resolve(const DomainSpec& dom, Backend requested) {
  const bool closed_form =
      dom.kind == DomainKind::UnitDisk || dom.kind == DomainKind::Sector || dom.kind == DomainKind::SlitPlane;
  const bool basin = dom.kind == DomainKind::PolyBasinOfInfinity;
  switch (requested) {
    case Backend::Auto:
      return closed_form ? Backend::Riemann : (basin ? Backend::Bottcher : Backend::Wos);
    case Backend::Riemann:
      if (!closed_form) {
        throw Error(Errc::BackendUnavailable, std::string("no closed-form map for ") + domain_kind_name(dom.kind));
      }
      return requested;
    case Backend::Wos:
      if (basin) throw Error(Errc::BackendUnavailable, "walk on spheres needs an explicit boundary");
      return requested;
    case Backend::Bottcher:
      if (!basin) throw Error(Errc::BackendUnavailable, "Bottcher sampling needs a polynomial basin of infinity");
      return requested;
  }
  return requested;
}

ExitSample wos_exits(const DomainSpec& dom, long n, std::uint64_t seed, const WosOptions& opts) {
  ExitSample out;
  out.backend = Backend::Wos;
  out.points.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    const WalkEnd end = walk(dom, dom.basepoint.z, rng, opts.shell, opts.step_cap);
    if (end.outcome == WalkOutcome::Censored) {
      ++out.censored;
    } else {
      out.points.push_back(end.point);
    }
  }
  return out;
}

// Pullback of a uniform point on a large circle by uniformly chosen inverse branches:
// each preimage level carries equal weight, which is the pushforward of Lebesgue
// measure under the Bottcher parametrization.
ExitSample bottcher_exits(const DomainSpec& dom, long n, std::uint64_t seed) {
  const Map& f = *dom.map;
  double escape = 1.0;
  const auto& c = f.numerator();
  const double lead = std::abs(c.back());
  for (std::size_t k = 0; k + 1 < c.size(); ++k) escape = std::max(escape, 2.0 * std::abs(c[k]) / lead);
  const double R = std::max(1e4, 100.0 * escape);
  constexpr double kTol = 1e-8;
  constexpr int kMaxDepth = 400;
  ExitSample out;
  out.backend = Backend::Bottcher;
  out.points.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    cplx z = std::polar(R, kTwoPi * rng.uniform());
    // Koebe-style proxy for the distance to the Julia set.
    double reach = R;
    for (int depth = 0; depth < kMaxDepth && reach > kTol; ++depth) {
      const PreimageSet pre = f.preimages_all(z);
      z = pre.roots[rng.below(pre.roots.size())];
      reach /= std::max(std::abs(f.derivative(z)), 1e-300);
    }
    out.points.push_back(z);
  }
  return out;
}

HarmonicEstimate wos_splitting(const DomainSpec& dom, const Disk& target, long n, std::uint64_t seed,
                               const WosOptions& opts) {
  const cplx x = target.center;
  const double r = target.radius;
  const double start = std::abs(dom.basepoint.z - x);
  if (start <= r) return measure_from_sample(wos_exits(dom, n, seed, opts), target);
  const int levels = std::max(1, static_cast<int>(std::ceil(std::log(start / r) / std::log(1.0 / opts.level_ratio))));
  std::vector<double> radius(levels + 1);
  for (int k = 0; k <= levels; ++k) radius[k] = start * std::pow(r / start, static_cast<double>(k) / levels);
  radius[levels] = r;
  const int reps = std::max(2, opts.replicates);
  const long m = std::max<long>(1, n / reps);
  std::vector<double> estimates(reps, 0.0);
  long censored = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<cplx> starts{dom.basepoint.z};
    double product = 1.0;
    for (int k = 0; k <= levels && product > 0.0; ++k) {
      const bool last = k == levels;
      const double shell = opts.shell * std::min(1.0, last ? r : radius[k + 1]);
      const std::uint64_t stage_seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(rep) * 4096 + k));
      std::vector<cplx> next;
      long success = 0;
      for (long i = 0; i < m; ++i) {
        Stream rng(stage_seed, static_cast<std::uint64_t>(i));
        const cplx z = starts[rng.below(starts.size())];
        const WalkEnd end = last ? walk(dom, z, rng, shell, opts.step_cap)
                                 : walk(dom, z, rng, shell, opts.step_cap, x, radius[k + 1]);
        if (end.outcome == WalkOutcome::Censored) {
          ++censored;
        } else if (last) {
          if (std::abs(end.point - x) < r) ++success;
        } else if (end.outcome == WalkOutcome::Entered) {
          next.push_back(end.point);
          ++success;
        }
      }
      product *= static_cast<double>(success) / static_cast<double>(m);
      starts = std::move(next);
    }
    estimates[rep] = product;
  }
  CompensatedSum sum;
  for (double e : estimates) sum.add(e);
  const double mean = sum.value() / reps;
  CompensatedSum sq;
  for (double e : estimates) sq.add((e - mean) * (e - mean));
  HarmonicEstimate est;
  est.value = std::clamp(mean, 0.0, 1.0);
  est.std_error = std::sqrt(sq.value() / (reps - 1) / reps);
  est.n_samples = m * reps;
  est.backend = Backend::Wos;
  est.censored = censored;
  return est;
}

}  // namespace

const char* domain_kind_name(DomainKind kind) {
  switch (kind) {
    case DomainKind::UnitDisk: return "UnitDisk";
    case DomainKind::Sector: return "Sector";
    case DomainKind::SlitPlane: return "SlitPlane";
    case DomainKind::PolyBasinOfInfinity: return "PolyBasinOfInfinity";
    case DomainKind::SampledJordan: return "SampledJordan";
  }
  return "?";
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Auto: return "auto";
    case Backend::Riemann: return "riemann";
    case Backend::Wos: return "wos";
    case Backend::Bottcher: return "bottcher";
  }
  return "?";
}

DomainSpec DomainSpec::unit_disk(cplx base) {
  DomainSpec d;
  d.kind = DomainKind::UnitDisk;
  d.basepoint = base;
  if (!(std::abs(base) < 1.0)) throw Error(Errc::InvalidArgument, "basepoint must lie inside the unit disk");
  return d;
}

DomainSpec DomainSpec::sector(double alpha, cplx base) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "sector alpha must lie in (0,1)");
  DomainSpec d;
  d.kind = DomainKind::Sector;
  d.alpha = alpha;
  d.basepoint = base;
  if (!d.contains(base)) throw Error(Errc::InvalidArgument, "basepoint must lie inside the sector");
  return d;
}

DomainSpec DomainSpec::slit_plane(cplx base) {
  DomainSpec d;
  d.kind = DomainKind::SlitPlane;
  d.alpha = 1.0;
  d.basepoint = base;
  if (!d.contains(base)) throw Error(Errc::InvalidArgument, "basepoint must lie off the slit");
  return d;
}

DomainSpec DomainSpec::poly_basin(Map f) {
  if (!f.is_polynomial() || f.degree() < 2) {
    throw Error(Errc::InvalidArgument, "basin of infinity needs a polynomial of degree >= 2");
  }
  DomainSpec d;
  d.kind = DomainKind::PolyBasinOfInfinity;
  d.map = std::move(f);
  d.basepoint = ExtendedPoint::infinity();
  return d;
}

DomainSpec DomainSpec::jordan(std::vector<cplx> boundary, cplx base) {
  if (boundary.size() < 3) throw Error(Errc::InvalidArgument, "polygon needs at least 3 vertices");
  DomainSpec d;
  d.kind = DomainKind::SampledJordan;
  d.boundary = std::move(boundary);
  d.basepoint = base;
  if (!d.contains(base) || !(d.boundary_distance(base) > 0.0)) {
    throw Error(Errc::InvalidArgument, "basepoint must lie strictly inside the polygon");
  }
  return d;
}

bool DomainSpec::contains(cplx z) const {
  switch (kind) {
    case DomainKind::UnitDisk: return std::abs(z) < 1.0;
    case DomainKind::Sector: return z != cplx(0.0, 0.0) && std::abs(std::arg(z)) < kPi * alpha;
    case DomainKind::SlitPlane: return !(z.imag() == 0.0 && z.real() <= 0.0);
    case DomainKind::SampledJordan: return winding_number(boundary, z) != 0;
    case DomainKind::PolyBasinOfInfinity: {
      cplx w = z;
      for (int k = 0; k < 4096; ++k) {
        if (std::abs(w) > 1e8) return true;
        w = (*map)(w);
      }
      return false;
    }
  }
  return false;
}

double DomainSpec::boundary_distance(cplx z) const {
  switch (kind) {
    case DomainKind::UnitDisk: return std::abs(1.0 - std::abs(z));
    case DomainKind::Sector:
    case DomainKind::SlitPlane: {
      const double phi = opening(*this);
      return std::min(ray_distance(z, phi), ray_distance(z, -phi));
    }
    case DomainKind::SampledJordan: {
      double best = std::numeric_limits<double>::infinity();
      const std::size_t n = boundary.size();
      for (std::size_t i = 0; i < n; ++i) best = std::min(best, segment_distance(z, boundary[i], boundary[(i + 1) % n]));
      return best;
    }
    case DomainKind::PolyBasinOfInfinity: break;
  }
  throw Error(Errc::BackendUnavailable, "no explicit boundary for this domain kind");
}

cplx DomainSpec::nearest_boundary_point(cplx z) const {
  switch (kind) {
    case DomainKind::UnitDisk: return z == cplx(0.0, 0.0) ? cplx(1.0, 0.0) : z / std::abs(z);
    case DomainKind::Sector:
    case DomainKind::SlitPlane: {
      const double phi = opening(*this);
      return ray_distance(z, phi) <= ray_distance(z, -phi) ? ray_nearest(z, phi) : ray_nearest(z, -phi);
    }
    case DomainKind::SampledJordan: {
      double best = std::numeric_limits<double>::infinity();
      cplx nearest = boundary.front();
      const std::size_t n = boundary.size();
      for (std::size_t i = 0; i < n; ++i) {
        const cplx p = segment_closest_point(z, boundary[i], boundary[(i + 1) % n]);
        const double d = std::abs(p - z);
        if (d < best) {
          best = d;
          nearest = p;
        }
      }
      return nearest;
    }
    case DomainKind::PolyBasinOfInfinity: break;
  }
  throw Error(Errc::BackendUnavailable, "no explicit boundary for this domain kind");
}

std::vector<cplx> DomainSpec::boundary_samples(std::size_t per_piece, std::uint64_t seed) const {
  std::vector<cplx> out;
  switch (kind) {
    case DomainKind::UnitDisk:
      for (std::size_t j = 0; j < per_piece; ++j) out.push_back(std::polar(1.0, kTwoPi * j / per_piece));
      break;
    case DomainKind::Sector:
    case DomainKind::SlitPlane: {
      const double phi = opening(*this);
      for (int side : {1, -1}) {
        for (std::size_t j = 0; j < per_piece; ++j) {
          const double s = static_cast<double>(j) / per_piece;
          out.push_back(std::polar(s / (1.0 - s), side * phi));
        }
      }
      break;
    }
    case DomainKind::SampledJordan: {
      const std::size_t n = boundary.size();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < per_piece; ++j) {
          const double s = static_cast<double>(j) / per_piece;
          out.push_back(boundary[i] + s * (boundary[(i + 1) % n] - boundary[i]));
        }
      }
      break;
    }
    case DomainKind::PolyBasinOfInfinity:
      out = boundary_cloud(*map, per_piece, seed);
      break;
  }
  return out;
}

double disk_arc_measure(cplx base, double t0, double t1) {
  if (!(t1 >= t0)) throw Error(Errc::InvalidArgument, "arc must have t1 >= t0");
  if (t1 - t0 >= kTwoPi) return 1.0;
  const double rho = std::abs(base);
  if (!(rho < 1.0)) throw Error(Errc::InvalidArgument, "basepoint must lie inside the unit disk");
  const double theta = rho == 0.0 ? 0.0 : std::arg(base);
  const double k = (1.0 + rho) / (1.0 - rho);
  // Antiderivative of the Poisson kernel on (theta - pi, theta + pi), scaled by 2 pi.
  auto F = [&](double u) { return 2.0 * std::atan(k * std::tan(0.5 * u)); };
  double u0 = std::remainder(t0 - theta, kTwoPi);
  if (u0 >= kPi) u0 -= kTwoPi;
  const double u1 = u0 + (t1 - t0);
  double span;
  if (u1 <= kPi) {
    span = F(u1) - F(u0);
  } else {
    span = (kPi - F(u0)) + (F(u1 - kTwoPi) + kPi);
  }
  return std::clamp(span / kTwoPi, 0.0, 1.0);
}

double riemann_measure(const DomainSpec& dom, const Disk& target) {
  switch (dom.kind) {
    case DomainKind::UnitDisk: return unit_disk_measure(dom, target);
    case DomainKind::Sector:
    case DomainKind::SlitPlane: return sector_measure(dom, target);
    default: break;
  }
  throw Error(Errc::BackendUnavailable, std::string("no closed-form map for ") + domain_kind_name(dom.kind));
}

ExitSample sample_exit_points(const DomainSpec& dom, long n, std::uint64_t seed, Backend backend,
                              const WosOptions& opts) {
  require_sampler(n);
  Backend b = resolve(dom, backend);
  if (b == Backend::Riemann) b = Backend::Wos;
  return b == Backend::Bottcher ? bottcher_exits(dom, n, seed) : wos_exits(dom, n, seed, opts);
}

HarmonicEstimate measure_from_sample(const ExitSample& sample, const Disk& target) {
  const long m = static_cast<long>(sample.points.size());
  if (m == 0) throw Error(Errc::AllCensored, "every walk was censored");
  long hits = 0;
  for (const cplx& p : sample.points) hits += std::abs(p - target.center) < target.radius ? 1 : 0;
  HarmonicEstimate est;
  est.value = static_cast<double>(hits) / m;
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / m);
  est.n_samples = m;
  est.backend = sample.backend;
  est.censored = sample.censored;
  return est;
}

std::vector<HarmonicEstimate> estimate_disk_measures(const DomainSpec& dom, const std::vector<Disk>& targets, long n,
                                                     std::uint64_t seed, Backend backend, const WosOptions& opts) {
  const Backend b = resolve(dom, backend);
  std::vector<HarmonicEstimate> out;
  out.reserve(targets.size());
  if (b == Backend::Riemann) {
    for (const Disk& t : targets) {
      HarmonicEstimate est;
      est.value = riemann_measure(dom, t);
      est.backend = Backend::Riemann;
      out.push_back(est);
    }
    return out;
  }
  require_sampler(n);
  if (b == Backend::Wos && opts.splitting) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      out.push_back(wos_splitting(dom, targets[i], n, splitmix64(seed + i), opts));
    }
    return out;
  }
  const ExitSample sample = sample_exit_points(dom, n, seed, b, opts);
  for (const Disk& t : targets) out.push_back(measure_from_sample(sample, t));
  return out;
}

HarmonicEstimate estimate_disk_measure(const DomainSpec& dom, const Disk& target, long n, std::uint64_t seed,
                                       Backend backend, const WosOptions& opts) {
  return estimate_disk_measures(dom, {target}, n, seed, backend, opts).front();
}

Normalization beurling_normalization(const DomainSpec& dom) {
  constexpr std::size_t kPerPiece = 2048;
  std::vector<cplx> pts = dom.boundary_samples(dom.kind == DomainKind::SampledJordan ? 64 : kPerPiece);
  Mobius m1 = Mobius::identity();
  if (dom.basepoint.is_finite()) {
    m1 = Mobius::inversion(dom.basepoint.z);
    for (cplx& p : pts) p = m1(p);
    // The point at infinity of an unbounded boundary lands on 0.
    if (dom.kind == DomainKind::Sector || dom.kind == DomainKind::SlitPlane) pts.push_back(0.0);
  }
  cplx x1, x2;
  const double R = hull_diameter(pts, &x1, &x2);
  if (!(R > 0.0)) throw Error(Errc::Degenerate, "boundary has zero diameter");
  Normalization out;
  out.diameter_before = R;
  out.map = Mobius::affine(2.0 / R, -(x1 + x2) / R) * m1;
  return out;
}

BeurlingReport beurling_bound_check(const DomainSpec& dom, const std::vector<Disk>& targets, long n, std::uint64_t seed,
                                    Backend backend) {
  const Normalization norm = beurling_normalization(dom);
  const std::vector<HarmonicEstimate> ests = estimate_disk_measures(dom, targets, n, seed, backend);
  BeurlingReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    BeurlingRow row;
    row.target = targets[i];
    row.estimate = ests[i];
    try {
      row.r_normalized = norm.map.image(targets[i]).radius;
    } catch (const Error&) {
      row.r_normalized = std::numeric_limits<double>::infinity();
    }
    row.bound = std::sqrt(2.0 * row.r_normalized);
    row.margin = row.bound - (row.estimate.value - 3.0 * row.estimate.std_error);
    row.pass = row.margin >= 0.0;
    if (!row.pass) ++rep.violations;
    rep.worst_margin = std::min(rep.worst_margin, row.margin);
    rep.rows.push_back(row);
  }
  rep.pass = rep.violations == 0;
  return rep;
}

SlopeFit fit_decay_exponent(const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() != values.size() || radii.size() < 4) {
    throw Error(Errc::InvalidArgument, "need at least 4 radius/value pairs");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1]))) {
      throw Error(Errc::InvalidArgument, "radii must be positive and strictly decreasing");
    }
    if (!(values[i] > 0.0)) throw Error(Errc::NonPositiveValue, "log-log fit needs positive values", static_cast<long>(i));
  }
  const double n = static_cast<double>(radii.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    mx += std::log(radii[i]);
    my += std::log(values[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double dx = std::log(radii[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(values[i]) - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double e = std::log(values[i]) - (fit.intercept + fit.slope * std::log(radii[i]));
    ssr += e * e;
  }
  fit.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  return fit;
}

SeriesReport shrinking_target_series(const DomainSpec& dom, cplx a, double C, double t, int N, long n,
                                     std::uint64_t seed, Backend backend) {
  if (!(t > 0.0 && t < 1.0) || !(C > 0.0) || N < 0) {
    throw Error(Errc::InvalidArgument, "need 0 < t < 1, C > 0 and N >= 0");
  }
  SeriesReport rep;
  std::vector<Disk> targets;
  for (int k = 0; k <= N; ++k) {
    rep.radii.push_back(C * std::pow(t, k));
    targets.emplace_back(a, rep.radii.back());
  }
  rep.terms = estimate_disk_measures(dom, targets, n, seed, backend);
  CompensatedSum sum;
  for (const HarmonicEstimate& e : rep.terms) {
    sum.add(e.value);
    rep.partial_sums.push_back(sum.value());
  }
  rep.tail = rep.partial_sums[N] - rep.partial_sums[N / 2];
  return rep;
}

DomainSpec random_star_domain(std::uint64_t seed, int vertices) {
  Stream rng(seed, 0);
  double amp[4], phase[4];
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    amp[k] = rng.uniform();
    phase[k] = kTwoPi * rng.uniform();
    total += amp[k];
  }
  const double scale = 0.5 / total;
  std::vector<cplx> poly;
  for (int j = 0; j < vertices; ++j) {
    const double th = kTwoPi * j / vertices;
    double rad = 1.0;
    for (int k = 0; k < 4; ++k) rad += scale * amp[k] * std::cos((k + 1) * th + phase[k]);
    poly.push_back(std::polar(rad, th));
  }
  return DomainSpec::jordan(std::move(poly), 0.0);
}

}  // namespace fatou
