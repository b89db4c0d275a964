#include "fatou/rho.h"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

namespace fatou {

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using Tree = bgi::rtree<BPoint, bgi::rstar<16>>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPunctureHit = 1e-14;
constexpr int kExitSamples = 64;

BPoint bp(cplx z) { return BPoint(z.real(), z.imag()); }
cplx from_bp(const BPoint& p) { return {bg::get<0>(p), bg::get<1>(p)}; }

Tree build_tree(const std::vector<cplx>& pts) {
  std::vector<BPoint> v;
  v.reserve(pts.size());
  for (const cplx& z : pts) v.push_back(bp(z));
  return Tree(v.begin(), v.end());
}

double nearest_distance(const Tree& tree, cplx z) {
  std::vector<BPoint> out;
  tree.query(bgi::nearest(bp(z), 1), std::back_inserter(out));
  return out.empty() ? kInf : std::abs(from_bp(out[0]) - z);
}

void check_puncture(const RhoConfig& cfg, cplx z) {
  for (const cplx& v : cfg.punctures())
    if (std::abs(z - v) < kPunctureHit) throw Error(Errc::PunctureHit, "point coincides with a puncture");
}

// Integral of eps^2/|q + t d|^2 |d| dt over [lo, hi].
double inside_integral(cplx q, cplx d, double lo, double hi, double eps) {
  const double dd = std::norm(d);
  const cplx s = q * std::conj(d);
  const double beta = s.real() / dd;
  const double gamma = std::abs(s.imag()) / dd;
  const double x0 = lo + beta, x1 = hi + beta;
  double f;
  if (gamma > 0.0) {
    f = std::atan2(gamma * (x1 - x0), gamma * gamma + x0 * x1) / gamma;
  } else {
    if (x0 * x1 <= 0.0) return kInf;
    f = (x1 - x0) / (x0 * x1);
  }
  return eps * eps / std::sqrt(dd) * f;
}

// Segment avoids every open puncture disk (tangency allowed).
bool visible(const RhoConfig& cfg, cplx a, cplx b) {
  const double lim = cfg.epsilon() * (1.0 - 1e-9);
  for (const cplx& v : cfg.punctures())
    if (segment_distance(v, a, b) < lim) return false;
  return true;
}

// Shortest path from an exterior point U to a circle point E avoiding the
// open disk D(0, eps).
double around_to_circle(cplx U, cplx E, double eps) {
  const double ru = std::abs(U);
  const double a = std::acos(std::min(1.0, eps / ru));
  const double delta = std::abs(std::arg(U * std::conj(E)));
  if (delta <= a) return std::abs(U - E);
  return std::sqrt(std::max(0.0, ru * ru - eps * eps)) + eps * (delta - a);
}

// Shortest path between two exterior points avoiding the open disk D(0, eps).
double around_disk(cplx U, cplx W, double eps) {
  const double ru = std::abs(U), rw = std::abs(W);
  const double au = std::acos(std::min(1.0, eps / ru));
  const double aw = std::acos(std::min(1.0, eps / rw));
  const double delta = std::abs(std::arg(U * std::conj(W)));
  if (delta <= au + aw) return std::abs(U - W);
  return std::sqrt(std::max(0.0, ru * ru - eps * eps)) + std::sqrt(std::max(0.0, rw * rw - eps * eps)) +
         eps * (delta - au - aw);
}

struct Node {
  cplx p;
  int circle;
};

int on_circle(const RhoConfig& cfg, cplx z) {
  for (std::size_t i = 0; i < cfg.punctures().size(); ++i)
    if (std::abs(std::abs(z - cfg.punctures()[i]) - cfg.epsilon()) <= 1e-12 * (cfg.epsilon() + std::abs(z)))
      return static_cast<int>(i);
  return -1;
}

// Geodesic between points outside the open disks: taut string of tangent
// segments and boundary arcs, found on the tangent visibility graph.
double outside_distance(const RhoConfig& cfg, cplx a, cplx b) {
  if (visible(cfg, a, b)) return std::abs(a - b);
  const auto& vs = cfg.punctures();
  const double eps = cfg.epsilon();
  const std::size_t k = vs.size();
  std::vector<Node> nodes{{a, on_circle(cfg, a)}, {b, on_circle(cfg, b)}};
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(2);
  auto add_node = [&](cplx p, int c) {
    nodes.push_back({p, c});
    adj.emplace_back();
    return nodes.size() - 1;
  };
  auto link = [&](std::size_t i, std::size_t j, double w) {
    adj[i].push_back({j, w});
    adj[j].push_back({i, w});
  };
  auto try_link = [&](std::size_t i, std::size_t j) {
    if (visible(cfg, nodes[i].p, nodes[j].p)) link(i, j, std::abs(nodes[i].p - nodes[j].p));
  };
  for (std::size_t end = 0; end < 2; ++end) {
    const cplx p = nodes[end].p;
    for (std::size_t i = 0; i < k; ++i) {
      if (nodes[end].circle == static_cast<int>(i)) continue;
      const double dist = std::abs(p - vs[i]);
      const double alpha = std::acos(eps / dist);
      const double base = std::arg(p - vs[i]);
      for (double sgn : {-1.0, 1.0}) {
        const std::size_t t = add_node(vs[i] + std::polar(eps, base + sgn * alpha), static_cast<int>(i));
        try_link(end, t);
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const cplx u = (vs[j] - vs[i]) / std::abs(vs[j] - vs[i]);
      for (double sgn : {-1.0, 1.0}) {
        const cplx n = sgn * cplx(0.0, 1.0) * u;
        const std::size_t ti = add_node(vs[i] + eps * n, static_cast<int>(i));
        const std::size_t tj = add_node(vs[j] + eps * n, static_cast<int>(j));
        try_link(ti, tj);
      }
      const cplx m = 0.5 * (vs[i] + vs[j]);
      const double alpha = std::acos(eps / std::abs(m - vs[i]));
      const double base = std::arg(m - vs[i]);
      for (double sgn : {-1.0, 1.0}) {
        const cplx t = vs[i] + std::polar(eps, base + sgn * alpha);
        const std::size_t ti = add_node(t, static_cast<int>(i));
        const std::size_t tj = add_node(2.0 * m - t, static_cast<int>(j));
        try_link(ti, tj);
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::pair<double, std::size_t>> on;
    for (std::size_t n = 0; n < nodes.size(); ++n)
      if (nodes[n].circle == static_cast<int>(i)) on.push_back({std::arg(nodes[n].p - vs[i]), n});
    if (on.size() < 2) continue;
    std::sort(on.begin(), on.end());
    for (std::size_t q = 0; q < on.size(); ++q) {
      const auto& [t0, n0] = on[q];
      const auto& [t1, n1] = on[(q + 1) % on.size()];
      double dt = t1 - t0;
      if (q + 1 == on.size()) dt += kTwoPi;
      link(n0, n1, eps * dt);
    }
  }
  std::vector<double> dist(nodes.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[0] = 0.0;
  pq.push({0.0, 0});
  while (!pq.empty()) {
    const auto [d, n] = pq.top();
    pq.pop();
    if (d > dist[n]) continue;
    if (n == 1) break;
    for (const auto& [m, w] : adj[n]) {
      if (d + w < dist[m]) {
        dist[m] = d + w;
        pq.push({dist[m], m});
      }
    }
  }
  return dist[1];
}

// Shortest rho-path from z inside disk i to the circle point e, within the disk.
double inside_to_circle(const RhoConfig& cfg, std::size_t i, cplx z, cplx e) {
  const Mobius m = cfg.chart(i);
  return around_to_circle(m(z), m(e), cfg.epsilon());
}

template <class F>
double minimize_angle(F&& f, int samples) {
  double best = kInf, best_t = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double t = kTwoPi * s / samples;
    const double v = f(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  const double h = kTwoPi / samples;
  const auto r = boost::math::tools::brent_find_minima(f, best_t - h, best_t + h, 40);
  return std::min(best, r.second);
}


std::uint64_t cell_key(long long gx, long long gy) {
  return (static_cast<std::uint64_t>(gx) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(gy);
}

// Largest nearest-neighbour distance in the cloud. A grid of cell h answers
// exactly whenever the neighbour lies within h; the tree handles the rest.
double sampling_gap(const std::vector<cplx>& pts, const Tree& tree, double h) {
  if (pts.size() < 2) return kInf;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  grid.reserve(pts.size());
  auto cell = [&](cplx z) {
    return std::pair<long long, long long>(static_cast<long long>(std::floor(z.real() / h)),
                                           static_cast<long long>(std::floor(z.imag() / h)));
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [gx, gy] = cell(pts[i]);
    grid[cell_key(gx, gy)].push_back(i);
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [gx, gy] = cell(pts[i]);
    double best = kInf;
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(cell_key(gx + dx, gy + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          const double d = std::abs(pts[j] - pts[i]);
          if (j != i && d > 0.0) best = std::min(best, d);
        }
      }
    if (!(best <= h)) {
      std::vector<BPoint> nn;
      tree.query(bgi::nearest(bp(pts[i]), 2), std::back_inserter(nn));
      for (const BPoint& q : nn) {
        const double d = std::abs(from_bp(q) - pts[i]);
        if (d > 0.0) best = std::min(best, d);
      }
    }
    gap = std::max(gap, best);
  }
  return gap;
}

}  // namespace

RhoConfig::RhoConfig(std::vector<cplx> punctures, double epsilon) : punctures_(std::move(punctures)), eps_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(Errc::InvalidArgument, "rho epsilon must be positive");
  for (std::size_t i = 0; i < punctures_.size(); ++i) {
    if (!finite(punctures_[i])) throw Error(Errc::InvalidArgument, "puncture must be finite");
    for (std::size_t j = i + 1; j < punctures_.size(); ++j)
      if (!(std::abs(punctures_[i] - punctures_[j]) > 3.0 * eps_))
        throw Error(Errc::InvalidArgument, "puncture disks must be disjoint with gaps larger than eps");
  }
}

int RhoConfig::disk_index(cplx z) const {
  for (std::size_t i = 0; i < punctures_.size(); ++i)
    if (std::abs(z - punctures_[i]) < eps_) return static_cast<int>(i);
  return -1;
}

double rho_density(const RhoConfig& cfg, cplx z) {
  check_puncture(cfg, z);
  const int i = cfg.disk_index(z);
  if (i < 0) return 1.0;
  const double eps = cfg.epsilon();
  return eps * eps / std::norm(z - cfg.punctures()[static_cast<std::size_t>(i)]);
}

double rho_segment_length(const RhoConfig& cfg, cplx a, cplx b) {
  const cplx d = b - a;
  const double len = std::abs(d);
  if (len == 0.0) return 0.0;
  const double eps = cfg.epsilon();
  double total = len;
  for (const cplx& v : cfg.punctures()) {
    const cplx q = a - v;
    const double A = std::norm(d);
    const double B = 2.0 * (q * std::conj(d)).real();
    const double C = std::norm(q) - eps * eps;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) continue;
    const double sq = std::sqrt(disc);
    const double lo = std::max(0.0, (-B - sq) / (2.0 * A));
    const double hi = std::min(1.0, (-B + sq) / (2.0 * A));
    if (!(lo < hi)) continue;
    total += inside_integral(q, d, lo, hi, eps) - (hi - lo) * len;
  }
  return total;
}

double rho_distance(const RhoConfig& cfg, cplx z, cplx w) {
  check_puncture(cfg, z);
  check_puncture(cfg, w);
  if (z == w) return 0.0;
  // Canonical order makes the value exactly symmetric.
  if (z.real() > w.real() || (z.real() == w.real() && z.imag() > w.imag())) std::swap(z, w);
  const int i = cfg.disk_index(z);
  const int j = cfg.disk_index(w);
  const double eps = cfg.epsilon();
  const auto& vs = cfg.punctures();
  double best = rho_segment_length(cfg, z, w);
  if (i < 0 && j < 0) {
    best = std::min(best, outside_distance(cfg, z, w));
  } else if (i == j) {
    const Mobius m = cfg.chart(static_cast<std::size_t>(i));
    best = std::min(best, around_disk(m(z), m(w), eps));
  } else if (i < 0 || j < 0) {
    const cplx in = i >= 0 ? z : w;
    const cplx out = i >= 0 ? w : z;
    const std::size_t c = static_cast<std::size_t>(std::max(i, j));
    auto f = [&](double t) {
      const cplx e = vs[c] + std::polar(eps, t);
      return inside_to_circle(cfg, c, in, e) + outside_distance(cfg, e, out);
    };
    best = std::min(best, minimize_angle(f, kExitSamples));
  } else {
    const std::size_t ci = static_cast<std::size_t>(i), cj = static_cast<std::size_t>(j);
    auto g = [&](double t1, double t2) {
      const cplx e1 = vs[ci] + std::polar(eps, t1);
      const cplx e2 = vs[cj] + std::polar(eps, t2);
      return inside_to_circle(cfg, ci, z, e1) + outside_distance(cfg, e1, e2) + inside_to_circle(cfg, cj, w, e2);
    };
    // Coarse grid, then coordinate descent with Brent refinement.
    constexpr int kGrid = 32;
    const double h = kTwoPi / kGrid;
    double t1 = 0.0, t2 = 0.0, val = kInf;
    for (int a = 0; a < kGrid; ++a)
      for (int b = 0; b < kGrid; ++b) {
        const double v = g(h * a, h * b);
        if (v < val) {
          val = v;
          t1 = h * a;
          t2 = h * b;
        }
      }
    for (int round = 0; round < 12; ++round) {
      const double prev = val;
      auto f1 = [&](double t) { return g(t, t2); };
      auto r1 = boost::math::tools::brent_find_minima(f1, t1 - h, t1 + h, 40);
      if (r1.second < val) {
        t1 = r1.first;
        val = r1.second;
      }
      auto f2 = [&](double t) { return g(t1, t); };
      auto r2 = boost::math::tools::brent_find_minima(f2, t2 - h, t2 + h, 40);
      if (r2.second < val) {
        t2 = r2.first;
        val = r2.second;
      }
      if (prev - val <= 1e-14 * val) break;
    }
    best = std::min(best, val);
  }
  return best;
}

InclusionReport rho_inclusion_check(const RhoConfig& cfg, cplx x, double r, int rings, int spokes) {
  if (!(r > 0.0)) throw Error(Errc::InvalidArgument, "inclusion radius must be positive");
  for (const cplx& v : cfg.punctures())
    if (std::abs(v - x) < 2.0 * r) throw Error(Errc::HypothesisViolated, "a puncture lies in D(x, 2r)");
  const double bound = 16.0 * r * rho_density(cfg, x);
  InclusionReport rep;
  rep.worst_lower_ratio = kInf;
  for (int k = 1; k <= rings; ++k) {
    const double rad = r * (static_cast<double>(k) / rings) * (1.0 - 1e-9);
    for (int s = 0; s < spokes; ++s) {
      const cplx y = x + std::polar(rad, kTwoPi * (s + 0.5 * k) / spokes);
      const double d = rho_distance(cfg, x, y);
      rep.worst_lower_ratio = std::min(rep.worst_lower_ratio, d / std::abs(y - x));
      rep.worst_upper_ratio = std::max(rep.worst_upper_ratio, d / bound);
      ++rep.samples;
    }
  }
  rep.pass = rep.worst_lower_ratio >= 1.0 - 1e-12 && rep.worst_upper_ratio <= 1.0;
  return rep;
}

std::vector<cplx> separated_subset(const std::vector<cplx>& points, double delta) {
  if (!(delta > 0.0)) throw Error(Errc::InvalidArgument, "separation must be positive");
  std::unordered_map<std::uint64_t, std::vector<cplx>> grid;
  auto key = [](long long gx, long long gy) {
    return (static_cast<std::uint64_t>(gx) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(gy);
  };
  std::vector<cplx> out;
  for (const cplx& p : points) {
    const auto gx = static_cast<long long>(std::floor(p.real() / delta));
    const auto gy = static_cast<long long>(std::floor(p.imag() / delta));
    bool ok = true;
    for (long long dx = -1; dx <= 1 && ok; ++dx)
      for (long long dy = -1; dy <= 1 && ok; ++dy) {
        auto it = grid.find(key(gx + dx, gy + dy));
        if (it == grid.end()) continue;
        for (const cplx& q : it->second)
          if (std::abs(p - q) < delta) {
            ok = false;
            break;
          }
      }
    if (ok) {
      grid[key(gx, gy)].push_back(p);
      out.push_back(p);
    }
  }
  return out;
}

ThinVerdict thin_sv_check(const SingularData& svs, const std::vector<cplx>& boundary, const RhoConfig& cfg,
                          const ThinSVParams& params) {
  if (!(params.mu > 0.0 && params.mu < 1.0)) throw Error(Errc::InvalidArgument, "mu must lie in (0,1)");
  if (!(params.eta > 0.0)) throw Error(Errc::InvalidArgument, "eta must be positive");
  if (params.d < 0 || params.horizon < 1) throw Error(Errc::InvalidArgument, "invalid thin-SV exponent or horizon");
  std::vector<cplx> values = svs.critical_values;
  values.insert(values.end(), svs.asymptotic_values.begin(), svs.asymptotic_values.end());
  ThinVerdict verdict;
  if (values.empty()) return verdict;

  const Tree tree = build_tree(boundary);
  const double finest = std::pow(params.mu, params.horizon);
  const double gap = sampling_gap(boundary, tree, finest);
  verdict.sampling_gap = gap;
  if (gap > finest) throw Error(Errc::ResolutionTooCoarse, "boundary sampling gap exceeds mu^horizon");

  std::vector<cplx> outside;
  std::vector<double> to_boundary;
  for (const cplx& v : values) {
    if (cfg.disk_index(v) >= 0) continue;
    outside.push_back(v);
    to_boundary.push_back(nearest_distance(tree, v));
  }
  for (int n = 1; n <= params.horizon; ++n) {
    ThinLevel lv;
    lv.n = n;
    lv.scale = std::pow(params.mu, n);
    std::vector<cplx> near;
    for (std::size_t k = 0; k < outside.size(); ++k)
      if (to_boundary[k] <= lv.scale) near.push_back(outside[k]);
    const auto sep = separated_subset(near, lv.scale);
    lv.count = static_cast<long>(sep.size());
    lv.bound = std::pow(static_cast<double>(n), params.d);
    lv.pass = static_cast<double>(lv.count) <= lv.bound;
    if (!lv.pass) lv.witnesses.assign(sep.begin(), sep.begin() + static_cast<long>(std::min<std::size_t>(sep.size(), 16)));
    verdict.condition_a = verdict.condition_a && lv.pass;
    verdict.levels.push_back(std::move(lv));
  }
  for (std::size_t i = 0; i < cfg.punctures().size(); ++i) {
    const Mobius m = cfg.chart(i);
    const cplx v = cfg.punctures()[i];
    std::vector<cplx> img_boundary;
    for (const cplx& b : boundary)
      if (std::abs(b - v) < cfg.epsilon() && std::abs(b - v) > 0.0) img_boundary.push_back(m(b));
    ThinPuncture tp;
    tp.index = i;
    tp.distance = kInf;
    if (!img_boundary.empty()) {
      const Tree t = build_tree(img_boundary);
      for (const cplx& s : values)
        if (std::abs(s - v) < cfg.epsilon() && std::abs(s - v) > 0.0) tp.distance = std::min(tp.distance, nearest_distance(t, m(s)));
    }
    tp.pass = tp.distance > params.eta;
    verdict.condition_b = verdict.condition_b && tp.pass;
    verdict.punctures.push_back(tp);
  }
  verdict.pass = verdict.condition_a && verdict.condition_b;
  return verdict;
}

}  // namespace fatou
