#include "fatou/pesin.h"

#include <algorithm>
#include <boost/multiprecision/complex128.hpp>
#include <cmath>
#include <limits>
#include <variant>

#include "fatou/inner.h"
#include "fatou/rng.h"

namespace fatou {

namespace {

using qcplx = boost::multiprecision::complex128;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

qcplx to_q(cplx z) { return qcplx(z.real(), z.imag()); }

double q_abs(const qcplx& z) { return static_cast<double>(abs(z)); }

qcplx q_eval(const Map& f, const qcplx& z) {
  return std::visit(overloaded{
                        [&](const Polynomial& p) {
                          qcplx acc(0.0, 0.0);
                          for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * z + to_q(*it);
                          return acc;
                        },
                        [&](const Blaschke& b) {
                          qcplx acc = to_q(b.rotation);
                          for (const cplx& a : b.zeros) acc *= (z - to_q(a)) / (qcplx(1.0, 0.0) - to_q(std::conj(a)) * z);
                          return acc;
                        },
                        [&](const ExpFamily& e) { return to_q(e.lambda) * exp(z); },
                        [&](const SineFamily& s) { return to_q(s.lambda) * sin(z); },
                        [&](const FatouBaker&) { return z + exp(-z); },
                    },
                    f.family());
}

qcplx q_deriv(const Map& f, const qcplx& z) {
  return std::visit(overloaded{
                        [&](const Polynomial& p) {
                          qcplx acc(0.0, 0.0);
                          for (std::size_t k = p.coeffs.size(); k-- > 1;) {
                            acc = acc * z + to_q(p.coeffs[k]) * qcplx(static_cast<double>(k), 0.0);
                          }
                          return acc;
                        },
                        [&](const Blaschke& b) {
                          qcplx sum(0.0, 0.0);
                          for (const cplx& a : b.zeros) {
                            const qcplx one(1.0, 0.0);
                            sum += qcplx(1.0 - std::norm(a), 0.0) / ((z - to_q(a)) * (one - to_q(std::conj(a)) * z));
                          }
                          return q_eval(f, z) * sum;
                        },
                        [&](const ExpFamily& e) { return to_q(e.lambda) * exp(z); },
                        [&](const SineFamily& s) { return to_q(s.lambda) * cos(z); },
                        [&](const FatouBaker&) { return qcplx(1.0, 0.0) - exp(-z); },
                    },
                    f.family());
}

// Newton in quad precision for f(w) = target from a double-precision start.
qcplx q_preimage(const Map& f, const qcplx& target, cplx start) {
  qcplx w = to_q(start);
  for (int it = 0; it < 4; ++it) w -= (q_eval(f, w) - target) / q_deriv(f, w);
  return w;
}

double set_diameter(const std::vector<cplx>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
  }
  return d;
}

// Images of radial polylines x0 + t_i e^{i theta_j} under the current composite branch.
using Fan = std::vector<std::vector<cplx>>;

Fan initial_fan(cplx x0, const std::vector<double>& nodes, int rays) {
  Fan fan(rays, std::vector<cplx>(nodes.size()));
  for (int j = 0; j < rays; ++j) {
    const cplx u = std::polar(1.0, kTwoPi * j / rays);
    for (std::size_t i = 0; i < nodes.size(); ++i) fan[j][i] = x0 + nodes[i] * u;
  }
  return fan;
}

// One inverse step of the branch through seed; nodes beyond `active` are left untouched.
Fan pull_fan(const Map& f, const Fan& prev, cplx seed, std::size_t active) {
  Fan next = prev;
  for (std::size_t j = 0; j < prev.size(); ++j) {
    next[j][0] = seed;
    for (std::size_t i = 1; i < active; ++i) next[j][i] = f.continue_segment(next[j][i - 1], prev[j][i - 1], prev[j][i]);
  }
  return next;
}

std::vector<cplx> fan_column(const Fan& fan, std::size_t i) {
  std::vector<cplx> out;
  out.reserve(fan.size());
  for (const auto& ray : fan) out.push_back(ray[i]);
  return out;
}

bool continuation_error(const Error& e) {
  return e.code() == Errc::CriticalProximity || e.code() == Errc::StepTooLarge || e.code() == Errc::RootFinding;
}

// Seeds of the single inverse steps making up level k (chain points after points[k-1]).
std::vector<std::vector<cplx>> level_seeds(const BackwardOrbit& orbit) {
  std::vector<std::vector<cplx>> seeds(orbit.depth());
  const bool multi = !orbit.chain.empty();
  for (int k = 0; k < orbit.depth(); ++k) {
    if (multi) {
      for (int i = orbit.chain_index[k] + 1; i <= orbit.chain_index[k + 1]; ++i) seeds[k].push_back(orbit.chain[i]);
    } else {
      seeds[k].push_back(orbit.points[k + 1]);
    }
  }
  return seeds;
}

std::vector<cplx> forward_critical_orbit(const Map& f, int depth) {
  const SingularData& sd = f.singular_data();
  std::vector<cplx> out(sd.asymptotic_values.begin(), sd.asymptotic_values.end());
  const double R = std::isfinite(escape_radius(f)) ? escape_radius(f) : 1e8;
  for (const cplx& c : sd.critical_points) {
    cplx v = c;
    for (int j = 0; j < depth; ++j) {
      v = f(v);
      if (!finite(v) || std::abs(v) > R) break;
      out.push_back(v);
    }
  }
  return out;
}

BranchTower build_tower_impl(const Map& f, const BackwardOrbit& orbit, double eta, double M_in, int rays,
                             int max_halvings) {
  const int N = orbit.depth();
  if (N < 2) throw Error(Errc::InvalidArgument, "tower needs an orbit of depth >= 2");
  if (rays < 8) throw Error(Errc::InvalidArgument, "need at least 8 rays");
  BranchTower t;
  const cplx x0 = orbit.points[0];
  t.eta = eta > 0.0 ? eta : default_eta(f, x0);
  if (!(t.eta > 0.0 && std::isfinite(t.eta))) throw Error(Errc::InvalidArgument, "eta must be positive and finite");

  std::vector<double> logD(N + 1, 0.0);
  for (int k = 1; k <= N; ++k) logD[k] = logD[k - 1] + std::log(std::abs(orbit.step_derivs[k - 1]));
  t.return_times.assign(N + 1, 1);
  if (!orbit.return_times.empty()) {
    for (int k = 1; k <= N; ++k) t.return_times[k] = orbit.return_times[k - 1];
  }
  t.chi_hat = logD[N] / N;
  if (!(t.chi_hat > 0.0)) throw Error(Errc::ScheduleNeverStarts, "orbit derivative does not grow");
  t.M = M_in > 0.0 ? M_in : std::exp(-t.chi_hat / 5.0);
  t.M_lower = std::exp(-t.chi_hat / 4.0);
  if (!(t.M < 1.0)) throw Error(Errc::InvalidArgument, "M must lie below 1");
  const double logM = std::log(t.M);

  int last_violation = 0;
  for (int n = 1; n <= N; ++n) {
    if (!(-0.25 * logD[n] < n * logM)) last_violation = n;
  }
  t.n2 = last_violation + 1;
  if (t.n2 > N / 2) throw Error(Errc::ScheduleNeverStarts, "Lyapunov condition fails beyond N/2", last_violation);

  t.b.resize(N);
  for (int n = 0; n < N; ++n) t.b[n] = 0.5 * std::exp(-0.25 * logD[n + 1]);
  // Geometric tail beyond the sampled depth at the empirical rate.
  const double q = std::exp(-t.chi_hat / 4.0);
  const double bl = t.b[N - 1];
  const double log_tail = bl * q / ((1.0 - q) * (1.0 - bl));
  std::vector<double> log_suffix(N + 1, log_tail);
  for (int n = N - 1; n >= 0; --n) log_suffix[n] = log_suffix[n + 1] - std::log1p(-t.b[n]);
  t.P = std::exp(log_suffix[t.n2]);

  const auto seeds = level_seeds(orbit);
  double r = 0.999 * t.eta / (32.0 * t.P);
  std::vector<Fan> history;
  std::vector<double> nodes;
  std::vector<std::size_t> level_node(N + 1, 0);
  int obstructed_level = -1;
  for (t.halvings = 0;; ++t.halvings) {
    t.level_radii.assign(N + 1, 0.0);
    for (int n = 0; n <= N; ++n) t.level_radii[n] = r * std::exp(log_suffix[std::max(n, t.n2)]);
    nodes.clear();
    for (int i = 0; i <= 8; ++i) nodes.push_back(r * i / 8.0);
    for (int n = t.n2; n <= N; ++n) nodes.push_back(t.level_radii[n]);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (int n = 0; n <= N; ++n) {
      level_node[n] = static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), t.level_radii[n]) - nodes.begin());
    }
    history.assign(1, initial_fan(x0, nodes, rays));
    bool ok = true;
    for (int k = 1; k <= N && ok; ++k) {
      const std::size_t active = level_node[k - 1] + 1;
      try {
        for (const cplx& s : seeds[k - 1]) history.push_back(pull_fan(f, history.back(), s, active));
      } catch (const Error& e) {
        if (!continuation_error(e)) throw;
        ok = false;
        obstructed_level = k;
      }
    }
    if (ok) break;
    if (obstructed_level > t.n2 + 1 || t.halvings >= max_halvings) {
      throw Error(Errc::BranchObstructed, "inverse branch hits a critical value", obstructed_level);
    }
    r *= 0.5;
  }
  t.base = Disk(x0, r);

  t.deriv_at_base.assign(N + 1, 0.0);
  for (int n = 0; n <= N; ++n) t.deriv_at_base[n] = std::exp(-logD[n]);
  t.first_certified = t.n2 + 1;
  t.diam_certs.assign(N + 1, 0.0);
  t.koebe_bounds.assign(N + 1, 0.0);
  t.identity_residuals.assign(N + 1, 0.0);
  t.composition_residuals.assign(N + 1, 0.0);
  std::vector<int> hist_index(N + 1, 0);
  for (int k = 1; k <= N; ++k) hist_index[k] = hist_index[k - 1] + static_cast<int>(seeds[k - 1].size());
  for (int k = t.first_certified; k <= N; ++k) {
    const std::size_t i = level_node[k];
    t.diam_certs[k] = set_diameter(fan_column(history[hist_index[k]], i));
    const double bk = t.b[k - 1];
    t.koebe_bounds[k] = 2.0 * t.level_radii[k - 1] * t.deriv_at_base[k] * (2.0 - bk) / (bk * bk * bk);
    double ident = 0.0, comp = 0.0;
    // Quad precision resolves f^n(F_n(y)) only while |(f^n)'| stays below ~1e24.
    const bool checkable = t.deriv_at_base[k] >= 1e-24;
    for (int j = 0; j < rays && checkable; ++j) {
      const qcplx y = to_q(history[0][j][i]);
      qcplx w = y;
      double drift = 0.0;
      for (int h = 1; h <= hist_index[k]; ++h) {
        const cplx start = history[h][j][i];
        w = q_preimage(f, w, start);
        drift = std::max(drift, q_abs(w - to_q(start)) / (1.0 + std::abs(start)));
      }
      qcplx back = w;
      for (int h = 0; h < hist_index[k]; ++h) back = q_eval(f, back);
      ident = std::max({ident, q_abs(back - y), drift > 1e-9 ? drift : 0.0});
    }
    for (int j = 0; j < rays; ++j) {
      if (f.finite_degree()) {
        // One inverse step at a time, each time taking the preimage nearest the orbit.
        cplx z = history[hist_index[k - 1]][j][i];
        for (const cplx& s : seeds[k - 1]) {
          const auto roots = f.preimages_all(z).roots;
          z = *std::min_element(roots.begin(), roots.end(),
                                [&](cplx a, cplx b) { return std::abs(a - s) < std::abs(b - s); });
        }
        comp = std::max(comp, std::abs(z - history[hist_index[k]][j][i]));
      }
    }
    t.identity_residuals[k] = checkable ? ident : -1.0;
    t.composition_residuals[k] = comp;
  }
  for (int n = 4; n < N; ++n) {
    if (t.return_times[n + 1] > n * n) ++t.return_time_violations;
  }
  return t;
}

std::vector<cplx> exceptional_points(const Map& f) {
  std::vector<cplx> out;
  if (!f.finite_degree()) return out;
  for (const cplx& p : f.fixed_points()) {
    const auto roots = f.preimages_all(p).roots;
    if (std::all_of(roots.begin(), roots.end(), [&](cplx z) { return std::abs(z - p) < 1e-6; })) out.push_back(p);
  }
  return out;
}

}  // namespace

double default_eta(const Map& f, cplx x0, int depth) {
  double d = std::numeric_limits<double>::infinity();
  for (const cplx& v : forward_critical_orbit(f, depth)) d = std::min(d, std::abs(x0 - v));
  return std::isfinite(d) ? 0.5 * d : 1.0;
}

bool BranchTower::certificates_hold() const {
  for (int n = first_certified; n <= depth(); ++n) {
    if (!(diam_certs[n] <= eta * std::pow(M, n))) return false;
  }
  return true;
}

bool BranchTower::koebe_sound() const {
  for (int n = first_certified; n <= depth(); ++n) {
    if (diam_certs[n] > koebe_bounds[n] + 1e-9) return false;
  }
  return true;
}

BranchTower build_branch_tower(const Map& f, const BackwardOrbit& orbit, const TowerOptions& opts) {
  if (orbit.mode == OrbitMode::FirstReturn) throw Error(Errc::InvalidArgument, "use build_return_branch_tower");
  return build_tower_impl(f, orbit, opts.eta, opts.M, opts.rays, opts.max_halvings);
}

ContractionReport verify_contraction(const BranchTower& t, double chi) {
  ContractionReport rep;
  rep.chi = chi;
  rep.levels = t.certified_levels();
  if (rep.levels < 10) throw Error(Errc::InsufficientDepth, "need at least 10 certified levels", rep.levels);
  std::vector<double> xs, ys;
  for (int n = t.first_certified; n <= t.depth(); ++n) {
    xs.push_back(n);
    ys.push_back(std::log(t.deriv_at_base[n]));
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / m;
    my += ys[i] / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  rep.slope_ok = rep.slope <= -0.85 * chi;
  rep.relative_error = std::abs(rep.slope + chi) / std::abs(chi);
  for (int n = 0; n <= t.depth(); ++n) rep.C = std::max(rep.C, t.deriv_at_base[n] * std::exp(0.9 * chi * n));
  return rep;
}

PeriodicPointRecord find_periodic_point(const Map& f, const Disk& target, const PeriodicSearchBudget& budget,
                                        std::uint64_t seed) {
  if (!f.finite_degree()) throw Error(Errc::InvalidArgument, "periodic search needs a finite-degree map");
  if (budget.max_period < 1 || budget.max_orbits < 1 || budget.rays < 8) throw Error(Errc::InvalidArgument, "empty budget");
  const std::vector<cplx> cloud = boundary_cloud(f, static_cast<std::size_t>(budget.cloud), splitmix64(seed ^ 0xC10DULL));
  cplx x0{};
  double best = std::numeric_limits<double>::infinity();
  for (const cplx& z : cloud) {
    const double d = std::abs(z - target.center);
    if (d < target.radius && d < best) {
      best = d;
      x0 = z;
    }
  }
  if (!std::isfinite(best)) throw Error(Errc::HypothesisViolated, "target disk misses the boundary sample");
  const double r = std::min(target.radius, default_eta(f, x0));
  std::vector<double> nodes;
  for (int i = 0; i <= 8; ++i) nodes.push_back(r * i / 8.0);
  const Fan start = initial_fan(x0, nodes, budget.rays);

  // Candidate branches sorted by length; once one is found, later draws only look for
  // shorter ones, so small periods win.
  struct Candidate {
    int m;
    std::vector<cplx> xs;
    double diam;
  };
  std::vector<Candidate> found;
  int limit = budget.max_period;
  int extra = 0;
  for (int a = 0; a < budget.max_orbits && limit >= 1 && (found.empty() || extra < 100); ++a) {
    if (!found.empty()) ++extra;
    Stream rng(seed, static_cast<std::uint64_t>(a));
    Fan fan = start;
    std::vector<cplx> xs{x0};
    try {
      for (int level = 1; level <= limit; ++level) {
        const auto roots = f.preimages_all(xs.back()).roots;
        const cplx pick = roots[rng.below(roots.size())];
        fan = pull_fan(f, fan, pick, nodes.size());
        xs.push_back(pick);
        const double diam = set_diameter(fan_column(fan, nodes.size() - 1));
        if (std::abs(pick - x0) < r / 3.0 && diam < r / 3.0) {
          found.push_back({level, xs, diam});
          limit = level - 1;
          break;
        }
        if (diam > 4.0 * r) break;
      }
    } catch (const Error& e) {
      if (!continuation_error(e)) throw;
    }
  }
  std::sort(found.begin(), found.end(), [](const Candidate& u, const Candidate& v) { return u.m < v.m; });

  for (const Candidate& cand : found) {
    const int m = cand.m;
    const std::vector<cplx>& xs = cand.xs;
    const double diam = cand.diam;
    // F_m maps D(x0, r) into itself; iterate it from x0.
    auto apply_branch = [&](cplx p) {
      std::vector<cplx> path;
      for (int i = 0; i <= 8; ++i) path.push_back(x0 + (p - x0) * (i / 8.0));
      for (int level = 1; level <= m; ++level) {
        std::vector<cplx> next(path.size());
        next[0] = xs[level];
        for (std::size_t i = 1; i < path.size(); ++i) next[i] = f.continue_segment(next[i - 1], path[i - 1], path[i]);
        path = std::move(next);
      }
      return path.back();
    };
    PeriodicPointRecord rec;
    rec.anchor = x0;
    rec.radius = r;
    rec.search_period = m;
    rec.branch_diameter = diam;
    cplx p = x0;
    bool converged = false;
    try {
      for (int it = 1; it <= 500; ++it) {
        const cplx np = apply_branch(p);
        rec.banach_iterations = it;
        const double step = std::abs(np - p);
        p = np;
        if (step < 1e-12) {
          converged = true;
          break;
        }
      }
    } catch (const Error& e) {
      if (!continuation_error(e)) throw;
      continue;
    }
    if (!converged) continue;
    auto iterate = [&](cplx z, int k) {
      for (int j = 0; j < k; ++j) z = f(z);
      return z;
    };
    auto chain_deriv = [&](cplx z, int k) {
      cplx d = 1.0;
      for (int j = 0; j < k; ++j) {
        d *= f.derivative(z);
        z = f(z);
      }
      return d;
    };
    for (int polish = 0; polish < 5; ++polish) {
      const cplx g = iterate(p, m) - p;
      const cplx np = p - g / (chain_deriv(p, m) - 1.0);
      if (!(std::abs(iterate(np, m) - np) < std::abs(g))) break;
      p = np;
    }
    int period = m;
    for (int k = 1; k < m; ++k) {
      if (m % k == 0 && std::abs(iterate(p, k) - p) < 1e-8 * (1.0 + std::abs(p))) {
        period = k;
        break;
      }
    }
    rec.point = p;
    rec.period = period;
    rec.residual = std::abs(iterate(p, period) - p);
    rec.multiplier_modulus = std::abs(chain_deriv(p, period));
    if (rec.residual < 1e-9 && rec.multiplier_modulus > 1.0) return rec;
  }
  throw Error(Errc::BudgetExhausted, "no contracting return branch found within the budget");
}

std::vector<DensityScanEntry> density_scan(const Map& f, const std::vector<Disk>& cover, const PeriodicSearchBudget& budget,
                                           std::uint64_t seed) {
  std::vector<DensityScanEntry> out;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    DensityScanEntry e;
    e.disk = cover[i];
    try {
      e.record = find_periodic_point(f, cover[i], budget, splitmix64(seed + i));
      e.found = true;
    } catch (const Error& err) {
      e.note = std::string(errc_name(err.code())) + ": " + err.what();
    }
    out.push_back(e);
  }
  return out;
}

ReturnPartition circle_partition(const Map& g, int k) {
  if (!g.preserves_unit_circle()) throw Error(Errc::InvalidArgument, "circle partition needs a circle map");
  if (k < 1) throw Error(Errc::InvalidArgument, "need at least one arc");
  ReturnPartition p;
  p.excluded_points = exceptional_points(g);
  for (int j = 0; j < k; ++j) p.cells.push_back(ReturnSet::arc(kTwoPi * j / k, kTwoPi / k));
  return p;
}

ReturnPartition annular_partition(const Map& f, cplx center, double outer, int rings, int sectors, double exclusion) {
  if (rings < 1 || sectors < 1 || !(outer > exclusion && exclusion > 0.0)) {
    throw Error(Errc::InvalidArgument, "need rings, sectors >= 1 and 0 < exclusion < outer");
  }
  ReturnPartition p;
  p.grand_orbit_exclusion_radius = exclusion;
  p.excluded_points = exceptional_points(f);
  for (int i = 0; i < rings; ++i) {
    const double lo = exclusion * std::pow(outer / exclusion, static_cast<double>(i) / rings);
    const double hi = exclusion * std::pow(outer / exclusion, static_cast<double>(i + 1) / rings);
    for (int j = 0; j < sectors; ++j) {
      const ReturnSet cell = ReturnSet::annular_sector(center, lo, hi, kTwoPi * j / sectors, kTwoPi / sectors);
      // The ring distance is a lower bound for the distance to the cell.
      const bool clear = std::all_of(p.excluded_points.begin(), p.excluded_points.end(), [&](cplx q) {
        const double d = std::abs(q - center);
        return std::max({lo - d, d - hi, 0.0}) > exclusion;
      });
      if (clear) p.cells.push_back(cell);
    }
  }
  return p;
}

BackwardOrbit sample_return_orbit(const Map& f, const ReturnSet& cell, cplx x0, int n, std::uint64_t seed, long max_return) {
  if (!f.finite_degree()) throw Error(Errc::InvalidArgument, "return chains need a finite-degree map");
  if (!cell.contains(x0)) throw Error(Errc::InvalidArgument, "start point must lie in the cell");
  const bool transfer = f.preserves_unit_circle() && f.centered();
  const auto& crit = f.singular_data().critical_points;
  BackwardOrbit orb;
  orb.mode = OrbitMode::FirstReturn;
  orb.points.push_back(x0);
  orb.chain.push_back(x0);
  orb.chain_index.push_back(0);
  Stream rng(seed, 0);
  cplx x = x0;
  std::vector<double> w;
  for (int k = 0; k < n; ++k) {
    cplx deriv = 1.0;
    double logw = 0.0;
    long T = 0;
    do {
      std::vector<cplx> pre = transfer ? circle_preimages(f, x) : f.preimages_all(x).roots;
      w.assign(pre.size(), 1.0);
      if (transfer) {
        for (std::size_t j = 0; j < pre.size(); ++j) w[j] = 1.0 / std::abs(f.derivative(pre[j]));
      }
      double total = 0.0;
      for (double v : w) total += v;
      std::size_t pick = pre.size();
      for (int attempt = 0; attempt <= 32; ++attempt) {
        double u = rng.uniform() * total;
        std::size_t j = 0;
        while (j + 1 < pre.size() && u >= w[j]) u -= w[j++];
        if (std::none_of(crit.begin(), crit.end(), [&](cplx c) { return std::abs(c - pre[j]) < 1e-8; })) {
          pick = j;
          break;
        }
      }
      if (pick == pre.size()) throw Error(Errc::CriticalFiberHit, "every draw landed on a critical point", k);
      const cplx next = pre[pick];
      if (!(std::abs(f(next) - x) <= 1e-10 * (1.0 + std::abs(x)))) {
        throw Error(Errc::VerificationFailed, "forward image misses the previous point", k);
      }
      deriv *= f.derivative(next);
      logw += std::log(w[pick] / total);
      x = next;
      orb.chain.push_back(x);
      if (++T > max_return) throw Error(Errc::ReturnTimeBlowup, "return time exceeds the cap", k);
    } while (!cell.contains(x));
    orb.points.push_back(x);
    orb.chain_index.push_back(static_cast<int>(orb.chain.size()) - 1);
    orb.step_derivs.push_back(deriv);
    orb.log_weights.push_back(logw);
    orb.return_times.push_back(static_cast<int>(T));
  }
  return orb;
}

BranchTower build_return_branch_tower(const Map& f, const ReturnPartition& partition, int cell_index,
                                      const BackwardOrbit& orbit, double eps, double M) {
  if (cell_index < 0 || cell_index >= static_cast<int>(partition.cells.size())) {
    throw Error(Errc::InvalidArgument, "cell index out of range");
  }
  if (!(eps > 0.0)) throw Error(Errc::InvalidArgument, "eps must be positive");
  const ReturnSet& cell = partition.cells[cell_index];
  for (const cplx& p : orbit.points) {
    if (!cell.contains(p)) throw Error(Errc::InvalidArgument, "orbit leaves the cell");
  }
  int violations = 0;
  for (int n = 4; n < static_cast<int>(orbit.return_times.size()); ++n) {
    if (orbit.return_times[n] > n * n) ++violations;
  }
  if (violations >= 3) {
    throw Error(Errc::ReturnTimeBlowup,
                "return time above n^2 at " + std::to_string(violations) + " levels", violations);
  }
  // Critical values of f^T along each step must avoid D(x_n, eps M^n).
  if (!orbit.return_times.empty() && f.finite_degree()) {
    const double logD = [&] {
      double s = 0.0;
      for (const cplx& d : orbit.step_derivs) s += std::log(std::abs(d));
      return s;
    }();
    const double Mv = M > 0.0 ? M : std::exp(-logD / orbit.depth() / 5.0);
    const auto& crit = f.singular_data().critical_points;
    for (int n = 0; n < orbit.depth(); ++n) {
      const double rad = eps * std::pow(Mv, n);
      for (const cplx& c : crit) {
        cplx v = c;
        for (int j = 0; j < orbit.return_times[n]; ++j) {
          v = f(v);
          if (!finite(v)) break;
          if (std::abs(v - orbit.points[n]) < rad) {
            throw Error(Errc::BranchObstructed, "critical value of the return map near the orbit", n + 1);
          }
        }
      }
    }
  }
  return build_tower_impl(f, orbit, eps, M, 64, 40);
}

}  // namespace fatou
