#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include "fatou/cli.h"
#include "fatou/ergodic.h"
#include "fatou/harmonic.h"
#include "fatou/inner.h"
#include "fatou/orbit.h"
#include "fatou/pesin.h"
#include "fatou/rho.h"
#include "fatou/rng.h"

namespace fatou::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string num(long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

using Row = std::vector<std::string>;

struct Outcome {
  json results = json::object();
  std::vector<Verdict> verdicts;
  std::vector<Row> rows;
};

void verdict(Outcome& out, std::string name, bool pass, std::string detail) {
  out.verdicts.push_back({std::move(name), pass, std::move(detail)});
}

cplx complex_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
json json_of(cplx z) { return json::array({z.real(), z.imag()}); }
// NaN and infinities have no JSON encoding.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::uint64_t substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ tag) + index);
}

// A typical starting point on the invariant boundary set.
cplx boundary_start(const Map& f, std::uint64_t seed) {
  if (f.preserves_unit_circle()) return std::polar(1.0, kTwoPi * Stream(seed, 0).uniform());
  return boundary_cloud(f, 1, seed)[0];
}

double mean_of(const std::vector<double>& v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  CompensatedSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double green_sum(const Map& f) {
  double g = 0.0;
  for (const cplx& c : f.singular_data().critical_points) g += escape_rate(f, c).value;
  return g;
}

double reference_chi(const Map& f, std::uint64_t seed, int chains) {
  if (f.preserves_unit_circle() && f.centered()) return lyapunov_quadrature_circle(f, 4096).chi;
  std::vector<double> chis;
  for (int c = 0; c < chains; ++c) {
    const cplx x0 = boundary_start(f, substream(seed, 0xC41, c));
    chis.push_back(birkhoff_average(f, x0, 10000, Direction::Backward, substream(seed, 0xC42, c)).chi);
  }
  return mean_of(chis);
}

Outcome run_lyapunov(const Scenario& s) {
  const json& p = s.params;
  const Map f = build_map(s.map);
  Outcome out;
  const int chains = p["chains"].get<int>();
  std::vector<std::pair<std::string, double>> means;
  for (const auto& mj : p["methods"]) {
    const std::string method = mj.get<std::string>();
    std::vector<double> chis;
    const int n_chains = method == "quadrature" ? 1 : chains;
    for (int c = 0; c < n_chains; ++c) {
      LyapunovResult r;
      if (method == "quadrature") {
        r = lyapunov_quadrature_circle(f, p["n_quad"].get<int>());
      } else {
        const cplx x0 = p["x0"].is_null() ? boundary_start(f, substream(s.seed, 0x10, c)) : complex_of(p["x0"]);
        const Direction dir = method == "birkhoff_forward" ? Direction::Forward : Direction::Backward;
        r = birkhoff_average(f, x0, p["steps"].get<long>(), dir, substream(s.seed, 0x11, c));
      }
      chis.push_back(r.chi);
      out.rows.push_back({method, num(c), num(r.n), num(r.chi), num(r.converged ? 1 : 0)});
    }
    const double m = mean_of(chis);
    means.emplace_back(method, m);
    out.results["methods"][method] = {{"mean", m}, {"std_error", std_error_of(chis)}, {"chains", n_chains}};
    if (!p["expected"].is_null()) {
      const double e = p["expected"].get<double>();
      const double tol = p["tolerance"].get<double>();
      verdict(out, method + "_matches_expected", std::abs(m - e) <= tol,
              "|" + num(m) + " - " + num(e) + "| <= " + num(tol));
    }
  }
  if (means.size() > 1) {
    double spread = 0.0;
    for (const auto& a : means)
      for (const auto& b : means) spread = std::max(spread, std::abs(a.second - b.second));
    out.results["max_disagreement"] = spread;
    const double tol = p["agreement_tolerance"].get<double>();
    verdict(out, "methods_agree", spread <= tol, num(spread) + " <= " + num(tol));
  }
  if (f.is_polynomial() && f.degree() >= 2) {
    const double g = green_sum(f);
    const double formula = std::log(static_cast<double>(f.degree())) + g;
    out.results["green_sum_at_critical_points"] = g;
    out.results["log_degree_plus_green"] = formula;
    for (const auto& [method, m] : means) {
      if (method != "birkhoff_backward") continue;
      const double rel = std::abs(m - formula) / formula;
      out.results["green_relative_error"] = rel;
      const double tol = p["green_tolerance"].get<double>();
      verdict(out, "green_formula", rel <= tol, "relative error " + num(rel) + " <= " + num(tol));
    }
  }
  return out;
}

DomainSpec make_domain(const Scenario& s, std::uint64_t star_seed) {
  const json& p = s.params;
  const std::string d = p["domain"].get<std::string>();
  const bool has_base = !p["base"].is_null();
  if (d == "unit_disk") return DomainSpec::unit_disk(has_base ? complex_of(p["base"]) : 0.0);
  if (d == "sector") return DomainSpec::sector(p["alpha"].get<double>(), has_base ? complex_of(p["base"]) : 1.0);
  if (d == "slit_plane") return DomainSpec::slit_plane(has_base ? complex_of(p["base"]) : 1.0);
  if (d == "poly_basin") return DomainSpec::poly_basin(build_map(s.map));
  return random_star_domain(star_seed);
}

Backend backend_of(const std::string& b) {
  if (b == "riemann") return Backend::Riemann;
  if (b == "wos") return Backend::Wos;
  if (b == "bottcher") return Backend::Bottcher;
  return Backend::Auto;
}

double closed_form_or_nan(const DomainSpec& dom, const Disk& target) {
  try {
    return riemann_measure(dom, target);
  } catch (const Error&) {
    return kNaN;
  }
}

Outcome run_hmeasure_series(const Scenario& s) {
  const json& p = s.params;
  Outcome out;
  const DomainSpec dom = make_domain(s, s.seed);
  const Backend backend = backend_of(p["backend"].get<std::string>());
  WosOptions opts;
  opts.splitting = p["splitting"].get<bool>();
  const long walks = p["walks"].get<long>();
  const cplx center = complex_of(p["target_center"]);
  std::vector<double> radii = p["radii"].get<std::vector<double>>();
  std::vector<Disk> targets;
  for (double r : radii) targets.emplace_back(center, r);
  std::vector<HarmonicEstimate> est;
  if (opts.splitting) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      est.push_back(estimate_disk_measure(dom, targets[i], walks, substream(s.seed, 0x20, i), backend, opts));
    }
  } else {
    est = estimate_disk_measures(dom, targets, walks, substream(s.seed, 0x20, 0), backend, opts);
  }
  std::vector<double> values;
  double sigmas = 0.0;
  json rows = json::array();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double cf = closed_form_or_nan(dom, targets[i]);
    values.push_back(est[i].value);
    out.rows.push_back({num(radii[i]), num(est[i].value), num(est[i].std_error), num(est[i].censored), num(cf)});
    rows.push_back({{"radius", radii[i]},
                    {"value", est[i].value},
                    {"std_error", est[i].std_error},
                    {"censored", est[i].censored},
                    {"backend", backend_name(est[i].backend)},
                    {"closed_form", finite_or_null(cf)}});
    if (std::isfinite(cf)) {
      const double dev = std::abs(est[i].value - cf);
      sigmas = std::max(sigmas, est[i].std_error > 0.0 ? dev / est[i].std_error : (dev > 1e-12 ? kNaN : 0.0));
    }
  }
  out.results["domain"] = domain_kind_name(dom.kind);
  out.results["rows"] = rows;
  if (radii.size() >= 2) {
    try {
      const SlopeFit fit = fit_decay_exponent(radii, values);
      out.results["slope"] = fit.slope;
      out.results["slope_std_error"] = fit.std_error;
      out.results["intercept"] = fit.intercept;
    } catch (const Error& e) {
      out.results["slope"] = nullptr;
      out.results["slope_error"] = e.what();
    }
  }
  if (!p["expected_slope"].is_null()) {
    const double e = p["expected_slope"].get<double>();
    const double tol = p["slope_tolerance"].get<double>();
    const bool have = out.results.contains("slope") && out.results["slope"].is_number();
    const double slope = have ? out.results["slope"].get<double>() : kNaN;
    verdict(out, "decay_slope", have && std::abs(slope - e) <= tol, num(slope) + " within " + num(tol) + " of " + num(e));
  }
  if (!p["closed_form_sigmas"].is_null()) {
    const double k = p["closed_form_sigmas"].get<double>();
    out.results["max_sigmas_from_closed_form"] = finite_or_null(sigmas);
    verdict(out, "closed_form_agreement", std::isfinite(sigmas) && sigmas <= k, num(sigmas) + " sigma <= " + num(k));
  }
  return out;
}

Outcome run_hmeasure_beurling(const Scenario& s) {
  const json& p = s.params;
  Outcome out;
  const Backend backend = backend_of(p["backend"].get<std::string>());
  const bool stars = p["domain"] == "random_star";
  const int n_domains = stars ? p["domains"].get<int>() : 1;
  const int per_radius = p["targets_per_radius"].get<int>();
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int d = 0; d < n_domains; ++d) {
    const DomainSpec dom = make_domain(s, substream(s.seed, 0x30, d));
    std::vector<Disk> targets;
    for (const auto& r : p["radii"]) {
      for (int k = 0; k < per_radius; ++k) {
        const cplx probe = complex_of(p["target_center"]) + std::polar(3.0, kTwoPi * (k + 0.25) / per_radius);
        targets.emplace_back(dom.nearest_boundary_point(probe), r.get<double>());
      }
    }
    const BeurlingReport rep = beurling_bound_check(dom, targets, p["walks"].get<long>(), substream(s.seed, 0x31, d), backend);
    violations += rep.violations;
    worst = std::min(worst, rep.worst_margin);
    for (const BeurlingRow& row : rep.rows) {
      out.rows.push_back({num(d), num(row.target.radius), num(row.target.center.real()), num(row.target.center.imag()),
                          num(row.r_normalized), num(row.estimate.value), num(row.estimate.std_error), num(row.bound),
                          num(row.margin)});
    }
  }
  out.results["domains"] = n_domains;
  out.results["violations"] = violations;
  out.results["worst_margin"] = finite_or_null(worst);
  verdict(out, "beurling_bound", violations == 0, std::to_string(violations) + " violations");
  return out;
}

Outcome run_backward(const Scenario& s) {
  const json& p = s.params;
  const Map f = build_map(s.map);
  Outcome out;
  const int steps = p["steps"].get<int>();
  const bool circle = p["mode"] == "circle_transfer";
  const cplx x0 = !p["x0"].is_null() ? complex_of(p["x0"])
                  : f.preserves_unit_circle() ? std::polar(1.0, 0.7)
                                              : boundary_cloud(f, 1, substream(s.seed, 0x40, 0))[0];
  const BackwardOrbit o =
      sample_backward_orbit(f, x0, steps, circle ? OrbitMode::CircleTransfer : OrbitMode::PlaneEqualWeight, s.seed);
  const double residual = chain_residual(f, o);
  for (int k = 0; k <= o.depth(); ++k) {
    const double ld = k == 0 ? kNaN : std::log(std::abs(o.step_derivs[k - 1]));
    out.rows.push_back({num(k), num(o.points[k].real()), num(o.points[k].imag()), num(ld)});
  }
  out.results["mode"] = orbit_mode_name(o.mode);
  out.results["depth"] = o.depth();
  out.results["chain_residual"] = residual;
  verdict(out, "chain_residual", residual < 1e-10, num(residual) + " < 1e-10");
  if (f.preserves_unit_circle() && f.centered()) {
    const ReturnSet arc = ReturnSet::arc(p["arc_start"].get<double>(), p["arc_length"].get<double>());
    long visits = 0;
    for (int k = 1; k <= o.depth(); ++k) visits += arc.contains(o.points[k]) ? 1 : 0;
    const double expected = steps * arc.length / kTwoPi;
    const double factor = p["visit_factor"].get<double>();
    out.results["visits"] = visits;
    out.results["expected_visits"] = expected;
    verdict(out, "arc_recurrence", visits >= expected / factor && visits <= expected * factor,
            std::to_string(visits) + " visits, expected " + num(expected));
  }
  return out;
}

Outcome run_tower(const Scenario& s) {
  const json& p = s.params;
  const Map f = build_map(s.map);
  Outcome out;
  const int n_towers = p["towers"].get<int>();
  const int depth = p["depth"].get<int>();
  const double chi = p["chi"].is_null() ? reference_chi(f, s.seed, p["chi_chains"].get<int>()) : p["chi"].get<double>();
  TowerOptions opts;
  opts.eta = p["eta"].get<double>();
  opts.M = p["M"].get<double>();
  opts.rays = p["rays"].get<int>();
  const OrbitMode mode = f.preserves_unit_circle() && f.centered() ? OrbitMode::CircleTransfer : OrbitMode::PlaneEqualWeight;
  const double id_tol = p["identity_tolerance"].get<double>();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long pooled = 0, skipped = 0;
  double worst_identity = 0.0;
  int built = 0, cert_ok = 0, koebe_ok = 0;
  json towers = json::array();
  for (int i = 0; i < n_towers; ++i) {
    const cplx x0 = boundary_start(f, substream(s.seed, 0x50, i));
    json summary{{"index", i}, {"x0", json_of(x0)}};
    try {
      const BackwardOrbit o = sample_backward_orbit(f, x0, depth, mode, substream(s.seed, 0x51, i));
      const BranchTower t = build_branch_tower(f, o, opts);
      ++built;
      cert_ok += t.certificates_hold() ? 1 : 0;
      koebe_ok += t.koebe_sound() ? 1 : 0;
      for (int n = 0; n <= t.depth(); ++n) {
        const bool certified = n >= t.first_certified;
        if (certified) {
          const double y = std::log(t.deriv_at_base[n]);
          sx += n;
          sy += y;
          sxx += static_cast<double>(n) * n;
          sxy += n * y;
          ++pooled;
          if (t.identity_residuals[n] < 0.0) {
            ++skipped;
          } else {
            worst_identity = std::max(worst_identity, t.identity_residuals[n]);
          }
        }
        out.rows.push_back({num(i), num(n), num(certified ? 1 : 0), num(t.deriv_at_base[n]), num(t.diam_certs[n]),
                            num(t.eta * std::pow(t.M, n)), num(t.koebe_bounds[n]), num(t.identity_residuals[n]),
                            num(t.composition_residuals[n])});
      }
      summary["eta"] = t.eta;
      summary["M"] = t.M;
      summary["M_lower"] = t.M_lower;
      summary["n2"] = t.n2;
      summary["P"] = t.P;
      summary["base_radius"] = t.base.radius;
      summary["halvings"] = t.halvings;
      summary["certificates_hold"] = t.certificates_hold();
      summary["koebe_sound"] = t.koebe_sound();
      if (t.certified_levels() >= 10) summary["slope"] = verify_contraction(t, chi).slope;
    } catch (const Error& e) {
      summary["error"] = errc_name(e.code());
      summary["error_detail"] = e.what();
      summary["error_level"] = e.index();
    }
    towers.push_back(summary);
  }
  const double denom = pooled * sxx - sx * sx;
  const double slope = pooled >= 2 && denom > 0.0 ? (pooled * sxy - sx * sy) / denom : kNaN;
  const double rel = std::abs(slope + chi) / chi;
  out.results["chi"] = chi;
  out.results["pooled_slope"] = finite_or_null(slope);
  out.results["slope_relative_error"] = finite_or_null(rel);
  out.results["towers_built"] = built;
  out.results["identity_worst"] = worst_identity;
  out.results["identity_levels_beyond_resolution"] = skipped;
  out.results["towers"] = towers;
  const double tol = p["slope_tolerance"].get<double>();
  verdict(out, "towers_built", built == n_towers, std::to_string(built) + "/" + std::to_string(n_towers));
  verdict(out, "contraction_slope", std::isfinite(rel) && rel <= tol, "relative error " + num(rel) + " <= " + num(tol));
  verdict(out, "diameter_certificates", cert_ok == built, std::to_string(cert_ok) + "/" + std::to_string(built));
  verdict(out, "koebe_soundness", koebe_ok == built, std::to_string(koebe_ok) + "/" + std::to_string(built));
  verdict(out, "branch_identity", worst_identity < id_tol, num(worst_identity) + " < " + num(id_tol));
  return out;
}

std::vector<Disk> ring_cover(const Map& f, const json& p, std::uint64_t seed) {
  const std::vector<cplx> cloud = boundary_cloud(f, p["cloud"].get<std::size_t>(), seed);
  cplx center = 0.0;
  if (!p["cover_center"].is_null()) {
    center = complex_of(p["cover_center"]);
  } else {
    bool attracting = false;
    for (const cplx& z : f.fixed_points()) {
      if (std::abs(f.derivative(z)) < 1.0) {
        center = z;
        attracting = true;
        break;
      }
    }
    if (!attracting) {
      for (const cplx& z : cloud) center += z / static_cast<double>(cloud.size());
    }
  }
  const int count = p["count"].get<int>();
  std::vector<Disk> cover;
  for (int k = 0; k < count; ++k) {
    const double theta = kTwoPi * k / count;
    cplx best = cloud.front();
    double best_gap = 10.0;
    for (const cplx& z : cloud) {
      const double gap = std::abs(std::remainder(std::arg(z - center) - theta, kTwoPi));
      if (gap < best_gap) {
        best_gap = gap;
        best = z;
      }
    }
    cover.emplace_back(best, p["radius"].get<double>());
  }
  return cover;
}

Outcome run_periodic(const Scenario& s) {
  const json& p = s.params;
  const Map f = build_map(s.map);
  Outcome out;
  std::vector<Disk> cover;
  if (p["cover"] == "explicit") {
    for (const auto& d : p["disks"]) cover.emplace_back(complex_of(d["center"]), d["radius"].get<double>());
  } else {
    cover = ring_cover(f, p, substream(s.seed, 0x60, 0));
  }
  PeriodicSearchBudget budget;
  budget.max_orbits = p["max_orbits"].get<int>();
  budget.max_period = p["max_period"].get<int>();
  budget.cloud = p["cloud"].get<int>();
  const std::vector<DensityScanEntry> scan = density_scan(f, cover, budget, s.seed);
  int found = 0, valid = 0;
  json entries = json::array();
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const DensityScanEntry& e = scan[i];
    json entry{{"center", json_of(e.disk.center)}, {"radius", e.disk.radius}, {"found", e.found}, {"note", e.note}};
    if (e.found) {
      ++found;
      // Direct forward iteration, independent of the branch construction.
      cplx z = e.record.point;
      cplx deriv = 1.0;
      for (int k = 0; k < e.record.period; ++k) {
        deriv *= f.derivative(z);
        z = f(z);
      }
      const double direct = std::abs(z - e.record.point);
      const bool ok = direct < 1e-9 && std::abs(deriv) > 1.0 && e.disk.contains(e.record.point);
      valid += ok ? 1 : 0;
      entry["point"] = json_of(e.record.point);
      entry["period"] = e.record.period;
      entry["residual"] = e.record.residual;
      entry["direct_residual"] = direct;
      entry["multiplier_modulus"] = e.record.multiplier_modulus;
      entry["banach_iterations"] = e.record.banach_iterations;
      entry["search_period"] = e.record.search_period;
    }
    out.rows.push_back({num(i), num(e.disk.center.real()), num(e.disk.center.imag()), num(e.disk.radius),
                        num(e.found ? 1 : 0), num(e.found ? e.record.period : 0),
                        num(e.found ? e.record.point.real() : kNaN), num(e.found ? e.record.point.imag() : kNaN),
                        num(e.found ? e.record.residual : kNaN), num(e.found ? e.record.multiplier_modulus : kNaN)});
    entries.push_back(entry);
  }
  const int min_found = p["min_found"].is_null() ? static_cast<int>(cover.size()) : p["min_found"].get<int>();
  out.results["disks"] = entries;
  out.results["found"] = found;
  out.results["valid"] = valid;
  verdict(out, "disks_with_records", found >= min_found,
          std::to_string(found) + "/" + std::to_string(cover.size()) + " >= " + std::to_string(min_found));
  verdict(out, "records_verified", valid == found, std::to_string(valid) + "/" + std::to_string(found));
  return out;
}

Outcome run_return_map(const Scenario& s) {
  const json& p = s.params;
  const Map f = build_map(s.map);
  Outcome out;
  const ReturnSet set = p["set"] == "arc" ? ReturnSet::arc(p["arc_start"].get<double>(), p["arc_length"].get<double>())
                                          : ReturnSet::disk(complex_of(p["center"]), p["radius"].get<double>());
  const long trials = p["trials"].get<long>();
  const ReturnData rd = first_return(f, set, trials, s.seed, p["cap"].get<long>());
  for (std::size_t i = 0; i < rd.return_times.size(); ++i) {
    out.rows.push_back({num(static_cast<long>(i)), num(rd.return_times[i]), num(rd.log_derivative_sums[i])});
  }
  const KacReport kac = kac_check(rd);
  const ReturnLyapunovReport id = return_lyapunov_identity(f, set, trials, s.seed);
  out.results["measure_of_set"] = rd.measure_of_set;
  out.results["censored"] = rd.censored;
  out.results["kac"] = {{"mean_return", kac.mean_return}, {"product", kac.product}, {"sigma", kac.sigma}, {"pass_3sigma", kac.pass}};
  out.results["identity"] = {{"left", id.left},   {"right", id.right}, {"chi", id.chi},
                             {"relative_discrepancy", id.relative_discrepancy}, {"left_std_error", id.left_std_error}};
  const double ktol = p["kac_tolerance"].get<double>();
  const double itol = p["identity_tolerance"].get<double>();
  verdict(out, "kac_product", std::abs(kac.product - 1.0) <= ktol, num(kac.product) + " within " + num(ktol) + " of 1");
  verdict(out, "kac_3sigma", kac.pass, "margin " + num(kac.margin));
  verdict(out, "return_lyapunov_identity", id.relative_discrepancy <= itol,
          num(id.relative_discrepancy) + " <= " + num(itol));
  return out;
}

RhoConfig random_config(Stream& rng) {
  for (;;) {
    const int k = 1 + static_cast<int>(rng.below(3));
    const double eps = rng.uniform(0.1, 0.6);
    std::vector<cplx> v;
    for (int i = 0; i < k; ++i) v.push_back(cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)));
    try {
      return RhoConfig(v, eps);
    } catch (const Error&) {
    }
  }
}

Outcome run_rho_check(const Scenario& s) {
  const json& p = s.params;
  Outcome out;
  if (p["check"] == "inclusion") {
    const int configs = p["configs"].get<int>();
    int violations = 0;
    double worst_lower = std::numeric_limits<double>::infinity(), worst_upper = 0.0;
    for (int c = 0; c < configs; ++c) {
      Stream rng(s.seed, static_cast<std::uint64_t>(c));
      const RhoConfig cfg = random_config(rng);
      // Half the centers inside puncture disks.
      cplx x;
      if (rng.uniform() < 0.5) {
        const cplx v = cfg.punctures()[rng.below(cfg.punctures().size())];
        x = v + std::polar(cfg.epsilon() * rng.uniform(0.05, 0.99), rng.uniform(0.0, kTwoPi));
      } else {
        x = cplx(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
      }
      double dmin = std::numeric_limits<double>::infinity();
      for (const cplx& v : cfg.punctures()) dmin = std::min(dmin, std::abs(x - v));
      const double r = 0.5 * dmin * rng.uniform(0.05, 0.999);
      const InclusionReport rep = rho_inclusion_check(cfg, x, r, p["rings"].get<int>(), p["spokes"].get<int>());
      violations += rep.pass ? 0 : 1;
      worst_lower = std::min(worst_lower, rep.worst_lower_ratio);
      worst_upper = std::max(worst_upper, rep.worst_upper_ratio);
      out.rows.push_back({num(c), num(cfg.punctures().size()), num(cfg.epsilon()), num(x.real()), num(x.imag()), num(r),
                          num(rep.worst_lower_ratio), num(rep.worst_upper_ratio), num(rep.pass ? 1 : 0)});
    }
    out.results["configs"] = configs;
    out.results["violations"] = violations;
    out.results["worst_lower_ratio"] = worst_lower;
    out.results["worst_upper_ratio"] = worst_upper;
    verdict(out, "rho_inclusions", violations == 0, std::to_string(violations) + " violations");
    return out;
  }
  const Map f = build_map(s.map);
  std::vector<cplx> punctures;
  for (const auto& v : p["punctures"]) punctures.push_back(complex_of(v));
  const RhoConfig cfg(punctures, p["epsilon"].get<double>());
  const std::vector<cplx> cloud = boundary_cloud(f, p["cloud"].get<std::size_t>(), s.seed);
  const ThinSVParams tp{p["mu"].get<double>(), p["d"].get<int>(), p["eta"].get<double>(), p["horizon"].get<int>()};
  const ThinVerdict v = thin_sv_check(f.singular_data(), cloud, cfg, tp);
  for (const ThinLevel& l : v.levels) {
    out.rows.push_back({num(l.n), num(l.scale), num(l.count), num(l.bound), num(l.pass ? 1 : 0)});
  }
  out.results["pass"] = v.pass;
  out.results["condition_a"] = v.condition_a;
  out.results["condition_b"] = v.condition_b;
  out.results["sampling_gap"] = v.sampling_gap;
  verdict(out, "thin_singular_values", v.pass, v.condition_a ? "puncture condition" : "count condition");
  return out;
}

Outcome run_inner(const Scenario& s) {
  const json& p = s.params;
  const Map g = build_map(s.map);
  Outcome out;
  const std::string check = p["check"].get<std::string>();
  if (check == "denjoy_wolff") {
    const DenjoyWolff dw = denjoy_wolff(g);
    out.results["denjoy_wolff"] = json_of(dw.point);
    out.results["derivative_modulus"] = dw.derivative_modulus;
    double last_step = kNaN;
    try {
      const CowenReport c = cowen_classify(g);
      out.results["cowen_type"] = cowen_name(c.type);
      last_step = c.last_step;
    } catch (const Error& e) {
      out.results["cowen_type"] = nullptr;
      out.results["cowen_error"] = errc_name(e.code());
    }
    out.rows.push_back({num(dw.point.real()), num(dw.point.imag()), num(dw.derivative_modulus), num(last_step)});
    verdict(out, "closed_disk", std::abs(dw.point) <= 1.0 + 1e-9, "|p| = " + num(std::abs(dw.point)));
  } else if (check == "stolz") {
    int violations = 0;
    for (const auto& a : p["alphas"]) {
      for (const auto& b : p["branches"]) {
        const StolzReport r = stolz_containment_check(g, complex_of(p["xi"]), p["rho"].get<double>(), a.get<double>(),
                                                      b.get<std::uint64_t>());
        violations += r.violations;
        out.rows.push_back({num(a.get<double>()), num(b.get<long>()), num(r.samples), num(r.violations),
                            num(r.worst_angle), num(r.rho_used)});
      }
    }
    out.results["violations"] = violations;
    verdict(out, "stolz_containment", violations == 0, std::to_string(violations) + " violations");
  } else {
    const CircleMeasure m = p["measure"] == "lambda_r" ? CircleMeasure::LambdaR : CircleMeasure::Lebesgue;
    const InvarianceReport r = invariance_check(g, m, p["K"].get<int>(), p["n_quad"].get<int>(), p["gap"].get<double>());
    for (std::size_t k = 0; k < r.pushed.size(); ++k) {
      out.rows.push_back({num(static_cast<long>(k)), num(r.pushed[k]), num(r.original[k]),
                          num(std::abs(r.pushed[k] - r.original[k]))});
    }
    out.results["max_discrepancy"] = r.max_discrepancy;
    out.results["richardson_shift"] = r.richardson_shift;
    const double tol = p["invariance_tolerance"].get<double>();
    verdict(out, "invariance", r.max_discrepancy < tol, num(r.max_discrepancy) + " < " + num(tol));
  }
  return out;
}

Outcome dispatch(const Scenario& s) {
  switch (s.experiment) {
    case Experiment::Lyapunov: return run_lyapunov(s);
    case Experiment::Hmeasure: return s.params["mode"] == "beurling" ? run_hmeasure_beurling(s) : run_hmeasure_series(s);
    case Experiment::Backward: return run_backward(s);
    case Experiment::Tower: return run_tower(s);
    case Experiment::Periodic: return run_periodic(s);
    case Experiment::ReturnMap: return run_return_map(s);
    case Experiment::RhoCheck: return run_rho_check(s);
    case Experiment::Inner: return run_inner(s);
  }
  throw Error(Errc::InvalidArgument, "unknown experiment");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

}  // namespace

std::vector<std::string> csv_columns(Experiment e, const json& params) {
  switch (e) {
    case Experiment::Lyapunov: return {"method", "chain", "n", "chi", "converged"};
    case Experiment::Hmeasure:
      if (params.value("mode", "series") == "beurling") {
        return {"domain", "radius", "target_re", "target_im", "r_normalized", "value", "std_error", "bound", "margin"};
      }
      return {"radius", "value", "std_error", "censored", "closed_form"};
    case Experiment::Backward: return {"k", "re", "im", "log_abs_step_derivative"};
    case Experiment::Tower:
      return {"tower", "level", "certified", "deriv_at_base", "diam_cert", "certificate_bound", "koebe_bound",
              "identity_residual", "composition_residual"};
    case Experiment::Periodic:
      return {"disk", "center_re", "center_im", "radius", "found", "period", "point_re", "point_im", "residual",
              "multiplier_modulus"};
    case Experiment::ReturnMap: return {"trial", "return_time", "log_derivative_sum"};
    case Experiment::RhoCheck:
      if (params.value("check", "inclusion") == "thin") return {"level", "scale", "count", "bound", "pass"};
      return {"config", "punctures", "epsilon", "x_re", "x_im", "r", "worst_lower_ratio", "worst_upper_ratio", "pass"};
    case Experiment::Inner: {
      const std::string check = params.value("check", "denjoy_wolff");
      if (check == "stolz") return {"alpha", "branch", "samples", "violations", "worst_angle", "rho_used"};
      if (check == "invariance") return {"index", "pushed", "original", "discrepancy"};
      return {"point_re", "point_im", "derivative_modulus", "cowen_last_step"};
    }
  }
  return {};
}

RunReport run_scenario(const Scenario& s) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.scenario_digest = scenario_digest(s);
  Outcome out;
  try {
    out = dispatch(s);
  } catch (const Error& e) {
    if (e.code() == Errc::SchemaError) throw;
    throw Error(e.code(),
                std::string("experiment ") + experiment_name(s.experiment) + " (scenario " +
                    report.scenario_digest.substr(0, 12) + "): " + e.detail(),
                e.index());
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.verdicts = out.verdicts;
  report.results = out.results;

  const char* env = std::getenv("FATOULAB_OUTPUT_DIR");
  const std::filesystem::path dir = env && *env ? std::filesystem::path(env) : std::filesystem::path(s.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());

  std::string csv;
  const std::vector<std::string> cols = csv_columns(s.experiment, s.params);
  for (std::size_t i = 0; i < cols.size(); ++i) csv += (i ? "," : "") + cols[i];
  csv += "\n";
  for (const Row& row : out.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + row[i];
    csv += "\n";
  }
  const std::filesystem::path csv_path = dir / "samples.csv";
  const std::filesystem::path json_path = dir / "results.json";
  write_file(csv_path, csv);
  report.artifacts = {json_path.string(), csv_path.string()};

  json verdicts = json::array();
  for (const Verdict& v : report.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  json scenario = json::parse(serialize_scenario(s));
  scenario["output_dir"] = s.output_dir;
  const json doc{{"scenario_digest", report.scenario_digest},
                 {"experiment", experiment_name(s.experiment)},
                 {"scenario", scenario},
                 {"results", report.results},
                 {"verdicts", verdicts},
                 {"all_pass", report.all_pass()},
                 {"wall_time", report.wall_time},
                 {"artifacts", report.artifacts}};
  write_file(json_path, doc.dump(2) + "\n");
  return report;
}

}  // namespace fatou::cli
