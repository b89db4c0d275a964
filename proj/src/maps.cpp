#include "fatou/maps.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fatou/rng.h"

namespace fatou {

namespace {

constexpr double kCriticalDerivative = 1e-8;
constexpr int kNewtonCap = 8;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<cplx> trim(std::vector<cplx> c) {
  double scale = 0.0;
  for (const cplx& x : c) scale = std::max(scale, std::abs(x));
  while (c.size() > 1 && std::abs(c.back()) <= 1e-15 * scale) c.pop_back();
  return c;
}

// Newton polishing on p; a step is kept only if it lowers the residual.
cplx polish(const std::vector<cplx>& p, const std::vector<cplx>& dp, cplx z) {
  double res = std::abs(poly_eval(p, z));
  for (int it = 0; it < 8 && res > 0.0; ++it) {
    const cplx d = poly_eval(dp, z);
    if (d == cplx(0.0, 0.0)) break;
    const cplx zn = z - poly_eval(p, z) / d;
    const double rn = std::abs(poly_eval(p, zn));
    if (!(rn < res)) break;
    z = zn;
    res = rn;
  }
  return z;
}

double poly_scale(const std::vector<cplx>& c, cplx z) {
  double s = 0.0, zk = 1.0;
  for (const cplx& x : c) {
    s += std::abs(x) * zk;
    zk *= std::abs(z);
  }
  return s;
}

}  // namespace

cplx poly_eval(const std::vector<cplx>& c, cplx z) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::vector<cplx> poly_derivative(const std::vector<cplx>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<cplx> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

std::vector<cplx> poly_sub(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  return r;
}

std::vector<cplx> poly_roots(std::vector<cplx> c) {
  c = trim(std::move(c));
  const std::size_t n = c.size() - 1;
  if (n == 0) return {};
  const std::vector<cplx> dc = poly_derivative(c);
  std::vector<cplx> roots;
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
  } else if (n == 2) {
    // Cancellation-free quadratic formula.
    const cplx a = c[2], b = c[1], k = c[0];
    cplx s = std::sqrt(b * b - 4.0 * a * k);
    if ((std::conj(b) * s).real() < 0.0) s = -s;
    const cplx q = -0.5 * (b + s);
    if (q == cplx(0.0, 0.0)) {
      roots = {0.0, 0.0};
    } else {
      roots = {q / a, k / q};
    }
  } else {
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i < n; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < n; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -c[i] / c[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
    if (solver.info() != Eigen::Success) throw Error(Errc::RootFinding, "companion eigenvalue solver failed");
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) roots.push_back(solver.eigenvalues()(i));
  }
  for (cplx& r : roots) r = polish(c, dc, r);
  return roots;
}

Map::Map(Family family) : family_(std::move(family)) {
  auto sd = std::make_shared<SingularData>();
  std::visit(
      overloaded{
          [&](Polynomial& p) {
            p.coeffs = trim(p.coeffs);
            for (const cplx& x : p.coeffs)
              if (!finite(x)) throw Error(Errc::InvalidArgument, "non-finite polynomial coefficient");
            degree_ = static_cast<int>(p.coeffs.size()) - 1;
            if (degree_ < 2) throw Error(Errc::InvalidArgument, "polynomial degree must be at least 2");
            num_ = p.coeffs;
            den_ = {1.0};
          },
          [&](Blaschke& b) {
            if (b.zeros.empty()) throw Error(Errc::InvalidArgument, "Blaschke product needs at least one zero");
            for (const cplx& a : b.zeros)
              if (!(std::abs(a) < 1.0)) throw Error(Errc::InvalidArgument, "Blaschke zeros must lie in the unit disk");
            if (std::abs(std::abs(b.rotation) - 1.0) > 1e-12)
              throw Error(Errc::InvalidArgument, "Blaschke rotation must be unimodular");
            degree_ = static_cast<int>(b.zeros.size());
            num_ = {b.rotation};
            den_ = {1.0};
            for (const cplx& a : b.zeros) {
              num_ = poly_mul(num_, {-a, 1.0});
              den_ = poly_mul(den_, {1.0, -std::conj(a)});
            }
          },
          [&](ExpFamily& e) {
            if (e.lambda == cplx(0.0, 0.0)) throw Error(Errc::InvalidArgument, "exponential family needs lambda != 0");
          },
          [&](SineFamily& s) {
            if (s.lambda == cplx(0.0, 0.0)) throw Error(Errc::InvalidArgument, "sine family needs lambda != 0");
          },
          [&](FatouBaker& fb) {
            if (!(fb.cv_window >= 0.0)) throw Error(Errc::InvalidArgument, "critical value window must be non-negative");
          },
      },
      family_);

  std::visit(overloaded{
                 [&](const Polynomial& p) { sd->critical_points = poly_roots(poly_derivative(p.coeffs)); },
                 [&](const Blaschke&) {
                   if (degree_ >= 2) {
                     const auto crit =
                         poly_sub(poly_mul(poly_derivative(num_), den_), poly_mul(num_, poly_derivative(den_)));
                     sd->critical_points = poly_roots(crit);
                   }
                 },
                 [&](const ExpFamily&) {
                   sd->asymptotic_values = {0.0};
                   sd->punctures = {ExtendedPoint::infinity()};
                 },
                 [&](const SineFamily& s) {
                   sd->critical_values = {s.lambda, -s.lambda};
                   sd->punctures = {ExtendedPoint::infinity()};
                 },
                 [&](const FatouBaker& fb) {
                   const int kmax = static_cast<int>(std::floor(fb.cv_window / kTwoPi + 1e-12));
                   for (int k = -kmax; k <= kmax; ++k) sd->critical_points.push_back(cplx(0.0, kTwoPi * k));
                   sd->punctures = {ExtendedPoint::infinity()};
                 },
             },
             family_);

  if (finite_degree() || std::holds_alternative<FatouBaker>(family_)) {
    for (const cplx& c : sd->critical_points) {
      const double res = std::abs(derivative(c));
      const double scale = finite_degree() ? poly_scale(poly_derivative(num_), c) * poly_scale(den_, c) : 1.0;
      if (finite_degree() && is_blaschke()) {
        // Blaschke critical points are verified on the numerator of g'.
        const auto crit = poly_sub(poly_mul(poly_derivative(num_), den_), poly_mul(num_, poly_derivative(den_)));
        const double r = std::abs(poly_eval(crit, c)) / std::max(poly_scale(crit, c), 1e-300);
        if (r > 1e-10) throw Error(Errc::RootFinding, "critical point residual " + std::to_string(r));
      } else if (res > 1e-10 * std::max(scale, 1.0)) {
        throw Error(Errc::RootFinding, "critical point residual " + std::to_string(res));
      }
      const ExtendedPoint v = evaluate(ExtendedPoint(c));
      if (v.is_finite()) sd->critical_values.push_back(v.z);
    }
  }
  singular_ = sd;
  singular_values_ = sd->critical_values;
  singular_values_.insert(singular_values_.end(), sd->asymptotic_values.begin(), sd->asymptotic_values.end());
}

Map Map::polynomial(std::vector<cplx> coeffs) { return Map(Polynomial{std::move(coeffs)}); }
Map Map::quadratic(cplx c) { return polynomial({c, 0.0, 1.0}); }
Map Map::power(int d) {
  if (d < 2) throw Error(Errc::InvalidArgument, "power map needs d >= 2");
  std::vector<cplx> c(static_cast<std::size_t>(d) + 1, 0.0);
  c.back() = 1.0;
  return polynomial(std::move(c));
}
Map Map::blaschke(std::vector<cplx> zeros, cplx rotation) { return Map(Blaschke{std::move(zeros), rotation}); }
Map Map::exp_family(cplx lambda) { return Map(ExpFamily{lambda}); }
Map Map::sine_family(cplx lambda) { return Map(SineFamily{lambda}); }
Map Map::fatou_baker(double cv_window) { return Map(FatouBaker{cv_window}); }

std::string Map::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Polynomial& p) {
                   os << "polynomial[";
                   for (std::size_t k = 0; k < p.coeffs.size(); ++k) os << (k ? "," : "") << p.coeffs[k];
                   os << "]";
                 },
                 [&](const Blaschke& b) {
                   os << "blaschke[";
                   for (std::size_t k = 0; k < b.zeros.size(); ++k) os << (k ? "," : "") << b.zeros[k];
                   os << "; rotation " << b.rotation << "]";
                 },
                 [&](const ExpFamily& e) { os << "exp[" << e.lambda << "]"; },
                 [&](const SineFamily& s) { os << "sine[" << s.lambda << "]"; },
                 [&](const FatouBaker& fb) { os << "fatou_baker[window " << fb.cv_window << "]"; },
             },
             family_);
  return os.str();
}

cplx Map::eval(cplx z) const {
  return std::visit(overloaded{
                        [&](const Polynomial& p) { return poly_eval(p.coeffs, z); },
                        [&](const Blaschke& b) {
                          cplx acc = b.rotation;
                          for (const cplx& a : b.zeros) acc *= (z - a) / (1.0 - std::conj(a) * z);
                          return acc;
                        },
                        [&](const ExpFamily& e) { return e.lambda * std::exp(z); },
                        [&](const SineFamily& s) { return s.lambda * std::sin(z); },
                        [&](const FatouBaker&) { return z + std::exp(-z); },
                    },
                    family_);
}

ExtendedPoint Map::evaluate(const ExtendedPoint& z) const {
  if (z.infinite) {
    if (const auto* b = std::get_if<Blaschke>(&family_)) {
      cplx acc = b->rotation;
      for (const cplx& a : b->zeros) {
        if (a == cplx(0.0, 0.0)) return ExtendedPoint::infinity();
        acc *= -1.0 / std::conj(a);
      }
      return ExtendedPoint(acc);
    }
    return ExtendedPoint::infinity();
  }
  const cplx w = eval(z.z);
  if (!finite(w)) return ExtendedPoint::infinity();
  return ExtendedPoint(w);
}

cplx Map::derivative(cplx z) const {
  return std::visit(overloaded{
                        [&](const Polynomial& p) {
                          cplx acc = 0.0;
                          for (std::size_t k = p.coeffs.size() - 1; k >= 1; --k)
                            acc = acc * z + static_cast<double>(k) * p.coeffs[k];
                          return acc;
                        },
                        [&](const Blaschke& b) {
                          // Product rule; stays exact at the zeros.
                          const std::size_t n = b.zeros.size();
                          std::vector<cplx> factor(n), dfactor(n);
                          for (std::size_t k = 0; k < n; ++k) {
                            const cplx a = b.zeros[k];
                            const cplx den = 1.0 - std::conj(a) * z;
                            factor[k] = (z - a) / den;
                            dfactor[k] = (1.0 - std::norm(a)) / (den * den);
                          }
                          cplx sum = 0.0;
                          for (std::size_t k = 0; k < n; ++k) {
                            cplx term = dfactor[k];
                            for (std::size_t j = 0; j < n; ++j)
                              if (j != k) term *= factor[j];
                            sum += term;
                          }
                          return b.rotation * sum;
                        },
                        [&](const ExpFamily& e) { return e.lambda * std::exp(z); },
                        [&](const SineFamily& s) { return s.lambda * std::cos(z); },
                        [&](const FatouBaker&) { return 1.0 - std::exp(-z); },
                    },
                    family_);
}

double Map::log_abs_derivative(cplx z) const {
  if (const auto* e = std::get_if<ExpFamily>(&family_)) return std::log(std::abs(e->lambda)) + z.real();
  return std::log(std::abs(derivative(z)));
}

bool Map::preserves_unit_circle() const {
  if (is_blaschke()) return true;
  if (const auto* p = std::get_if<Polynomial>(&family_)) {
    for (std::size_t k = 0; k + 1 < p->coeffs.size(); ++k)
      if (p->coeffs[k] != cplx(0.0, 0.0)) return false;
    return std::abs(std::abs(p->coeffs.back()) - 1.0) < 1e-12;
  }
  return false;
}

bool Map::centered() const {
  if (const auto* b = std::get_if<Blaschke>(&family_)) {
    return std::any_of(b->zeros.begin(), b->zeros.end(), [](cplx a) { return std::abs(a) < 1e-15; });
  }
  return preserves_unit_circle();
}

PreimageSet Map::preimages_all(cplx w) const {
  if (!finite_degree()) throw Error(Errc::InvalidArgument, "preimages_all needs a finite-degree map");
  if (!finite(w)) throw Error(Errc::InvalidArgument, "preimages_all needs a finite value");
  std::vector<cplx> eq = num_;
  if (is_polynomial()) {
    eq[0] -= w;
  } else {
    eq = poly_sub(num_, poly_mul(den_, {w}));
  }
  PreimageSet out;
  out.roots = poly_roots(eq);
  // Newton on f itself for the final digits.
  for (cplx& z : out.roots) {
    double res = std::abs(eval(z) - w);
    for (int it = 0; it < 4 && res > 0.0; ++it) {
      const cplx d = derivative(z);
      if (d == cplx(0.0, 0.0)) break;
      const cplx zn = z - (eval(z) - w) / d;
      const double rn = std::abs(eval(zn) - w);
      if (!(rn < res)) break;
      z = zn;
      res = rn;
    }
    out.max_residual = std::max(out.max_residual, res);
  }
  for (std::size_t i = 0; i < out.roots.size(); ++i)
    for (std::size_t j = i + 1; j < out.roots.size(); ++j)
      if (std::abs(out.roots[i] - out.roots[j]) < 1e-8) out.ill_conditioned = true;
  if (out.max_residual > residual_tolerance(w)) {
    throw Error(Errc::RootFinding, "preimage residual " + std::to_string(out.max_residual));
  }
  return out;
}

double Map::step_bound(cplx w) const {
  double d = std::numeric_limits<double>::infinity();
  for (const cplx& v : singular_values_) d = std::min(d, std::abs(w - v));
  return 0.5 * d;
}

cplx Map::continue_step(cplx z, cplx w, cplx wn) const {
  const cplx dw = wn - w;
  if (dw == cplx(0.0, 0.0)) return z;
  const cplx fp = derivative(z);
  if (std::abs(fp) < kCriticalDerivative) throw Error(Errc::CriticalProximity, "branch point encountered");
  if (std::abs(dw) > step_bound(w) * (1.0 + 1e-12)) throw Error(Errc::StepTooLarge, "path step exceeds the step bound");
  cplx zn = z + dw / fp;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kNewtonCap; ++it) {
    const cplx r = eval(zn) - wn;
    if (std::abs(r) <= 1e-15 * (1.0 + std::abs(wn))) break;
    const cplx d = derivative(zn);
    if (std::abs(d) < kCriticalDerivative) throw Error(Errc::CriticalProximity, "branch point encountered");
    const cplx delta = r / d;
    zn -= delta;
    const double ad = std::abs(delta);
    if (ad <= 1e-15 * (1.0 + std::abs(zn))) break;
    if (ad > 0.5 * prev && ad > 1e-13 * (1.0 + std::abs(zn)))
      throw Error(Errc::StepTooLarge, "Newton corrector is not contracting");
    prev = ad;
  }
  if (!finite(zn) || std::abs(eval(zn) - wn) >= residual_tolerance(wn))
    throw Error(Errc::StepTooLarge, "Newton corrector did not converge in 8 iterations");
  // Koebe growth bound for a branch univalent on D(w, 2|dw|).
  if (std::abs(zn - z) > 4.0 * std::abs(dw) / std::abs(fp) * (1.0 + 1e-9) + 1e-13 * (1.0 + std::abs(z)))
    throw Error(Errc::StepTooLarge, "corrector left the branch neighbourhood");
  return zn;
}

cplx Map::preimage_continue(const std::vector<cplx>& path, cplx seed) const {
  if (path.empty()) throw Error(Errc::InvalidArgument, "empty continuation path");
  if (!(std::abs(eval(seed) - path.front()) < residual_tolerance(path.front())))
    throw Error(Errc::InvalidArgument, "seed is not a preimage of the path start");
  cplx z = seed;
  for (std::size_t k = 1; k < path.size(); ++k) z = continue_step(z, path[k - 1], path[k]);
  return z;
}

cplx Map::continue_segment(cplx seed, cplx from, cplx to) const {
  cplx z = seed, w = from;
  long steps = 0;
  while (w != to) {
    const double remaining = std::abs(to - w);
    double h = std::min(remaining, step_bound(w));
    for (int tries = 0;; ++tries) {
      const cplx wn = h >= remaining ? to : w + (to - w) * (h / remaining);
      try {
        z = continue_step(z, w, wn);
        w = wn;
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::StepTooLarge || tries > 60) throw;
        h *= 0.5;
      }
    }
    if (++steps > 1000000) throw Error(Errc::CriticalProximity, "continuation stalls near a singular value");
  }
  return z;
}

cplx Map::continue_polyline(const std::vector<cplx>& path, cplx seed) const {
  if (path.empty()) throw Error(Errc::InvalidArgument, "empty continuation path");
  if (!(std::abs(eval(seed) - path.front()) < residual_tolerance(path.front())))
    throw Error(Errc::InvalidArgument, "seed is not a preimage of the path start");
  cplx z = seed;
  for (std::size_t k = 1; k < path.size(); ++k) z = continue_segment(z, path[k - 1], path[k]);
  return z;
}

std::vector<cplx> Map::fixed_points() const {
  if (!finite_degree()) throw Error(Errc::InvalidArgument, "fixed_points needs a finite-degree map");
  auto eq = poly_sub(num_, poly_mul(den_, {0.0, 1.0}));
  auto roots = poly_roots(eq);
  for (cplx& z : roots) {
    for (int it = 0; it < 4; ++it) {
      const cplx d = derivative(z) - 1.0;
      if (d == cplx(0.0, 0.0)) break;
      const cplx zn = z - (eval(z) - z) / d;
      if (!(std::abs(eval(zn) - zn) < std::abs(eval(z) - z))) break;
      z = zn;
    }
  }
  return roots;
}

ExtendedPoint evaluate(const Map& f, const ExtendedPoint& z) { return f.evaluate(z); }
cplx derivative(const Map& f, cplx z) { return f.derivative(z); }
const SingularData& singular_data(const Map& f) { return f.singular_data(); }
PreimageSet preimages_all(const Map& f, cplx w) { return f.preimages_all(w); }
cplx preimage_continue(const Map& f, const std::vector<cplx>& path, cplx seed) {
  return f.preimage_continue(path, seed);
}

std::vector<cplx> boundary_cloud(const Map& f, std::size_t n, std::uint64_t seed, int burn_in) {
  if (!f.finite_degree()) throw Error(Errc::InvalidArgument, "boundary_cloud needs a finite-degree map");
  cplx start = 0.0;
  double best = 1.0;
  for (const cplx& p : f.fixed_points()) {
    const double m = std::abs(f.derivative(p));
    if (m > best) {
      best = m;
      start = p;
    }
  }
  if (!(best > 1.0)) throw Error(Errc::RootFinding, "no repelling fixed point found");
  const auto& crit = f.singular_data().critical_points;
  constexpr std::size_t kPerChain = 32;
  std::vector<cplx> cloud;
  cloud.reserve(n);
  for (std::uint64_t chain = 0; cloud.size() < n; ++chain) {
    Stream rng(seed, chain);
    cplx x = start;
    for (int k = 0; k < burn_in + static_cast<int>(kPerChain) && cloud.size() < n; ++k) {
      const PreimageSet pre = f.preimages_all(x);
      cplx next = pre.roots[rng.below(pre.roots.size())];
      for (int retry = 0; retry < 32; ++retry) {
        const bool near = std::any_of(crit.begin(), crit.end(), [&](cplx c) { return std::abs(c - next) < 1e-8; });
        if (!near) break;
        next = pre.roots[rng.below(pre.roots.size())];
      }
      x = next;
      if (k >= burn_in) cloud.push_back(x);
    }
  }
  return cloud;
}

}  // namespace fatou
