#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "fatou/core.h"

namespace fatou {

struct Polynomial {
  std::vector<cplx> coeffs;  // ascending powers
};
struct Blaschke {
  std::vector<cplx> zeros;
  cplx rotation{1.0, 0.0};
};
struct ExpFamily {
  cplx lambda;
};
struct SineFamily {
  cplx lambda;
};
// z + exp(-z); critical values 1 + 2 pi i k are kept for |Im| <= cv_window.
struct FatouBaker {
  double cv_window = 8.0 * kPi;
};

using Family = std::variant<Polynomial, Blaschke, ExpFamily, SineFamily, FatouBaker>;

struct SingularData {
  std::vector<cplx> critical_points;
  std::vector<cplx> critical_values;
  std::vector<cplx> asymptotic_values;
  std::vector<ExtendedPoint> punctures;
};

struct PreimageSet {
  std::vector<cplx> roots;
  bool ill_conditioned = false;
  double max_residual = 0.0;
};

class Map {
 public:
  explicit Map(Family family);

  static Map polynomial(std::vector<cplx> coeffs);
  static Map quadratic(cplx c);
  static Map power(int d);
  static Map blaschke(std::vector<cplx> zeros, cplx rotation = 1.0);
  static Map exp_family(cplx lambda);
  static Map sine_family(cplx lambda);
  static Map fatou_baker(double cv_window = 8.0 * kPi);

  const Family& family() const { return family_; }
  std::string describe() const;

  cplx operator()(cplx z) const { return eval(z); }
  cplx eval(cplx z) const;
  // Overflow and poles come back as the infinity marker.
  ExtendedPoint evaluate(const ExtendedPoint& z) const;
  cplx derivative(cplx z) const;
  double log_abs_derivative(cplx z) const;

  // 0 for transcendental families.
  int degree() const { return degree_; }
  bool finite_degree() const { return degree_ > 0; }
  bool is_polynomial() const { return std::holds_alternative<Polynomial>(family_); }
  bool is_blaschke() const { return std::holds_alternative<Blaschke>(family_); }
  // Blaschke products and unimodular monomials map the unit circle to itself.
  bool preserves_unit_circle() const;
  bool centered() const;

  const SingularData& singular_data() const { return *singular_; }

  // All roots of f(z) = w with multiplicity (finite degree only).
  PreimageSet preimages_all(cplx w) const;
  // Continuation of the inverse branch through seed along consecutive path points.
  cplx preimage_continue(const std::vector<cplx>& path, cplx seed) const;
  // Single predictor-corrector step of the branch through z (f(z) = w) to the value wn.
  cplx continue_step(cplx z, cplx w, cplx wn) const;
  // Continuation along the straight segment from -> to, refining on StepTooLarge.
  cplx continue_segment(cplx seed, cplx from, cplx to) const;
  // Continuation along a polyline with adaptive refinement of each segment.
  cplx continue_polyline(const std::vector<cplx>& path, cplx seed) const;
  // Half the distance from w to the nearest finite singular value.
  double step_bound(cplx w) const;
  // Residual tolerance for f(z) = w.
  static double residual_tolerance(cplx w) { return 1e-10 * (1.0 + std::abs(w)); }

  // Fixed points of a finite-degree map.
  std::vector<cplx> fixed_points() const;

  // Numerator/denominator of a finite-degree map (ascending coefficients).
  const std::vector<cplx>& numerator() const { return num_; }
  const std::vector<cplx>& denominator() const { return den_; }

 private:
  Family family_;
  int degree_ = 0;
  std::vector<cplx> num_, den_;
  std::shared_ptr<const SingularData> singular_;
  std::vector<cplx> singular_values_;
};

// Free-function forms of the map operations.
ExtendedPoint evaluate(const Map& f, const ExtendedPoint& z);
cplx derivative(const Map& f, cplx z);
const SingularData& singular_data(const Map& f);
PreimageSet preimages_all(const Map& f, cplx w);
cplx preimage_continue(const Map& f, const std::vector<cplx>& path, cplx seed);

// Polynomial helpers (ascending coefficients).
cplx poly_eval(const std::vector<cplx>& c, cplx z);
std::vector<cplx> poly_derivative(const std::vector<cplx>& c);
std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b);
std::vector<cplx> poly_sub(const std::vector<cplx>& a, const std::vector<cplx>& b);
// Roots by companion-matrix eigenvalues plus Newton polishing.
std::vector<cplx> poly_roots(std::vector<cplx> c);

// Sample cloud of the Julia set of a finite-degree map by random backward
// iteration from a repelling fixed point.
std::vector<cplx> boundary_cloud(const Map& f, std::size_t n, std::uint64_t seed, int burn_in = 24);

}  // namespace fatou
