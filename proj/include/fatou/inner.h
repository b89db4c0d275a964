#pragma once

#include <cstdint>
#include <vector>

#include "fatou/core.h"
#include "fatou/maps.h"
#include "fatou/orbit.h"

namespace fatou {

struct DenjoyWolff {
  cplx point;
  double derivative_modulus;
};

// A finite Blaschke product with its Denjoy-Wolff data.
struct InnerMap {
  Map g;
  cplx denjoy_wolff;
  double dw_derivative;
};

InnerMap make_inner(const Map& g);

// Disk model of the half-plane translation w -> w + shift (Cayley z = (w - i)/(w + i)).
// Parabolic automorphism with Denjoy-Wolff point 1.
Map half_plane_translation(double shift);

// Interior or boundary attracting fixed point.
DenjoyWolff denjoy_wolff(const Map& g);

enum class CowenType { Elliptic, Hyperbolic, DoublyParabolic, SimplyParabolic };

const char* cowen_name(CowenType t);

struct CowenReport {
  CowenType type = CowenType::Elliptic;
  DenjoyWolff dw{};
  // Hyperbolic distance between consecutive iterates of 0 at the last iteration.
  double last_step = 0.0;
  long iterations = 0;
  double step_threshold = 1e-3;
};

CowenReport cowen_classify(const Map& g, long max_iterations = 10000, double step_threshold = 1e-3);

struct CircleOrbit {
  std::vector<cplx> points;
  // Largest ||g(xi)| - 1| seen before renormalization.
  double max_drift = 0.0;
};

CircleOrbit circle_orbit(const Map& g, cplx xi0, int n);

// Preimages of xi on the unit circle, sorted by argument in [0, 2 pi).
std::vector<cplx> circle_preimages(const Map& g, cplx xi);

// Markov chain choosing preimages with probability proportional to 1/|g'|.
BackwardOrbit backward_sample_circle(const Map& g, cplx xi0, int n, std::uint64_t seed);

enum class CircleMeasure { Lebesgue, LambdaR };

struct InvarianceReport {
  CircleMeasure measure = CircleMeasure::Lebesgue;
  std::vector<double> pushed;    // integral of phi o g
  std::vector<double> original;  // integral of phi
  double max_discrepancy = 0.0;
  double gap = 0.0;
  // Largest change of the Richardson extrapolation against the raw gap value.
  double richardson_shift = 0.0;
};

// Lebesgue: phi_k = 1, cos k t, sin k t for k <= K. LambdaR: K smooth bumps supported
// away from the fixed point 1, with density 1/|w-1|^2 truncated at angle gap.
InvarianceReport invariance_check(const Map& g, CircleMeasure measure, int K, int n_quad, double gap = 1e-3);

struct StolzReport {
  bool pass = true;
  double rho_used = 0.0;
  double rho0 = 0.0;  // distance from xi to the nearest critical value
  cplx image_vertex;  // G_1(xi)
  int samples = 0;
  int violations = 0;
  double first_violation_t = -1.0;
  double worst_angle = 0.0;
};

// Images of the radius {t xi : 1 - rho < t < 1} under the inverse branch selected by
// branch (index into circle_preimages) tested against the Stolz angle at G_1(xi).
StolzReport stolz_containment_check(const Map& g, cplx xi, double rho, double alpha, std::uint64_t branch);

}  // namespace fatou
