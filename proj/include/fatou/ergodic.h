#pragma once

#include <cstdint>
#include <vector>

#include "fatou/core.h"
#include "fatou/maps.h"

namespace fatou {

enum class LyapunovMethod { Quadrature, BirkhoffForward, BirkhoffBackward };

const char* lyapunov_method_name(LyapunovMethod m);

struct LyapunovResult {
  double chi = 0.0;
  LyapunovMethod method = LyapunovMethod::Quadrature;
  long n = 0;
  // Running averages at every n/10 steps (quadrature: at n_quad/8, n_quad/4, ...).
  std::vector<double> running_tail;
  // Last two recorded averages within 1e-3.
  bool converged = false;
  // Set on a negative estimate; the exponent is non-negative in theory.
  bool negative = false;
};

// Periodic trapezoid rule for the mean of log|g'| over the circle.
LyapunovResult lyapunov_quadrature_circle(const Map& g, int n_quad);

enum class Direction { Forward, Backward };

// Forward: (1/n) sum log|f'(f^k x0)|, re-projecting circle maps onto the circle.
// Backward: (1/n) log|(f^n)'(x_n)| along a sampled natural-extension chain.
LyapunovResult birkhoff_average(const Map& f, cplx x0, long n, Direction direction, std::uint64_t seed);

// Radius outside which a polynomial orbit provably escapes.
double escape_radius(const Map& f);

struct EscapeRate {
  double value = 0.0;  // Green's function of the basin of infinity
  int iterations = 0;
  bool converged = false;
};

// lim d^-n log|f^n(z)| for a polynomial, corrected for a non-monic leading term;
// 0 when the orbit stays bounded for max_iterations.
EscapeRate escape_rate(const Map& f, cplx z, double tol = 1e-8, int max_iterations = 2000);

// A circular arc (angles start, start + length), a planar disk, or an annular sector
// {inner <= |z - center| < radius, arg(z - center) in the arc}.
struct ReturnSet {
  enum class Kind { Arc, Disk, AnnularSector };
  Kind kind = Kind::Arc;
  double start = 0.0;
  double length = kTwoPi;
  cplx center{};
  double radius = 0.0;
  double inner = 0.0;

  static ReturnSet arc(double start, double length);
  static ReturnSet disk(cplx center, double radius);
  static ReturnSet annular_sector(cplx center, double inner, double outer, double start, double length);
  bool contains(cplx z) const;
  bool full_circle() const { return kind == Kind::Arc && length >= kTwoPi; }
};

struct ReturnData {
  ReturnSet set;
  std::vector<long> return_times;
  // Sum of log|f'| over the excursion of each uncensored trial.
  std::vector<double> log_derivative_sums;
  long censored = 0;
  // Invariant-measure mass of the set (normalized Lebesgue for arcs).
  double measure_of_set = 0.0;
};

// Circle maps: trials start uniformly in the arc and iterate forward until re-entry.
// Planar sets: return times are read along natural-extension chains, since forward
// iteration leaves a repelling boundary set within a few dozen steps; the set measure
// comes from an independent boundary cloud.
ReturnData first_return(const Map& f, const ReturnSet& set, long n_trials, std::uint64_t seed, long cap = 1000000);

struct KacReport {
  double mean_return = 0.0;
  double product = 0.0;  // mean return times measure
  double sigma = 0.0;    // standard error of the product
  double margin = 0.0;   // 3 sigma - |product - 1|
  bool pass = false;
};

KacReport kac_check(const ReturnData& rd);

struct ReturnLyapunovReport {
  double left = 0.0;   // mean excursion sum of log|f'|
  double right = 0.0;  // chi / measure
  double chi = 0.0;
  double relative_discrepancy = 0.0;
  double left_std_error = 0.0;
};

ReturnLyapunovReport return_lyapunov_identity(const Map& f, const ReturnSet& set, long n_trials, std::uint64_t seed);

// Truncated sector {z : |arg((z - vertex)/direction)| < pi alpha, dist < r}, where dist is
// |z - vertex| for a finite vertex and 1/|z| for a vertex at infinity.
struct GrowthSectorParams {
  double alpha = 0.5;
  double beta = 0.5;
  double A = 1.0;
  double B = 1.0;
  ExtendedPoint vertex;
  cplx direction{1.0, 0.0};
};

struct SectorGrowthReport {
  std::vector<double> radii;
  // Max of max(log|f'|, 0) over each shell between consecutive radii; beta_hat is the
  // slope of log(1 + envelope) against log(1/r).
  std::vector<double> envelope;
  double beta_hat = 0.0;
  double threshold = 0.0;  // 1/(2 alpha)
  bool integrable = false;
  // Fraction of sampled points obeying A e^{B r^beta} <= |f'| <= A e^{B r^-beta}.
  double bound_fraction = 0.0;
};

SectorGrowthReport sector_growth_check(const Map& f, const GrowthSectorParams& params, const std::vector<double>& radii,
                                       int samples_per_shell = 400);

struct DerivativeFloorReport {
  double min_modulus = 0.0;
  long samples = 0;
  bool expanding = false;  // min |f'| > 1
};

// Minimum of |f'| over a grid on the rectangle [x0, x1] x [y0, y1].
DerivativeFloorReport derivative_floor_check(const Map& f, double x0, double x1, double y0, double y1, int nx = 64,
                                             int ny = 256);

}  // namespace fatou
