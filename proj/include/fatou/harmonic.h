#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fatou/core.h"
#include "fatou/geometry.h"
#include "fatou/maps.h"

namespace fatou {

enum class DomainKind { UnitDisk, Sector, SlitPlane, PolyBasinOfInfinity, SampledJordan };

const char* domain_kind_name(DomainKind kind);

// A planar domain with a basepoint for harmonic measure.
// Sector: {|arg z| < pi*alpha}, vertex 0, opening about the positive real axis.
// SlitPlane: C minus (-inf, 0]. PolyBasinOfInfinity: basepoint infinity.
// SampledJordan: interior of a closed polygon (last vertex joins the first).
struct DomainSpec {
  DomainKind kind = DomainKind::UnitDisk;
  double alpha = 0.5;
  std::optional<Map> map;
  std::vector<cplx> boundary;
  ExtendedPoint basepoint;

  static DomainSpec unit_disk(cplx base = 0.0);
  static DomainSpec sector(double alpha, cplx base = 1.0);
  static DomainSpec slit_plane(cplx base = 1.0);
  static DomainSpec poly_basin(Map f);
  static DomainSpec jordan(std::vector<cplx> boundary, cplx base);

  bool contains(cplx z) const;
  // Euclidean distance to the boundary (finite kinds only).
  double boundary_distance(cplx z) const;
  cplx nearest_boundary_point(cplx z) const;
  // Finite points of the boundary, dense enough for diameter estimates.
  std::vector<cplx> boundary_samples(std::size_t per_piece, std::uint64_t seed = 0) const;
};

enum class Backend { Auto, Riemann, Wos, Bottcher };

const char* backend_name(Backend b);

struct HarmonicEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  Backend backend = Backend::Riemann;
  long censored = 0;
};

struct WosOptions {
  double shell = 1e-6;
  long step_cap = 100000;
  // Fixed-effort multilevel splitting on circles around the target center.
  bool splitting = false;
  double level_ratio = 0.5;
  int replicates = 10;
};

// Boundary hitting points from the basepoint; censored walks are dropped and counted.
struct ExitSample {
  std::vector<cplx> points;
  long censored = 0;
  Backend backend = Backend::Wos;
};

ExitSample sample_exit_points(const DomainSpec& dom, long n, std::uint64_t seed, Backend backend = Backend::Auto,
                              const WosOptions& opts = {});
HarmonicEstimate measure_from_sample(const ExitSample& sample, const Disk& target);

// Closed-form measure through the conformal map of the domain kind.
double riemann_measure(const DomainSpec& dom, const Disk& target);
// Measure of the boundary arc {e^{it} : t0 <= t <= t1} of the unit disk seen from base.
double disk_arc_measure(cplx base, double t0, double t1);

HarmonicEstimate estimate_disk_measure(const DomainSpec& dom, const Disk& target, long n, std::uint64_t seed,
                                       Backend backend = Backend::Auto, const WosOptions& opts = {});
// Several targets from one shared sample (closed-form targets are independent).
std::vector<HarmonicEstimate> estimate_disk_measures(const DomainSpec& dom, const std::vector<Disk>& targets, long n,
                                                     std::uint64_t seed, Backend backend = Backend::Auto,
                                                     const WosOptions& opts = {});

// Moebius normalization sending the basepoint to infinity with boundary diameter 2.
struct Normalization {
  Mobius map = Mobius::identity();
  double diameter_before = 0.0;  // diameter of the boundary after the inversion step
};
Normalization beurling_normalization(const DomainSpec& dom);

struct BeurlingRow {
  Disk target{0.0, 1.0};
  double r_normalized = 0.0;  // +inf when the target contains the basepoint
  HarmonicEstimate estimate;
  double bound = 0.0;
  double margin = 0.0;  // bound - (value - 3 sigma)
  bool pass = true;
};
struct BeurlingReport {
  std::vector<BeurlingRow> rows;
  double worst_margin = 0.0;
  int violations = 0;
  bool pass = true;
};
BeurlingReport beurling_bound_check(const DomainSpec& dom, const std::vector<Disk>& targets, long n, std::uint64_t seed,
                                    Backend backend = Backend::Auto);

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
};
SlopeFit fit_decay_exponent(const std::vector<double>& radii, const std::vector<double>& values);

struct SeriesReport {
  std::vector<double> radii;
  std::vector<HarmonicEstimate> terms;
  std::vector<double> partial_sums;
  // S_N - S_{N/2}
  double tail = 0.0;
};
SeriesReport shrinking_target_series(const DomainSpec& dom, cplx a, double C, double t, int N, long n,
                                     std::uint64_t seed, Backend backend = Backend::Auto);

// Random star-shaped polygon around 0 with radius in [0.5, 1.5].
DomainSpec random_star_domain(std::uint64_t seed, int vertices = 96);

}  // namespace fatou
