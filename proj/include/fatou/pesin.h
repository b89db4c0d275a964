#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fatou/core.h"
#include "fatou/ergodic.h"
#include "fatou/geometry.h"
#include "fatou/maps.h"
#include "fatou/orbit.h"

namespace fatou {

// Half the distance from x0 to the nearest point of the forward critical orbits
// (first `depth` images of every critical point, singular values for transcendental maps).
double default_eta(const Map& f, cplx x0, int depth = 64);

struct TowerOptions {
  double eta = 0.0;  // <= 0: default_eta
  double M = 0.0;    // <= 0: exp(-chi_hat/5)
  int rays = 64;
  int max_halvings = 40;
};

// Inverse-branch tower along a backward orbit. Level n holds F_n, the branch of f^{-n}
// (f_X^{-n} for first-return orbits) with F_n(x0) = x_n. Vectors indexed by level n
// have N+1 entries; certificate entries are meaningful for n >= first_certified only.
struct BranchTower {
  Disk base{0.0, 1.0};  // D(x0, r)
  double eta = 0.0;
  double M = 0.0;
  double chi_hat = 0.0;
  // Interval the proof needs for M; reported on every tower.
  double M_lower = 0.0;  // exp(-chi_hat/4)
  int n2 = 0;
  double P = 1.0;
  int halvings = 0;
  std::vector<double> b;            // b_n, n = 0..N-1
  std::vector<double> level_radii;  // rP for n <= n2, r prod_{m>=n} (1-b_m)^-1 after
  std::vector<double> deriv_at_base;
  std::vector<double> diam_certs;   // sampled diam F_n(D(x0, level_radii[n]))
  std::vector<double> koebe_bounds; // 2 rho_{n-1} |F_n'(x0)| (2 - b_{n-1}) / b_{n-1}^3
  // max |f^n(F_n(y)) - y| over the rays in quad precision; -1 where |(f^n)'| > 1e24
  // puts the check beyond quad resolution.
  std::vector<double> identity_residuals;
  std::vector<double> composition_residuals;  // F_n against the nearest preimage of F_{n-1}
  std::vector<int> return_times;              // T per level (1 for single-step orbits)
  int first_certified = 0;
  int return_time_violations = 0;  // levels n >= 4 with T_n > n^2

  int depth() const { return static_cast<int>(deriv_at_base.size()) - 1; }
  int certified_levels() const { return depth() - first_certified + 1; }
  // diam_certs[n] <= eta M^n at every certified level.
  bool certificates_hold() const;
  // Sampled diameter never above the Koebe bound by more than 1e-9.
  bool koebe_sound() const;
};

BranchTower build_branch_tower(const Map& f, const BackwardOrbit& orbit, const TowerOptions& opts = {});

struct ContractionReport {
  double slope = 0.0;
  double intercept = 0.0;
  double chi = 0.0;
  bool slope_ok = false;  // slope <= -0.85 chi
  double relative_error = 0.0;  // |slope + chi| / chi
  // Smallest C with |F_n'(x0)| <= C e^{-0.9 chi n} at every level.
  double C = 0.0;
  int levels = 0;
};

// Needs at least 10 certified levels.
ContractionReport verify_contraction(const BranchTower& t, double chi);

struct PeriodicSearchBudget {
  int max_orbits = 400;
  int max_period = 16;
  int rays = 64;
  int cloud = 4000;
};

struct PeriodicPointRecord {
  cplx point;
  int period = 0;  // minimal period
  double residual = 0.0;
  double multiplier_modulus = 0.0;
  int banach_iterations = 0;
  cplx anchor;           // x0
  double radius = 0.0;   // r used for D(x0, r)
  int search_period = 0; // m of the contracting branch F_m
  double branch_diameter = 0.0;
};

PeriodicPointRecord find_periodic_point(const Map& f, const Disk& target, const PeriodicSearchBudget& budget,
                                        std::uint64_t seed);

struct DensityScanEntry {
  Disk disk{0.0, 1.0};
  bool found = false;
  PeriodicPointRecord record;
  std::string note;  // precondition warning or error text
};

std::vector<DensityScanEntry> density_scan(const Map& f, const std::vector<Disk>& cover, const PeriodicSearchBudget& budget,
                                           std::uint64_t seed);

// Disjoint annular sector cells around a center (or arcs of the circle for circle maps)
// kept at distance > exclusion radius from the exceptional points.
struct ReturnPartition {
  std::vector<ReturnSet> cells;
  double grand_orbit_exclusion_radius = 1e-3;
  std::vector<cplx> excluded_points;
};

// k equal arcs of the unit circle.
ReturnPartition circle_partition(const Map& g, int k);
// rings x sectors cells of the annulus exclusion < |z - center| < outer.
ReturnPartition annular_partition(const Map& f, cplx center, double outer, int rings, int sectors,
                                  double exclusion = 1e-3);

// Backward chain whose steps are first returns to the cell: f^{T_k}(x_{k+1}) = x_k with
// x_k in the cell. The single-step chain is kept in `chain` for branch continuation.
BackwardOrbit sample_return_orbit(const Map& f, const ReturnSet& cell, cplx x0, int n, std::uint64_t seed,
                                  long max_return = 100000);

// Same schedule as build_branch_tower with first-return steps and certificate eps M^n.
// Throws ReturnTimeBlowup when T_n > n^2 at three or more levels n >= 4.
BranchTower build_return_branch_tower(const Map& f, const ReturnPartition& partition, int cell_index,
                                      const BackwardOrbit& orbit, double eps, double M = 0.0);

}  // namespace fatou
