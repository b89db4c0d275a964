#pragma once

#include <cstdint>
#include <vector>

#include "fatou/core.h"
#include "fatou/maps.h"

namespace fatou {

enum class OrbitMode { PlaneEqualWeight, CircleTransfer, FirstReturn };

const char* orbit_mode_name(OrbitMode mode);

// A sampled backward orbit x_0, x_1, ..., x_N with f(x_{k+1}) = x_k
// (f^{T_k}(x_{k+1}) = x_k in first-return mode).
struct BackwardOrbit {
  std::vector<cplx> points;
  // Derivative of the step map at x_{k+1}.
  std::vector<cplx> step_derivs;
  // Log-probability of the preimage chosen at step k.
  std::vector<double> log_weights;
  // Circle transfer: sum of 1/|g'| over the fiber at step k before renormalization.
  std::vector<double> raw_weight_sums;
  // First-return mode: return time of step k.
  std::vector<int> return_times;
  // First-return mode: the single-step chain and the chain index of each points[k].
  std::vector<cplx> chain;
  std::vector<int> chain_index;
  OrbitMode mode = OrbitMode::PlaneEqualWeight;

  int depth() const { return static_cast<int>(points.size()) - 1; }
};

// Natural-extension chain x_0 = x0, f(x_{k+1}) = x_k. PlaneEqualWeight picks each of
// the d preimages with probability 1/d; CircleTransfer needs a centered circle map.
// A preimage within 1e-8 of a critical point is redrawn up to 32 times.
BackwardOrbit sample_backward_orbit(const Map& f, cplx x0, int n, OrbitMode mode, std::uint64_t seed);

// Largest |f(x_{k+1}) - x_k| / (1 + |x_k|) over the chain (single-step modes).
double chain_residual(const Map& f, const BackwardOrbit& orbit);

}  // namespace fatou
