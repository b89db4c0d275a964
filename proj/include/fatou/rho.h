#pragma once

#include <vector>

#include "fatou/geometry.h"
#include "fatou/maps.h"

namespace fatou {

// Punctures v_i with common radius eps; the disks D(v_i, eps) are pairwise
// disjoint with gaps larger than eps.
class RhoConfig {
 public:
  RhoConfig(std::vector<cplx> punctures, double epsilon);

  const std::vector<cplx>& punctures() const { return punctures_; }
  double epsilon() const { return eps_; }
  // Index of the open puncture disk containing z, or -1.
  int disk_index(cplx z) const;
  Mobius chart(std::size_t i) const { return Mobius::puncture(eps_, punctures_[i]); }

 private:
  std::vector<cplx> punctures_;
  double eps_;
};

double rho_density(const RhoConfig& cfg, cplx z);
// rho-length of the straight segment a -> b, in closed form.
double rho_segment_length(const RhoConfig& cfg, cplx a, cplx b);
// Infimum of rho-lengths over the candidate path family.
double rho_distance(const RhoConfig& cfg, cplx z, cplx w);

struct InclusionReport {
  bool pass = true;
  int samples = 0;
  // min over samples of dist_rho(x,y)/|x-y|; at least 1 when D_rho(x,r) lies in D(x,r).
  double worst_lower_ratio = 0.0;
  // max over samples of dist_rho(x,y)/(16 r rho(x)); at most 1 when D(x,r) lies in D_rho(x, 16 r rho(x)).
  double worst_upper_ratio = 0.0;
};
InclusionReport rho_inclusion_check(const RhoConfig& cfg, cplx x, double r, int rings = 16, int spokes = 16);

std::vector<cplx> separated_subset(const std::vector<cplx>& points, double delta);

struct ThinSVParams {
  double mu;
  int d;
  double eta;
  int horizon;
};

struct ThinLevel {
  int n = 0;
  double scale = 0.0;
  long count = 0;
  double bound = 0.0;
  bool pass = true;
  std::vector<cplx> witnesses;
};

struct ThinPuncture {
  std::size_t index = 0;
  double distance = 0.0;
  bool pass = true;
};

struct ThinVerdict {
  bool pass = true;
  bool condition_a = true;
  bool condition_b = true;
  double sampling_gap = 0.0;
  std::vector<ThinLevel> levels;
  std::vector<ThinPuncture> punctures;
};

ThinVerdict thin_sv_check(const SingularData& svs, const std::vector<cplx>& boundary_samples, const RhoConfig& cfg,
                          const ThinSVParams& params);

}  // namespace fatou
