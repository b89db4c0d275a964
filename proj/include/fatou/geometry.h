#pragma once

#include <vector>

#include "fatou/core.h"

namespace fatou {

struct Disk {
  cplx center;
  double radius;

  Disk(cplx c, double r);
  bool contains(cplx z) const { return std::abs(z - center) < radius; }
};

// z -> (az+b)/(cz+d), non-degenerate up to a scale-invariant tolerance.
class Mobius {
 public:
  Mobius(cplx a, cplx b, cplx c, cplx d);

  static Mobius identity();
  // z -> eps^2/(z - v): sends D(v,eps) to the exterior of D(0,eps), fixes |z-v| = eps moduli.
  static Mobius puncture(double eps, cplx v);
  // z -> 1/(z - z0).
  static Mobius inversion(cplx z0);
  static Mobius affine(cplx scale, cplx shift);

  ExtendedPoint apply(const ExtendedPoint& p) const;
  // Finite evaluation; throws Pole when z is the pole.
  cplx operator()(cplx z) const;
  double derivative_modulus(cplx z) const;
  Mobius inverse() const;
  bool has_pole() const { return c_ != cplx(0.0, 0.0); }
  cplx pole() const;
  // Image of a disk not containing the pole in its closure.
  Disk image(const Disk& d) const;

  cplx a() const { return a_; }
  cplx b() const { return b_; }
  cplx c() const { return c_; }
  cplx d() const { return d_; }

 private:
  cplx a_, b_, c_, d_;
};

// (outer * inner)(z) = outer(inner(z)).
Mobius operator*(const Mobius& outer, const Mobius& inner);

ExtendedPoint mobius_apply(const Mobius& m, const ExtendedPoint& z);
double mobius_derivative_modulus(const Mobius& m, cplx z);

double koebe_quarter_radius(double deriv_modulus, double r);

struct DistortionFactors {
  double lower;
  double upper;
};
DistortionFactors koebe_distortion_factors(double lam);

// Winding number of a closed polygon (last vertex joins the first) around p.
int winding_number(const std::vector<cplx>& polygon, cplx p);

double segment_distance(cplx p, cplx a, cplx b);
cplx segment_closest_point(cplx p, cplx a, cplx b);

// Distance on the Riemann sphere of diameter 1 (chordal metric /2).
double chordal_distance(const ExtendedPoint& p, const ExtendedPoint& q);

// Hyperbolic distance in the unit disk (curvature -1).
double disk_hyperbolic_distance(cplx z, cplx w);

}  // namespace fatou
