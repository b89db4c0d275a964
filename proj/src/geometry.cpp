#include "fatou/geometry.h"

#include <algorithm>
#include <cmath>

namespace fatou {

Disk::Disk(cplx c, double r) : center(c), radius(r) {
  if (!finite(c)) throw Error(Errc::InvalidArgument, "disk center must be finite");
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(Errc::InvalidArgument, "disk radius must be positive and finite");
}

Mobius::Mobius(cplx a, cplx b, cplx c, cplx d) : a_(a), b_(b), c_(c), d_(d) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  if (!(std::abs(a * d - b * c) > 1e-14 * scale * scale)) {
    throw Error(Errc::Degenerate, "Mobius transform with ad - bc ~ 0");
  }
}

Mobius Mobius::identity() { return {1.0, 0.0, 0.0, 1.0}; }

Mobius Mobius::puncture(double eps, cplx v) {
  if (!(eps > 0.0)) throw Error(Errc::InvalidArgument, "puncture radius must be positive");
  return {0.0, eps * eps, 1.0, -v};
}

Mobius Mobius::inversion(cplx z0) { return {0.0, 1.0, 1.0, -z0}; }

Mobius Mobius::affine(cplx scale, cplx shift) { return {scale, shift, 0.0, 1.0}; }

ExtendedPoint Mobius::apply(const ExtendedPoint& p) const {
  if (p.infinite) {
    if (c_ == cplx(0.0, 0.0)) return ExtendedPoint::infinity();
    return ExtendedPoint(a_ / c_);
  }
  const cplx den = c_ * p.z + d_;
  if (den == cplx(0.0, 0.0)) return ExtendedPoint::infinity();
  const cplx w = (a_ * p.z + b_) / den;
  if (!finite(w)) return ExtendedPoint::infinity();
  return ExtendedPoint(w);
}

cplx Mobius::operator()(cplx z) const {
  const ExtendedPoint w = apply(ExtendedPoint(z));
  if (w.infinite) throw Error(Errc::Pole, "evaluation at the pole");
  return w.z;
}

double Mobius::derivative_modulus(cplx z) const {
  const cplx den = c_ * z + d_;
  if (den == cplx(0.0, 0.0)) throw Error(Errc::Pole, "derivative at the pole");
  return std::abs(a_ * d_ - b_ * c_) / std::norm(den);
}

Mobius Mobius::inverse() const { return {d_, -b_, -c_, a_}; }

cplx Mobius::pole() const {
  if (!has_pole()) throw Error(Errc::InvalidArgument, "affine map has no finite pole");
  return -d_ / c_;
}

Disk Mobius::image(const Disk& disk) const {
  if (!has_pole()) {
    const cplx k = a_ / d_;
    return {k * disk.center + b_ / d_, std::abs(k) * disk.radius};
  }
  const cplx p = pole();
  const double gap = std::abs(p - disk.center) - disk.radius;
  if (!(gap > 1e-14 * (disk.radius + std::abs(disk.center)))) {
    throw Error(Errc::Pole, "disk closure contains the pole");
  }
  // The reflection of the pole in the circle maps to the image center.
  const cplx reflected = disk.center + disk.radius * disk.radius / std::conj(p - disk.center);
  const cplx center = (*this)(reflected);
  const cplx u = (p - disk.center) / std::abs(p - disk.center);
  const double r1 = std::abs((*this)(disk.center + disk.radius * u) - center);
  const double r2 = std::abs((*this)(disk.center - disk.radius * u) - center);
  return {center, 0.5 * (r1 + r2)};
}

Mobius operator*(const Mobius& o, const Mobius& i) {
  return {o.a() * i.a() + o.b() * i.c(), o.a() * i.b() + o.b() * i.d(), o.c() * i.a() + o.d() * i.c(),
          o.c() * i.b() + o.d() * i.d()};
}

ExtendedPoint mobius_apply(const Mobius& m, const ExtendedPoint& z) { return m.apply(z); }

double mobius_derivative_modulus(const Mobius& m, cplx z) { return m.derivative_modulus(z); }

double koebe_quarter_radius(double deriv_modulus, double r) {
  if (!(deriv_modulus > 0.0) || !(r > 0.0)) {
    throw Error(Errc::InvalidArgument, "Koebe quarter radius needs positive inputs");
  }
  return 0.25 * deriv_modulus * r;
}

DistortionFactors koebe_distortion_factors(double lam) {
  if (!(lam >= 0.0) || !(lam < 1.0)) throw Error(Errc::InvalidArgument, "distortion parameter must lie in [0,1)");
  const double p = 1.0 + lam;
  const double m = 1.0 - lam;
  return {m / (p * p * p), p / (m * m * m)};
}

int winding_number(const std::vector<cplx>& poly, cplx p) {
  const std::size_t n = poly.size();
  int wn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx a = poly[i] - p;
    const cplx b = poly[(i + 1) % n] - p;
    const double cross = a.real() * b.imag() - a.imag() * b.real();
    if (a.imag() <= 0.0) {
      if (b.imag() > 0.0 && cross > 0.0) ++wn;
    } else {
      if (b.imag() <= 0.0 && cross < 0.0) --wn;
    }
  }
  return wn;
}

cplx segment_closest_point(cplx p, cplx a, cplx b) {
  const cplx u = b - a;
  const double uu = std::norm(u);
  if (uu == 0.0) return a;
  const double t = std::clamp(((p - a) * std::conj(u)).real() / uu, 0.0, 1.0);
  return a + t * u;
}

double segment_distance(cplx p, cplx a, cplx b) { return std::abs(p - segment_closest_point(p, a, b)); }

double chordal_distance(const ExtendedPoint& p, const ExtendedPoint& q) {
  if (p.infinite && q.infinite) return 0.0;
  if (p.infinite) return 1.0 / std::sqrt(1.0 + std::norm(q.z));
  if (q.infinite) return 1.0 / std::sqrt(1.0 + std::norm(p.z));
  return std::abs(p.z - q.z) / (std::sqrt(1.0 + std::norm(p.z)) * std::sqrt(1.0 + std::norm(q.z)));
}

double disk_hyperbolic_distance(cplx z, cplx w) {
  const double gz = (1.0 - std::abs(z)) * (1.0 + std::abs(z));
  const double gw = (1.0 - std::abs(w)) * (1.0 + std::abs(w));
  if (!(gz > 0.0) || !(gw > 0.0)) throw Error(Errc::InvalidArgument, "hyperbolic distance needs interior points");
  return 2.0 * std::asinh(std::abs(z - w) / std::sqrt(gz * gw));
}

}  // namespace fatou
