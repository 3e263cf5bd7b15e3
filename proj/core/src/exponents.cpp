#include "hlab/exponents.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hlab {

ExponentTriple::ExponentTriple(int n, double p, double q) : n_(n), p_(p), q_(q) {
  if (n < 1) throw std::invalid_argument("ExponentTriple: n must be >= 1");
  if (!(p > 1.0)) throw std::invalid_argument("ExponentTriple: p must be > 1");
  if (!(q > 1.0)) throw std::invalid_argument("ExponentTriple: q must be > 1");
  d_ = static_cast<double>(n - 1) * (q - 1.0) / (p - 1.0) + 1.0;
  eta_ = (p - 1.0) / (q - 1.0);
}

double ExponentTriple::s() const {
  if (q_ >= 2.0) {
    throw RegimeError("ExponentTriple::s: s = d(2-q)/q is defined only for q < 2");
  }
  return d_ * (2.0 - q_) / q_;
}

RegimeVerdict check_range(const ExponentTriple& e) {
  RegimeVerdict v;
  if (e.p() >= (1.0 + e.n()) / 2.0) {
    v.threshold = 1.0;
  } else {
    v.threshold = 2.0 * (e.n() - e.p()) / (e.n() - 1.0);
  }
  v.in_range = e.q() > v.threshold;
  if (e.q() < 2.0) {
    v.regime = Regime::singular;
  } else if (e.q() == 2.0) {
    v.regime = Regime::critical;
  } else {
    v.regime = Regime::degenerate;
  }
  return v;
}

double fictitious_dimension(const ExponentTriple& e) { return e.d(); }

IntrinsicCylinder::IntrinsicCylinder(double center_x, double center_t, double r,
                                     double theta, double q,
                                     CylinderOrientation orientation)
    : center_x_(center_x),
      center_t_(center_t),
      r_(r),
      theta_(theta),
      q_(q),
      orientation_(orientation) {
  if (!(r > 0.0)) throw std::invalid_argument("IntrinsicCylinder: r must be > 0");
  if (!(theta > 0.0)) throw std::invalid_argument("IntrinsicCylinder: theta must be > 0");
  if (!(q > 1.0)) throw std::invalid_argument("IntrinsicCylinder: q must be > 1");
}

double IntrinsicCylinder::time_halfwidth() const { return theta_ * std::pow(r_, q_); }

double IntrinsicCylinder::time_lo() const {
  if (orientation_ == CylinderOrientation::forward) return center_t_;
  return center_t_ - time_halfwidth();
}

double IntrinsicCylinder::time_hi() const {
  if (orientation_ == CylinderOrientation::backward) return center_t_;
  return center_t_ + time_halfwidth();
}

bool IntrinsicCylinder::contains(double x, double t) const {
  if (!(std::abs(x - center_x_) < r_)) return false;
  const double hw = time_halfwidth();
  switch (orientation_) {
    case CylinderOrientation::backward:
      return t > center_t_ - hw && t <= center_t_;
    case CylinderOrientation::forward:
      return t > center_t_ && t < center_t_ + hw;
    case CylinderOrientation::two_sided:
      return t > center_t_ - hw && t < center_t_ + hw;
  }
  return false;
}

namespace {

void check_residual_preconditions(double phi_t, double phi_r, double phi_rr,
                                  double r, const ExponentTriple& e,
                                  const char* who) {
  if (!(r > 0.0)) {
    throw std::domain_error(std::string(who) + ": r must be positive");
  }
  // The classical formula is invalid at critical points; in the singular
  // regime it would return +-inf there.  A gradient entering at roundoff
  // scale relative to the other derivatives is indistinguishable from a
  // critical point (e.g. finite differences of a flat field), so reject it.
  // The scale is relative, not absolute: comparison profiles evaluated in
  // closed form carry full relative precision at tiny amplitudes and stay
  // admissible.
  if (e.q() < 2.0) {
    const double scale = std::abs(phi_t) + std::abs(phi_rr);
    if (phi_r == 0.0 || std::abs(phi_r) < 1e-14 * scale) {
      throw DegenerateGradientError(
          std::string(who) +
          ": gradient below machine threshold in singular regime");
    }
  }
}

}  // namespace

double residual_npq(double phi_t, double phi_r, double phi_rr, double r,
                    const ExponentTriple& e) {
  check_residual_preconditions(phi_t, phi_r, phi_rr, r, e, "residual_npq");
  const double grad_pow = std::pow(std::abs(phi_r), e.q() - 2.0);
  return phi_t -
         grad_pow * ((e.p() - 1.0) * phi_rr + (e.n() - 1.0) / r * phi_r);
}

double residual_qd(double phi_t, double phi_r, double phi_rr, double r,
                   const ExponentTriple& e) {
  check_residual_preconditions(phi_t, phi_r, phi_rr, r, e, "residual_qd");
  const double grad_pow = std::pow(std::abs(phi_r), e.q() - 2.0);
  return phi_t - e.eta() * grad_pow *
                     ((e.q() - 1.0) * phi_rr + (e.d() - 1.0) / r * phi_r);
}

double intrinsic_theta(double u0, double c, const ExponentTriple& e) {
  if (!(u0 > 0.0)) throw std::domain_error("intrinsic_theta: u0 must be positive");
  if (!(c > 0.0)) throw std::domain_error("intrinsic_theta: c must be positive");
  return c * std::pow(u0, 2.0 - e.q());
}

}  // namespace hlab
