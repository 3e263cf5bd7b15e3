#pragma once

// Exponent bookkeeping, regime classification, cylinder geometry, and
// pointwise residual evaluation of the radial operator in both its
// (n,p,q) form and its fictitious-dimension (q,d) form.

#include "hlab/errors.hpp"

namespace hlab {

// The triple (n, p, q) together with its derived quantities:
//   d   = (n-1)(q-1)/(p-1) + 1   fictitious dimension (real-valued by design)
//   eta = (p-1)/(q-1)            time-scaling constant
//   s   = d(2-q)/q               weighted-norm exponent, singular regime only
// Immutable value type; all operations on it are pure.
class ExponentTriple {
 public:
  ExponentTriple(int n, double p, double q);

  int n() const { return n_; }
  double p() const { return p_; }
  double q() const { return q_; }

  double d() const { return d_; }
  double eta() const { return eta_; }

  // Defined only for q < 2; throws RegimeError otherwise so that an
  // out-of-regime s can never silently enter a computation.
  double s() const;

 private:
  int n_;
  double p_;
  double q_;
  double d_;
  double eta_;
};

enum class Regime { singular, critical, degenerate };

struct RegimeVerdict {
  bool in_range;
  Regime regime;
  double threshold;  // active lower bound on q
};

// threshold = 1 when p >= (1+n)/2, else 2(n-p)/(n-1); in_range <=> q > threshold.
// Regime is classified by the sign of q-2.
RegimeVerdict check_range(const ExponentTriple& e);

// d = (n-1)(q-1)/(p-1) + 1 with no rounding.
double fictitious_dimension(const ExponentTriple& e);

enum class CylinderOrientation { backward, forward, two_sided };

// Space-time cylinder centered at (center_x, center_t) with radius r and
// time-wise length theta * r^q per side.  Interval conventions:
//   backward:  (center_t - theta*r^q, center_t]
//   forward:   (center_t, center_t + theta*r^q)
//   two-sided: (center_t - theta*r^q, center_t + theta*r^q)
// so the forward and backward halves are disjoint and their union is the
// two-sided cylinder.  Spatial containment uses the open ball.
class IntrinsicCylinder {
 public:
  IntrinsicCylinder(double center_x, double center_t, double r, double theta,
                    double q, CylinderOrientation orientation);

  double center_x() const { return center_x_; }
  double center_t() const { return center_t_; }
  double r() const { return r_; }
  double theta() const { return theta_; }
  double q() const { return q_; }
  CylinderOrientation orientation() const { return orientation_; }

  // theta * r^q, the time-wise length of each half.
  double time_halfwidth() const;
  // Earliest/latest time of the cylinder (both endpoints open except the
  // backward top, which is closed).
  double time_lo() const;
  double time_hi() const;

  bool contains(double x, double t) const;

 private:
  double center_x_;
  double center_t_;
  double r_;
  double theta_;
  double q_;
  CylinderOrientation orientation_;
};

// phi_t - |phi_r|^{q-2} ((p-1) phi_rr + (n-1)/r phi_r); a value <= 0 signals
// a pointwise subsolution.  Throws std::domain_error for r <= 0 and
// DegenerateGradientError when |phi_r| < 1e-14 * (1 + |phi_t| + |phi_rr|)
// in the singular regime.
double residual_npq(double phi_t, double phi_r, double phi_rr, double r,
                    const ExponentTriple& e);

// Same contract in the (q, d, eta) form:
// phi_t - eta |phi_r|^{q-2} ((q-1) phi_rr + (d-1)/r phi_r).
double residual_qd(double phi_t, double phi_r, double phi_rr, double r,
                   const ExponentTriple& e);

// Intrinsic waiting-time coefficient theta = c * u0^{2-q}; u0 and c must be
// positive.
double intrinsic_theta(double u0, double c, const ExponentTriple& e);

}  // namespace hlab
