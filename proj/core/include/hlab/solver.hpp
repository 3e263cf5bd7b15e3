#pragma once

// Explicit finite-difference solver for the radial model equation
//   u_t = eta (|u_r|^{q-2} u_r)_r + eta (d-1)/r |u_r|^{q-2} u_r
// on [0, R] with homogeneous Dirichlet data at r = R and a symmetry
// (no-flux) condition at the origin, plus the weighted norms and the weak-form
// residual used to validate trajectories against the divergence structure.

#include <functional>
#include <vector>

#include "hlab/exponents.hpp"

namespace hlab {

// One radial profile on the uniform grid r_j = j delta_r, j = 0..J,
// with r_J = R.
struct RadialField {
  std::vector<double> values;
  double delta_r = 0.0;
  double R = 0.0;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

// Spatial discretizations of the diffusion term.  The conservative form is
// the primary scheme (exact discrete flux balance); the nondivergence form
// (central gradient in the coefficient) exists only for cross-checks.
enum class DiscreteForm { conservative, nondivergence };

struct SolverParams {
  // Gradient regularization floor; 0 selects 1e-8 * max(u0) / R.
  double eps_grad = 0.0;
  // Safety factor on the diffusive stability bound.
  double cfl = 0.4;
  // Number of log-spaced snapshot times in [1e-4 t_final, t_final]
  // (denser early); t = 0 is always recorded.  0 disables the cadence.
  int snapshot_count = 64;
  // Additional requested times in (0, t_final], landed exactly by clamping dt.
  std::vector<double> snapshot_times;
  // If positive, integration stops once max_j u_j <= stop_value_floor.
  double stop_value_floor = 0.0;
  DiscreteForm form = DiscreteForm::conservative;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;  // snapshots.front() is the t = 0 data
  ExponentTriple exponents;
  SolverParams params_used;  // auto fields resolved (eps_grad)
  double delta_r = 0.0;
  double R = 0.0;
  bool stopped_early = false;
};

// Integrates from u0 up to t_final (or the stop floor).  Throws
// std::invalid_argument on malformed input (u0(R) must vanish to within
// 1e-12 of max u0; negative values rejected), BlowUpError if the solution
// exceeds 10^3 max u0, NonConvergenceError if the stable step collapses
// below 1e-16 t_final.  The scheme is kept in the monotone (convex
// combination) regime each step, so discrete max/min principles hold; they
// are re-checked per step and a violation is reported as std::logic_error.
Trajectory solve(const RadialField& u0, double t_final,
                 const ExponentTriple& e, const SolverParams& params = {});

// (integral_0^R |u|^s r^{d-1} dr)^{1/s} by the trapezoid rule on the grid of
// `field`.  Requires s > 0 and d >= 1; the r^{d-1} weight is exactly zero at
// the origin node when d > 1.
double weighted_norm(const RadialField& field, double s, double d);
double weighted_norm(const std::vector<double>& values, double delta_r,
                     double s, double d);

// Space-time test function with its partial derivatives.
struct TestFunction {
  std::function<double(double r, double t)> value;
  std::function<double(double r, double t)> dr;
  std::function<double(double r, double t)> dt;
};

// Smooth bump exp(-1/(1-x^2)) scaled to the rectangle
// |r - r0| < r_width, |t - t0| < t_width, with analytic derivatives;
// identically zero outside.
TestFunction bump_test_function(double r0, double r_width, double t0,
                                double t_width);

// Relative weak-form defect
//   integral integral [ u phi_t - eta |u_r|^{q-2} u_r phi_r ] r^{d-1} dr dt
// over [t1, t2], normalized by the total absolute mass of the elementary
// contributions.  phi must vanish near r = R and at t1, t2
// (SupportViolationError otherwise).  Snapshots inside [t1, t2] provide the
// temporal trapezoid nodes; fluxes use exact (unregularized) face gradients.
double weak_form_residual(const Trajectory& traj, const TestFunction& phi,
                          double t1, double t2);

}  // namespace hlab
