#pragma once

// Empirical forward/backward intrinsic Harnack checks on solver trajectories,
// the chain covering algorithm with its exact constant formulas, and the
// fixed-time oscillation-decay measurement.

#include <string>
#include <vector>

#include "hlab/exponents.hpp"
#include "hlab/solver.hpp"

namespace hlab {

// Queries below this fraction of max u0 are rejected as dead points rather
// than producing enormous waiting times in the degenerate regime.
inline constexpr double kPositivityFloorRel = 1e-10;

enum class Direction { forward, backward };

struct HarnackQuery {
  double x0 = 0.0;
  double t0 = 0.0;
  double r = 0.0;      // comparison radius > 0
  double c = 1.0;      // waiting-time coefficient > 0
  double mu = 1.0;     // candidate constant >= 1
  Direction direction = Direction::forward;
  double sigma = 4.0;  // containment slack for the probe cylinder
};

struct HarnackReport {
  double theta = 0.0;         // c * u(x0,t0)^{2-q}
  double probe_value = 0.0;   // u(x0, t0)
  double extremum = 0.0;      // inf (forward) / sup (backward) over B_r(x0)
  double empirical_mu = 0.0;  // probe/inf or sup/probe; +inf if extremum <= 0
  bool pass = false;          // empirical_mu <= mu and geometry_ok
  bool geometry_ok = false;
};

// Bilinear probe of a trajectory: linear in r between grid nodes and linear
// in t between bracketing snapshots.
double trajectory_value(const Trajectory& traj, double x, double t);

// u(x0,t0) <= mu * inf_{B_r(x0)} u(., t0 + theta r^q) with
// theta = c u(x0,t0)^{2-q}.  The extremum is taken over grid nodes inside
// B_r(x0) of the time-interpolated field.  Throws GeometryError when the
// probe cylinder (x0,t0) + Q_{sigma r}(theta) exits the trajectory's domain
// (so returned reports always carry geometry_ok = true) and DeadPointError
// when u(x0,t0) is at or below the positivity floor.
HarnackReport forward_check(const Trajectory& traj, const HarnackQuery& query);
// Mirror statement with sup at t0 - theta r^q.
HarnackReport backward_check(const Trajectory& traj, const HarnackQuery& query);

struct SweepRow {
  Direction direction = Direction::forward;
  double x0 = 0.0, t0 = 0.0, r = 0.0, c = 0.0;
  double theta = 0.0;
  double extremum = 0.0;
  double empirical_mu = 0.0;
  bool pass = false;
  bool skipped = false;     // geometry violation or dead point
  std::string reason;       // empty unless skipped
};

struct SweepAggregate {
  Direction direction = Direction::forward;
  double r = 0.0;
  double max_mu = 0.0;  // max over evaluated rows; 0 if none evaluated
  int evaluated = 0;
  int skipped = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;  // one per (direction, r)
};

struct BasePoint {
  double x0 = 0.0;
  double t0 = 0.0;
};

// Runs forward and backward checks over the query family base_points x radii
// at the given waiting-time coefficient; inadmissible queries become skipped
// rows with reasons instead of errors.  The per-(direction, radius) maxima
// stand in for the non-explicit theoretical constant.
SweepTable empirical_mu_sweep(const Trajectory& traj,
                              const std::vector<BasePoint>& base_points,
                              const std::vector<double>& radii, double c);

// Base Harnack constants fed to the chain (empirical in practice).
struct ChainBase {
  double tilde_c = 1.0;      // waiting-time coefficient > 0
  double tilde_mu = 1.0;     // per-step constant >= 1
  double tilde_sigma = 2.0;  // per-step containment slack > 1
};

struct ChainParams {
  // Inputs.
  double sigma_t = 0.0;  // time slack > 1
  double sigma = 0.0;    // total slack > 1 (right-angled chains)
  ChainBase base;
  double q = 0.0;
  // Time-advance iteration.
  double kappa = 0.0;       // (sigma~^q - 1)/(sigma_t^q - 1)
  double alpha = 0.0;       // kappa^{-1/q}
  double sigma_x = 0.0;     // alpha (sigma~ max(1, mu~^{((2-q)/q) ceil(kappa)}) + 1)
  double c_time = 0.0;      // c~ (ceil(kappa)+1) / kappa
  double mu_time = 0.0;     // mu~^{ceil(kappa)+1}
  int max_time_steps = 0;   // ceil(kappa) + 1
  // Right-angled spatial phase.
  double varrho = 0.0;      // (sigma - 1)/sigma_x
  double c_space = 0.0;     // c~ varrho^q sum_{k=1}^{K} mu~^{(q-2)(k-1)}
  double mu_space = 0.0;    // mu~^{K}, K = ceil(1/(alpha varrho)) + 1
  int max_space_steps = 0;  // K
  bool passthrough = false; // sigma_t >= tilde_sigma: base constants suffice
  // Radius schedule of the time-advance iteration.
  double rho(int i, double r) const;
};

// Derives the chain constants.  When sigma_t >= tilde_sigma the base
// constants already cover the requested slack and are returned unchanged
// (kappa = 1, alpha = 1, passthrough flag set).
ChainParams chain_constants(double sigma_t, double sigma, const ChainBase& base,
                            const ExponentTriple& e);

struct ChainPoint {
  double x = 0.0;
  double t = 0.0;
};

struct ChainStep {
  double x = 0.0;
  double t = 0.0;
  double u = 0.0;    // trajectory value at (x, t)
  double rho = 0.0;  // radius of the step that reached this point (0 at start)
  char phase = 's';  // 's' start, 'x' spatial step, 't' time step
};

struct ChainTrace {
  std::vector<ChainStep> steps;  // front() is the start point
  int space_steps = 0;
  int time_steps = 0;
  double mu_total = 1.0;  // tilde_mu^{space_steps + time_steps}
  bool certified = false; // u(start) <= mu_total * u(target) verified
};

// Executes the covering iteration from start to target (target.t >= start.t):
// first moves in space along the grid toward target.x in whole-cell steps of
// planned radius alpha varrho |target.x - start.x|, each step applying a
// forward check that also advances time by its waiting period; then advances
// time at fixed x with the geometric radius schedule, the last radius clamped
// to land exactly on target.t.  Throws RoomError when an intermediate
// application exits the domain (message names the violated side) and
// std::logic_error if a hard step-count bound fails.
ChainTrace run_chain(const Trajectory& traj, ChainPoint start, ChainPoint target,
                     const ChainParams& params);

struct OscillationFit {
  double slope = 0.0;      // fitted d log(osc) / d log(rho)
  double intercept = 0.0;  // at log(rho/R_base) = 0
  int n_points = 0;
};

// Oscillation max-min over the grid nodes of B_rho(center_x) in the
// time-interpolated field at center_t, for each rho in rho_list; least-squares
// fit of log(osc) against log(rho/R_base).  Throws GeometryError when a ball
// exits the domain and DegenerateFitError when oscillations underflow or the
// abscissas are degenerate.
OscillationFit oscillation_decay(const Trajectory& traj, double center_x,
                                 double center_t, double R_base,
                                 const std::vector<double>& rho_list);

// Values scaled by lambda > 0 and times by lambda^{2-q}: the exact covariance
// of the equation, used to test that empirical_mu is scale-invariant.
Trajectory scaled_trajectory(const Trajectory& traj, double lambda);

}  // namespace hlab
