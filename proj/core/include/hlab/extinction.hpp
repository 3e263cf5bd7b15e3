#pragma once

// Finite-time extinction experiments in the subcritical regime: the weighted
// norm decay law, the radial Sobolev inequality check, the constructive
// counterexample record, and the regime-dichotomy sweep.

#include <string>
#include <utility>
#include <vector>

#include "hlab/exponents.hpp"
#include "hlab/solver.hpp"

namespace hlab {

struct ExtinctionParams {
  double eps_grad = 0.0;       // forwarded to the solver (0 = auto)
  double cfl = 0.4;
  int snapshot_count = 200;
  double t_max_factor = 20.0;  // search budget T_max = factor * v(0)^{2-q}
  double floor_rel = 1e-6;     // extinction floor = floor_rel * v(0)
};

struct ExtinctionChecks {
  bool monotone = false;        // v nonincreasing within 1e-6 v(0) per step
  bool slope_positive = false;  // v^{2-q} decreases (fitted rate > 0)
  bool fit_ok = false;          // linear-fit residual <= 10% of range
  bool all() const { return monotone && slope_positive && fit_ok; }
};

struct ExtinctionReport {
  ExponentTriple e;
  double s = 0.0;  // weighted norm exponent d(2-q)/q
  std::vector<std::pair<double, double>> norm_curve;  // (t, v(t))
  double extinction_time_emp = 0.0;  // first recorded t with v(t) < floor
  double decay_slope = 0.0;          // fitted decrease rate of v^{2-q}(t)
  double fit_residual = 0.0;         // max |fit defect| / range of v^{2-q}
  ExtinctionChecks bound_check;
  double C_emp = 0.0;  // extinction_time_emp / v(0)^{2-q}; reported, not compared
  bool subcritical = false;
  double floor = 0.0;  // recorded protocol values
  double t_max = 0.0;
};

// Integrates u0 under the given exponents (q < 2 required), tracks
// v(t) = weighted_norm(u(t), s, d), and reports the extinction time against
// floor = floor_rel v(0) with budget T_max = t_max_factor v(0)^{2-q}.  The
// decay fit runs on [0, extinction_time/2].  Throws NoExtinctionError when
// v stays above the floor through the budget — the expected outcome for a
// supercritical negative control.  For subcritical exponents s > 1 is
// enforced (inputs at the exact regime boundary are rejected).
ExtinctionReport run_extinction(const RadialField& u0, const ExponentTriple& e,
                                const ExtinctionParams& params = {});

struct SobolevResult {
  double ratio = 0.0;  // LHS/RHS; the empirical inequality constant
  bool degenerate = false;
};

// ( integral |v|^{dq/(d-q)} r^{d-1} dr )^{(d-q)/(dq)}
//   / ( integral |v'|^q r^{d-1} dr )^{1/q}
// with v' by central differences (one-sided at the endpoints).  Requires
// q < d (ExponentError otherwise) and v vanishing at r = R; v identically
// zero returns ratio 0 flagged degenerate.
SobolevResult sobolev_check(const RadialField& v, const ExponentTriple& e);

// Constants fed to the counterexample construction (from a supercritical
// empirical sweep).
struct HarnackConstants {
  double c = 1.0;      // waiting-time coefficient
  double sigma = 4.0;  // containment slack
  double gamma = 1.0;  // candidate Harnack constant
};

struct CounterexampleRecord {
  double x0 = 0.0, t0 = 0.0, r = 0.0;
  double probe = 0.0;        // u(x0,t0), above the floor
  double inf_at_end = 0.0;   // inf over B_r(x0) at T_dead
  double T_dead = 0.0;       // first recorded time with max u below the floor
  double gamma = 0.0;
  bool contradiction = false;  // probe > gamma * inf_at_end
};

struct CounterexampleOutcome {
  bool found = false;
  CounterexampleRecord record;  // meaningful iff found
  std::string reason;           // why no record was produced
};

// Looks for a base point (x0, t0) with T_dead - t0 < t0/sigma^q, sets the
// radius from c u(x0,t0)^{2-q} r^q = T_dead - t0, and evaluates the inf over
// B_r(x0) at T_dead: positive center value with vanishing future inf is the
// numerical embodiment of the incompatibility between extinction and a
// forward Harnack constant.  A trajectory without extinction returns
// found = false (negative control); extinction with no admissible base point
// on the grid throws SelectionError (domain too small).
CounterexampleOutcome counterexample_demo(const Trajectory& traj,
                                          const HarnackConstants& constants);

struct DichotomyRow {
  double q = 0.0;
  bool in_range = false;  // supercritical (Harnack regime)
  bool extinct = false;
  double extinction_time = -1.0;  // -1 when no extinction within budget
  double v0 = 0.0;
  double v_end = 0.0;
  double floor = 0.0;
  double t_max = 0.0;
};

// Runs the same initial data and protocol across q_values at fixed (n, p):
// one row per q with the observed outcome.  Rows are independent, so jobs > 1
// fans them out across that many worker threads; the result order always
// matches q_values.
std::vector<DichotomyRow> run_dichotomy_sweep(const RadialField& u0, double n,
                                              double p,
                                              const std::vector<double>& q_values,
                                              const ExtinctionParams& params = {},
                                              int jobs = 1);

}  // namespace hlab
