#include "hlab/extinction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "hlab/errors.hpp"

namespace hlab {
namespace {

struct CurveData {
  std::vector<std::pair<double, double>> curve;  // (t, v(t))
  double v0 = 0.0;
  double floor = 0.0;
  double t_max = 0.0;
  bool extinct = false;
  double extinction_time = 0.0;
  bool monotone = true;
};

// Shared protocol: integrate u0 with the stop-floor shortcut and track the
// weighted norm against floor_rel v(0) through the t_max_factor budget.
CurveData extinction_curve(const RadialField& u0, const ExponentTriple& e,
                           const ExtinctionParams& params, double s) {
  CurveData data;
  const double q = e.q();
  const double d = e.d();
  data.v0 = weighted_norm(u0, s, d);
  if (data.v0 == 0.0) {
    data.curve.push_back({0.0, 0.0});
    data.extinct = true;
    return data;
  }
  data.floor = params.floor_rel * data.v0;
  data.t_max = params.t_max_factor * std::pow(data.v0, 2.0 - q);

  SolverParams sp;
  sp.eps_grad = params.eps_grad;
  sp.cfl = params.cfl;
  sp.snapshot_count = params.snapshot_count;
  // Pointwise ceiling that forces v < floor: v <= max_j u_j (R^d/d)^{1/s}.
  sp.stop_value_floor =
      0.1 * data.floor / std::pow(std::pow(u0.R, d) / d, 1.0 / s);

  const Trajectory traj = solve(u0, data.t_max, e, sp);
  for (const Snapshot& snap : traj.snapshots) {
    data.curve.push_back({snap.t, weighted_norm(snap.u, traj.delta_r, s, d)});
  }
  for (std::size_t i = 0; i + 1 < data.curve.size(); ++i) {
    if (data.curve[i + 1].second > data.curve[i].second + 1e-6 * data.v0) {
      data.monotone = false;
    }
  }
  for (const auto& [t, v] : data.curve) {
    if (v < data.floor) {
      data.extinct = true;
      data.extinction_time = t;
      break;
    }
  }
  return data;
}

}  // namespace

ExtinctionReport run_extinction(const RadialField& u0, const ExponentTriple& e,
                                const ExtinctionParams& params) {
  const double q = e.q();
  const double s = e.s();  // throws RegimeError unless q < 2
  const bool subcritical = !check_range(e).in_range;
  // s = 1 marks the regime boundary exactly; computed in floating point it
  // can land a few ulp to either side, so refuse the whole roundoff-scale
  // neighborhood as unclassifiable.
  if (subcritical && !(s > 1.0 + 1e-12)) {
    throw std::invalid_argument(
        "run_extinction: exponents sit on the regime boundary (s = 1)");
  }

  ExtinctionReport rep{e, s, {}, 0.0, 0.0, 0.0, {}, 0.0, subcritical, 0.0, 0.0};
  CurveData data = extinction_curve(u0, e, params, s);
  rep.norm_curve = std::move(data.curve);
  rep.floor = data.floor;
  rep.t_max = data.t_max;

  if (data.v0 == 0.0) {
    // Vanishing data is extinct from the start; every check is vacuous.
    rep.bound_check = {true, true, true};
    return rep;
  }
  if (!data.extinct) {
    throw NoExtinctionError(
        "run_extinction: v stayed above the floor through the budget (v_end = " +
        std::to_string(rep.norm_curve.back().second) +
        ", floor = " + std::to_string(rep.floor) +
        ", t_max = " + std::to_string(rep.t_max) + ")");
  }
  rep.extinction_time_emp = data.extinction_time;
  rep.bound_check.monotone = data.monotone;

  // Least-squares line through (t, v^{2-q}) on the first half-life; the decay
  // law predicts an exactly linear-or-better decrease.
  std::vector<double> ts, ys;
  for (const auto& [t, v] : rep.norm_curve) {
    if (t <= 0.5 * rep.extinction_time_emp && v > 0.0) {
      ts.push_back(t);
      ys.push_back(std::pow(v, 2.0 - q));
    }
  }
  if (ts.size() < 3) {
    throw DegenerateFitError(
        "run_extinction: fewer than 3 samples before the half-life");
  }
  const double n = static_cast<double>(ts.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sx += ts[i];
    sy += ys[i];
    sxx += ts[i] * ts[i];
    sxy += ts[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) {
    throw DegenerateFitError("run_extinction: degenerate fit abscissas");
  }
  const double b = (n * sxy - sx * sy) / denom;
  const double a = (sy - b * sx) / n;
  rep.decay_slope = -b;

  double y_lo = ys[0], y_hi = ys[0], defect = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    y_lo = std::min(y_lo, ys[i]);
    y_hi = std::max(y_hi, ys[i]);
    defect = std::max(defect, std::abs(ys[i] - (a + b * ts[i])));
  }
  rep.fit_residual = y_hi > y_lo ? defect / (y_hi - y_lo) : 0.0;
  rep.bound_check.slope_positive = rep.decay_slope > 0.0;
  rep.bound_check.fit_ok = rep.fit_residual <= 0.10;

  rep.C_emp = rep.extinction_time_emp / std::pow(data.v0, 2.0 - q);
  return rep;
}

SobolevResult sobolev_check(const RadialField& v, const ExponentTriple& e) {
  const double q = e.q();
  const double d = e.d();
  if (q >= d) {
    throw ExponentError("sobolev_check: requires q < d, got q = " +
                        std::to_string(q) + ", d = " + std::to_string(d));
  }
  if (v.values.size() < 3 || !(v.delta_r > 0.0)) {
    throw std::invalid_argument("sobolev_check: malformed field");
  }
  double max_abs = 0.0;
  for (double x : v.values) max_abs = std::max(max_abs, std::abs(x));
  if (max_abs == 0.0) return {0.0, true};
  if (std::abs(v.values.back()) > 1e-12 * max_abs) {
    throw std::invalid_argument("sobolev_check: v must vanish at r = R");
  }

  const std::size_t J = v.values.size() - 1;
  std::vector<double> deriv(J + 1);
  deriv[0] = (v.values[1] - v.values[0]) / v.delta_r;
  deriv[J] = (v.values[J] - v.values[J - 1]) / v.delta_r;
  for (std::size_t j = 1; j < J; ++j) {
    deriv[j] = (v.values[j + 1] - v.values[j - 1]) / (2.0 * v.delta_r);
  }

  const double s_lhs = d * q / (d - q);
  const double lhs = weighted_norm(v.values, v.delta_r, s_lhs, d);
  const double rhs = weighted_norm(deriv, v.delta_r, q, d);
  if (rhs == 0.0) return {0.0, true};
  return {lhs / rhs, false};
}

CounterexampleOutcome counterexample_demo(const Trajectory& traj,
                                          const HarnackConstants& constants) {
  if (!(constants.c > 0.0 && constants.sigma > 1.0 && constants.gamma >= 1.0)) {
    throw std::invalid_argument("counterexample_demo: need c > 0, sigma > 1, gamma >= 1");
  }
  const double q = traj.exponents.q();
  double max_u0 = 0.0;
  for (double v : traj.snapshots.front().u) max_u0 = std::max(max_u0, v);
  const double floor = 1e-6 * max_u0;

  // First recorded time at which the whole profile sits below the floor.
  const Snapshot* dead = nullptr;
  for (const Snapshot& s : traj.snapshots) {
    double mx = 0.0;
    for (double v : s.u) mx = std::max(mx, v);
    if (mx < floor) {
      dead = &s;
      break;
    }
  }
  CounterexampleOutcome out;
  if (dead == nullptr) {
    out.reason = "no extinction observed within the trajectory";
    return out;
  }
  const double t_dead = dead->t;

  // Admissible base times satisfy T_dead - t0 < t0/sigma^q, i.e.
  // t0 > T_dead sigma^q/(1 + sigma^q).
  const double sq = std::pow(constants.sigma, q);
  const double t_min = t_dead * sq / (1.0 + sq);
  const double dr = traj.delta_r;
  for (const Snapshot& s : traj.snapshots) {
    if (!(s.t > t_min && s.t < t_dead)) continue;
    // Center the ball on the profile maximum.
    std::size_t j_max = 0;
    for (std::size_t j = 1; j < s.u.size(); ++j) {
      if (s.u[j] > s.u[j_max]) j_max = j;
    }
    const double probe = s.u[j_max];
    if (probe <= floor) continue;
    const double x0 = dr * static_cast<double>(j_max);
    const double r =
        std::pow((t_dead - s.t) / (constants.c * std::pow(probe, 2.0 - q)),
                 1.0 / q);
    if (x0 + constants.sigma * r > traj.R) continue;

    double inf_v = std::numeric_limits<double>::infinity();
    const double lo = std::max(0.0, x0 - r) - 1e-12;
    const double hi = x0 + r + 1e-12;
    for (std::size_t j = 0; j < dead->u.size(); ++j) {
      const double rj = dr * static_cast<double>(j);
      if (rj < lo || rj > hi) continue;
      inf_v = std::min(inf_v, dead->u[j]);
    }

    out.found = true;
    out.record = {x0,    s.t,    r,
                  probe, inf_v,  t_dead,
                  constants.gamma, probe > constants.gamma * inf_v};
    return out;
  }
  throw SelectionError(
      "counterexample_demo: extinction observed but no admissible (x0,t0) fits "
      "the domain (domain too small for sigma = " +
      std::to_string(constants.sigma) + ")");
}

std::vector<DichotomyRow> run_dichotomy_sweep(const RadialField& u0, double n,
                                              double p,
                                              const std::vector<double>& q_values,
                                              const ExtinctionParams& params,
                                              int jobs) {
  if (jobs < 1) throw std::invalid_argument("run_dichotomy_sweep: jobs must be >= 1");
  const auto one_row = [&u0, n, p, &params](double q) {
    const ExponentTriple e(n, p, q);
    const CurveData data = extinction_curve(u0, e, params, e.s());
    DichotomyRow row;
    row.q = q;
    row.in_range = check_range(e).in_range;
    row.extinct = data.extinct;
    row.extinction_time = data.extinct ? data.extinction_time : -1.0;
    row.v0 = data.v0;
    row.v_end = data.curve.back().second;
    row.floor = data.floor;
    row.t_max = data.t_max;
    return row;
  };

  std::vector<DichotomyRow> rows(q_values.size());
  if (jobs == 1 || q_values.size() < 2) {
    for (std::size_t i = 0; i < q_values.size(); ++i) rows[i] = one_row(q_values[i]);
    return rows;
  }
  // Independent rows: hand out indices to a bounded pool and write results by
  // slot so the output order never depends on scheduling.
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), q_values.size());
  std::mutex error_lock;
  std::exception_ptr first_error;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < q_values.size();
           i = next.fetch_add(1)) {
        try {
          rows[i] = one_row(q_values[i]);
        } catch (...) {
          const std::lock_guard<std::mutex> guard(error_lock);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

}  // namespace hlab
