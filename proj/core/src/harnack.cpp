#include "hlab/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hlab/errors.hpp"

namespace hlab {
namespace {

double max_initial(const Trajectory& traj) {
  double m = 0.0;
  for (double v : traj.snapshots.front().u) m = std::max(m, v);
  return m;
}

// Index of the last snapshot with time <= t (times are strictly increasing).
std::size_t lower_snapshot(const Trajectory& traj, double t) {
  const auto& s = traj.snapshots;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].t <= t) lo = i;
    else break;
  }
  return lo;
}

// Linear time interpolation weights over the bracketing snapshot pair.
struct TimeBracket {
  std::size_t i0, i1;
  double w1;  // weight of snapshot i1
};

TimeBracket time_bracket(const Trajectory& traj, double t) {
  const auto& s = traj.snapshots;
  const double t_lo = s.front().t, t_hi = s.back().t;
  const double slack = 1e-12 * (1.0 + t_hi);
  if (t < t_lo - slack || t > t_hi + slack) {
    throw GeometryError("time " + std::to_string(t) +
                        " outside trajectory range [" + std::to_string(t_lo) +
                        ", " + std::to_string(t_hi) + "]");
  }
  const std::size_t i0 = lower_snapshot(traj, t);
  if (i0 + 1 >= s.size()) return {i0, i0, 0.0};
  const double gap = s[i0 + 1].t - s[i0].t;
  const double w1 = gap > 0.0 ? std::clamp((t - s[i0].t) / gap, 0.0, 1.0) : 0.0;
  return {i0, i0 + 1, w1};
}

double node_value_at(const Trajectory& traj, const TimeBracket& b, std::size_t j) {
  const double v0 = traj.snapshots[b.i0].u[j];
  if (b.w1 == 0.0) return v0;
  return (1.0 - b.w1) * v0 + b.w1 * traj.snapshots[b.i1].u[j];
}

}  // namespace

double trajectory_value(const Trajectory& traj, double x, double t) {
  if (x < 0.0 || x > traj.R * (1.0 + 1e-12)) {
    throw GeometryError("probe point |x| = " + std::to_string(x) +
                        " outside the domain radius " + std::to_string(traj.R));
  }
  const TimeBracket b = time_bracket(traj, t);
  const double pos = std::min(x / traj.delta_r,
                              static_cast<double>(traj.snapshots.front().u.size() - 1));
  const std::size_t j = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(j);
  const double v0 = node_value_at(traj, b, j);
  if (frac == 0.0) return v0;
  return (1.0 - frac) * v0 + frac * node_value_at(traj, b, j + 1);
}

namespace {

HarnackReport run_check(const Trajectory& traj, const HarnackQuery& query,
                        Direction dir) {
  if (!(query.r > 0.0)) throw std::invalid_argument("harnack: r must be > 0");
  if (!(query.c > 0.0)) throw std::invalid_argument("harnack: c must be > 0");
  if (!(query.mu >= 1.0)) throw std::invalid_argument("harnack: mu must be >= 1");
  if (!(query.sigma >= 1.0)) throw std::invalid_argument("harnack: sigma must be >= 1");

  const double q = traj.exponents.q();
  const double floor = kPositivityFloorRel * max_initial(traj);

  const double probe = trajectory_value(traj, query.x0, query.t0);
  if (probe <= floor) {
    throw DeadPointError("harnack: u(x0,t0) = " + std::to_string(probe) +
                         " at or below the positivity floor " + std::to_string(floor));
  }
  const double theta = query.c * std::pow(probe, 2.0 - q);

  // Containment of the probe cylinder (x0,t0) + Q_{sigma r}(theta): the
  // spatial ball must stay inside |x| < R and the two-sided time window
  // inside the recorded trajectory.
  const double big_r = query.sigma * query.r;
  const double span = theta * std::pow(big_r, q);
  const double t_lo = traj.snapshots.front().t, t_hi = traj.snapshots.back().t;
  const double sp_slack = 1e-12 * (1.0 + traj.R);
  const double tm_slack = 1e-12 * (1.0 + t_hi);
  if (query.x0 < 0.0 || query.x0 + big_r > traj.R + sp_slack) {
    throw GeometryError("harnack: spatial side, x0 + sigma r = " +
                        std::to_string(query.x0 + big_r) + " exceeds R = " +
                        std::to_string(traj.R));
  }
  if (query.t0 - span < t_lo - tm_slack) {
    throw GeometryError("harnack: temporal side, t0 - theta (sigma r)^q = " +
                        std::to_string(query.t0 - span) + " precedes t = " +
                        std::to_string(t_lo));
  }
  if (query.t0 + span > t_hi + tm_slack) {
    throw GeometryError("harnack: temporal side, t0 + theta (sigma r)^q = " +
                        std::to_string(query.t0 + span) + " exceeds t = " +
                        std::to_string(t_hi));
  }

  const double wait = theta * std::pow(query.r, q);
  const double t_sample = dir == Direction::forward ? query.t0 + wait
                                                    : query.t0 - wait;
  const TimeBracket b = time_bracket(traj, t_sample);

  const double lo = std::max(0.0, query.x0 - query.r) - 1e-12;
  const double hi = query.x0 + query.r + 1e-12;
  double inf_v = std::numeric_limits<double>::infinity();
  double sup_v = -std::numeric_limits<double>::infinity();
  bool any = false;
  const std::size_t n_nodes = traj.snapshots.front().u.size();
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const double rj = traj.delta_r * static_cast<double>(j);
    if (rj < lo || rj > hi) continue;
    const double v = node_value_at(traj, b, j);
    inf_v = std::min(inf_v, v);
    sup_v = std::max(sup_v, v);
    any = true;
  }
  if (!any) {
    throw GeometryError("harnack: no grid node inside B_r(x0); r below grid resolution");
  }

  HarnackReport rep;
  rep.theta = theta;
  rep.probe_value = probe;
  rep.geometry_ok = true;
  rep.extremum = dir == Direction::forward ? inf_v : sup_v;
  if (rep.extremum <= 0.0) {
    rep.empirical_mu = std::numeric_limits<double>::infinity();
  } else {
    rep.empirical_mu = dir == Direction::forward ? probe / inf_v : sup_v / probe;
  }
  rep.pass = rep.empirical_mu <= query.mu && rep.geometry_ok;
  return rep;
}

}  // namespace

HarnackReport forward_check(const Trajectory& traj, const HarnackQuery& query) {
  return run_check(traj, query, Direction::forward);
}

HarnackReport backward_check(const Trajectory& traj, const HarnackQuery& query) {
  return run_check(traj, query, Direction::backward);
}

SweepTable empirical_mu_sweep(const Trajectory& traj,
                              const std::vector<BasePoint>& base_points,
                              const std::vector<double>& radii, double c) {
  SweepTable table;
  for (Direction dir : {Direction::forward, Direction::backward}) {
    for (double r : radii) {
      SweepAggregate agg;
      agg.direction = dir;
      agg.r = r;
      for (const BasePoint& bp : base_points) {
        SweepRow row;
        row.direction = dir;
        row.x0 = bp.x0;
        row.t0 = bp.t0;
        row.r = r;
        row.c = c;
        HarnackQuery query{bp.x0, bp.t0, r, c,
                           std::numeric_limits<double>::infinity(), dir};
        try {
          const HarnackReport rep = run_check(traj, query, dir);
          row.theta = rep.theta;
          row.extremum = rep.extremum;
          row.empirical_mu = rep.empirical_mu;
          row.pass = std::isfinite(rep.empirical_mu);
          agg.max_mu = std::max(agg.max_mu, rep.empirical_mu);
          ++agg.evaluated;
        } catch (const GeometryError& err) {
          row.skipped = true;
          row.reason = err.what();
          ++agg.skipped;
        } catch (const DeadPointError& err) {
          row.skipped = true;
          row.reason = err.what();
          ++agg.skipped;
        }
        table.rows.push_back(std::move(row));
      }
      table.aggregates.push_back(agg);
    }
  }
  return table;
}

double ChainParams::rho(int i, double r) const {
  return std::pow(base.tilde_mu, (2.0 - q) * static_cast<double>(i) / q) * alpha * r;
}

ChainParams chain_constants(double sigma_t, double sigma, const ChainBase& base,
                            const ExponentTriple& e) {
  if (!(sigma_t > 1.0)) throw std::invalid_argument("chain: sigma_t must exceed 1");
  if (!(sigma > 1.0)) throw std::invalid_argument("chain: sigma must exceed 1");
  if (!(base.tilde_c > 0.0)) throw std::invalid_argument("chain: tilde_c must be > 0");
  if (!(base.tilde_mu >= 1.0)) throw std::invalid_argument("chain: tilde_mu must be >= 1");
  if (!(base.tilde_sigma > 1.0)) throw std::invalid_argument("chain: tilde_sigma must exceed 1");

  const double q = e.q();
  ChainParams p;
  p.sigma_t = sigma_t;
  p.sigma = sigma;
  p.base = base;
  p.q = q;

  if (sigma_t >= base.tilde_sigma) {
    // The base constants already certify the requested time slack.
    p.passthrough = true;
    p.kappa = 1.0;
    p.alpha = 1.0;
    p.c_time = base.tilde_c;
    p.mu_time = base.tilde_mu;
    p.max_time_steps = 1;
  } else {
    p.kappa = (std::pow(base.tilde_sigma, q) - 1.0) / (std::pow(sigma_t, q) - 1.0);
    p.alpha = std::pow(p.kappa, -1.0 / q);
    const double ceil_k = std::ceil(p.kappa);
    p.c_time = base.tilde_c * (ceil_k + 1.0) / p.kappa;
    p.mu_time = std::pow(base.tilde_mu, ceil_k + 1.0);
    p.max_time_steps = static_cast<int>(ceil_k) + 1;
  }
  p.sigma_x =
      p.alpha * (base.tilde_sigma *
                     std::max(1.0, std::pow(base.tilde_mu,
                                            (2.0 - q) / q * std::ceil(p.kappa))) +
                 1.0);
  p.varrho = (sigma - 1.0) / p.sigma_x;
  const double k_space = std::ceil(1.0 / (p.alpha * p.varrho)) + 1.0;
  p.max_space_steps = static_cast<int>(k_space);
  double budget = 0.0;
  for (int k = 1; k <= p.max_space_steps; ++k) {
    budget += std::pow(base.tilde_mu, (q - 2.0) * static_cast<double>(k - 1));
  }
  p.c_space = base.tilde_c * std::pow(p.varrho, q) * budget;
  p.mu_space = std::pow(base.tilde_mu, k_space);
  return p;
}

namespace {

// One chain application of the forward check; geometry failures become
// RoomError with the offending side in the message.
HarnackReport chain_check(const Trajectory& traj, double x, double t, double rho,
                          const ChainParams& params) {
  HarnackQuery query;
  query.x0 = x;
  query.t0 = t;
  query.r = rho;
  query.c = params.base.tilde_c;
  query.mu = params.base.tilde_mu;
  query.sigma = params.base.tilde_sigma;
  query.direction = Direction::forward;
  try {
    return forward_check(traj, query);
  } catch (const GeometryError& err) {
    throw RoomError(std::string("chain: intermediate application exits the domain (") +
                    err.what() + ")");
  }
}

}  // namespace

ChainTrace run_chain(const Trajectory& traj, ChainPoint start, ChainPoint target,
                     const ChainParams& params) {
  if (target.t < start.t) {
    throw std::invalid_argument("run_chain: target time precedes start time");
  }
  const double dr = traj.delta_r;
  const double t_final = traj.snapshots.back().t;
  // Snap both endpoints to grid nodes so chain values are space-exact.
  auto snap = [&](double x) { return dr * std::round(x / dr); };
  double x = snap(start.x);
  double t = start.t;
  const double x_hat = snap(target.x);
  const double t_hat = std::min(target.t, t_final);

  ChainTrace trace;
  trace.steps.push_back({x, t, trajectory_value(traj, x, t), 0.0, 's'});

  const double mu = params.base.tilde_mu;
  const double q = params.q;
  const double time_tol = 1e-12 * (1.0 + t_final);

  // --- Spatial phase: whole-cell moves toward x_hat. -------------------------
  const double span = std::abs(x_hat - x);
  if (span > 0.0) {
    const double rho_space = params.alpha * params.varrho * span;
    const long step_cells = static_cast<long>(std::floor(rho_space / dr));
    if (step_cells < 1) {
      throw RoomError("chain: spatial side, planned step " +
                      std::to_string(rho_space) + " is below one grid cell");
    }
    while (std::abs(x_hat - x) > 0.5 * dr) {
      const long remaining_cells =
          static_cast<long>(std::round(std::abs(x_hat - x) / dr));
      const long move = std::min(step_cells, remaining_cells);
      const HarnackReport rep = chain_check(traj, x, t, rho_space, params);
      const double direction_sign = x_hat > x ? 1.0 : -1.0;
      x += direction_sign * static_cast<double>(move) * dr;
      // Re-snap to the exact node: accumulated roundoff a hair below zero
      // would otherwise read as a probe outside the domain.
      x = dr * std::round(x / dr);
      t += rep.theta * std::pow(rho_space, q);
      if (t > t_hat + time_tol) {
        throw RoomError("chain: temporal side, waiting periods of the spatial "
                        "phase overshoot the target time");
      }
      ++trace.space_steps;
      if (trace.space_steps > params.max_space_steps) {
        throw std::logic_error("run_chain: spatial step bound exceeded");
      }
      trace.steps.push_back({x, t, trajectory_value(traj, x, t), rho_space, 'x'});
    }
    x = x_hat;
  }

  // --- Time phase at fixed x: geometric radius schedule, last step clamped. --
  if (t_hat - t > time_tol) {
    const double u_here = trajectory_value(traj, x, t);
    const double r_time =
        std::pow((t_hat - t) / (params.c_time * std::pow(u_here, 2.0 - q)),
                 1.0 / q);
    int i = 0;
    while (t_hat - t > time_tol) {
      const double u_now = trajectory_value(traj, x, t);
      const double theta_now = params.base.tilde_c * std::pow(u_now, 2.0 - q);
      double rho_i = params.rho(i, r_time);
      // Clamp the final radius so the step lands exactly on the target time.
      const double rho_land = std::pow((t_hat - t) / theta_now, 1.0 / q);
      bool landing = false;
      if (rho_land <= rho_i) {
        rho_i = rho_land;
        landing = true;
      }
      const HarnackReport rep = chain_check(traj, x, t, rho_i, params);
      t = landing ? t_hat : t + rep.theta * std::pow(rho_i, q);
      ++trace.time_steps;
      if (trace.time_steps > params.max_time_steps) {
        throw std::logic_error("run_chain: time step bound exceeded");
      }
      trace.steps.push_back({x, t, trajectory_value(traj, x, t), rho_i, 't'});
      ++i;
    }
  }

  trace.mu_total = std::pow(mu, static_cast<double>(trace.space_steps + trace.time_steps));
  const double u_start = trace.steps.front().u;
  const double u_target = trace.steps.back().u;
  trace.certified = u_start <= trace.mu_total * u_target * (1.0 + 1e-6);
  return trace;
}

OscillationFit oscillation_decay(const Trajectory& traj, double center_x,
                                 double center_t, double R_base,
                                 const std::vector<double>& rho_list) {
  if (!(R_base > 0.0)) throw std::invalid_argument("oscillation_decay: R_base must be > 0");
  if (rho_list.size() < 2) {
    throw std::invalid_argument("oscillation_decay: need at least 2 radii");
  }
  const TimeBracket b = time_bracket(traj, center_t);
  const std::size_t n_nodes = traj.snapshots.front().u.size();

  std::vector<double> xs, ys;
  for (double rho : rho_list) {
    if (!(rho > 0.0 && rho <= R_base)) {
      throw std::invalid_argument("oscillation_decay: radii must lie in (0, R_base]");
    }
    if (center_x + rho > traj.R * (1.0 + 1e-12)) {
      throw GeometryError("oscillation_decay: ball of radius " + std::to_string(rho) +
                          " exits the domain");
    }
    const double lo = std::max(0.0, center_x - rho) - 1e-12;
    const double hi = center_x + rho + 1e-12;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n_nodes; ++j) {
      const double rj = traj.delta_r * static_cast<double>(j);
      if (rj < lo || rj > hi) continue;
      const double v = node_value_at(traj, b, j);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    const double osc = mx - mn;
    if (!(osc > 1e-300)) {
      throw DegenerateFitError("oscillation_decay: oscillation underflow at rho = " +
                               std::to_string(rho));
    }
    xs.push_back(std::log(rho / R_base));
    ys.push_back(std::log(osc));
  }

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) {
    throw DegenerateFitError("oscillation_decay: degenerate abscissas (identical radii)");
  }
  OscillationFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.n_points = static_cast<int>(xs.size());
  return fit;
}

Trajectory scaled_trajectory(const Trajectory& traj, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scaled_trajectory: lambda must be > 0");
  const double time_factor = std::pow(lambda, 2.0 - traj.exponents.q());
  Trajectory out = traj;
  for (Snapshot& s : out.snapshots) {
    s.t *= time_factor;
    for (double& v : s.u) v *= lambda;
  }
  return out;
}

}  // namespace hlab
