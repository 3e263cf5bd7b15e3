#include "hlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hlab/errors.hpp"

namespace hlab {
namespace {

// (g^2 + eps^2)^{(q-2)/2} with fast paths for the two exactly representable
// exponents exercised most (q = 2 and q = 3).
double a_eps(double g, double eps2, double q) {
  if (q == 2.0) return 1.0;
  const double s2 = g * g + eps2;
  if (q == 3.0) return std::sqrt(s2);
  return std::pow(s2, 0.5 * (q - 2.0));
}

// sign(g) |g|^{q-1}, with the exact-zero convention for singular q.
double exact_flux(double g, double q) {
  if (g == 0.0) return 0.0;
  return (g > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(g), q - 1.0);
}

std::vector<double> snapshot_schedule(double t_final, const SolverParams& p) {
  std::vector<double> times;
  if (p.snapshot_count > 0) {
    const int n = p.snapshot_count;
    const double t_min = 1e-4 * t_final;
    for (int k = 0; k < n; ++k) {
      const double frac = (n == 1) ? 1.0 : static_cast<double>(k) / (n - 1);
      times.push_back(t_min * std::pow(t_final / t_min, frac));
    }
  }
  for (double t : p.snapshot_times) {
    if (!(t > 0.0 && t <= t_final * (1.0 + 1e-12))) {
      throw std::invalid_argument("solve: requested snapshot time outside (0, t_final]");
    }
    times.push_back(std::min(t, t_final));
  }
  times.push_back(t_final);
  std::sort(times.begin(), times.end());
  // Merge times closer than 1e-12 t_final.
  std::vector<double> unique_times;
  for (double t : times) {
    if (unique_times.empty() || t - unique_times.back() > 1e-12 * t_final) {
      unique_times.push_back(t);
    }
  }
  return unique_times;
}

}  // namespace

Trajectory solve(const RadialField& u0, double t_final, const ExponentTriple& e,
                 const SolverParams& params) {
  const std::size_t J1 = u0.values.size();
  if (J1 < 4) throw std::invalid_argument("solve: need at least 4 grid nodes");
  if (!(u0.delta_r > 0.0)) throw std::invalid_argument("solve: delta_r must be > 0");
  if (std::abs(u0.R - u0.delta_r * static_cast<double>(J1 - 1)) >
      1e-9 * (1.0 + u0.R)) {
    throw std::invalid_argument("solve: R inconsistent with delta_r and node count");
  }
  if (!(t_final > 0.0)) throw std::invalid_argument("solve: t_final must be > 0");

  double max_u0 = 0.0;
  for (double v : u0.values) {
    if (v < 0.0) throw std::invalid_argument("solve: initial data must be nonnegative");
    max_u0 = std::max(max_u0, v);
  }
  if (max_u0 <= 0.0) throw std::invalid_argument("solve: initial data is identically zero");
  if (u0.values.back() > 1e-12 * max_u0) {
    throw std::invalid_argument("solve: u0 must vanish at r = R (Dirichlet data)");
  }

  const double q = e.q();
  const double d = e.d();
  const double eta = e.eta();
  const double dr = u0.delta_r;
  const std::size_t J = J1 - 1;  // Dirichlet node index

  SolverParams used = params;
  if (used.eps_grad <= 0.0) used.eps_grad = 1e-8 * max_u0 / u0.R;
  const double eps2 = used.eps_grad * used.eps_grad;

  std::vector<double> u = u0.values;
  u.back() = 0.0;

  // Geometric weights: node volumes r_j^{d-1} and face areas r_{j+1/2}^{d-1}.
  std::vector<double> node_w(J1), face_w(J);
  for (std::size_t j = 0; j < J1; ++j) {
    node_w[j] = std::pow(dr * static_cast<double>(j), d - 1.0);
  }
  for (std::size_t j = 0; j < J; ++j) {
    face_w[j] = std::pow(dr * (static_cast<double>(j) + 0.5), d - 1.0);
  }

  const std::vector<double> snap_times = snapshot_schedule(t_final, used);
  Trajectory traj{{}, e, used, dr, u0.R, false};
  traj.snapshots.push_back({0.0, u});

  const double blow_up_cap = 1e3 * max_u0;
  const double origin_gain = 2.0 * (q + d - 2.0) / (dr * dr);

  std::vector<double> face_a(J), u_new(J1);
  std::size_t next_snap = 0;
  double t = 0.0;

  const bool conservative = used.form == DiscreteForm::conservative;
  while (next_snap < snap_times.size()) {
    // Face (or node-centered) diffusivities for this step.
    double prev_max = 0.0, prev_min = u[0];
    for (double v : u) {
      prev_max = std::max(prev_max, v);
      prev_min = std::min(prev_min, v);
    }
    if (used.stop_value_floor > 0.0 && prev_max <= used.stop_value_floor) {
      if (traj.snapshots.back().t < t) traj.snapshots.push_back({t, u});
      traj.stopped_early = true;
      break;
    }

    for (std::size_t j = 0; j < J; ++j) {
      face_a[j] = a_eps((u[j + 1] - u[j]) / dr, eps2, q);
    }

    // Per-node monotonicity bound: the update must stay a convex combination
    // of neighbors, including the origin rule.
    double inv_dt_max = eta * origin_gain * face_a[0];
    if (conservative) {
      for (std::size_t j = 1; j < J; ++j) {
        const double c = eta * (face_w[j] * face_a[j] + face_w[j - 1] * face_a[j - 1]) /
                         (node_w[j] * dr * dr);
        inv_dt_max = std::max(inv_dt_max, c);
      }
    } else {
      for (std::size_t j = 1; j < J; ++j) {
        const double gc = (u[j + 1] - u[j - 1]) / (2.0 * dr);
        const double ac = a_eps(gc, eps2, q);
        const double c = eta * ac * 2.0 * (q - 1.0) / (dr * dr);
        inv_dt_max = std::max(inv_dt_max, c);
      }
    }
    double a_max = 0.0;
    for (double a : face_a) a_max = std::max(a_max, a);
    const double dt_diffusive =
        used.cfl * dr * dr / (eta * a_max * (q + d - 2.0));
    double dt = std::min(dt_diffusive, 0.9 / inv_dt_max);

    bool lands_snapshot = false;
    const double t_next = snap_times[next_snap];
    if (t + dt >= t_next - 1e-15 * t_final) {
      dt = t_next - t;
      lands_snapshot = true;
    }
    if (dt < 1e-16 * t_final) {
      throw NonConvergenceError("solve: stable time step collapsed below 1e-16 t_final at t = " +
                                std::to_string(t));
    }

    // Origin: one-sided face gradient in the coefficient, matching the
    // r -> 0 limit of the radial operator (factor q + d - 2).
    u_new[0] = u[0] + dt * eta * origin_gain * face_a[0] * (u[1] - u[0]);
    if (conservative) {
      for (std::size_t j = 1; j < J; ++j) {
        const double flux_hi = face_w[j] * face_a[j] * (u[j + 1] - u[j]);
        const double flux_lo = face_w[j - 1] * face_a[j - 1] * (u[j] - u[j - 1]);
        u_new[j] = u[j] + dt * eta * (flux_hi - flux_lo) / (node_w[j] * dr * dr);
      }
    } else {
      for (std::size_t j = 1; j < J; ++j) {
        const double gc = (u[j + 1] - u[j - 1]) / (2.0 * dr);
        const double ac = a_eps(gc, eps2, q);
        const double lap = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dr * dr);
        const double rj = dr * static_cast<double>(j);
        u_new[j] = u[j] + dt * eta * ac * ((q - 1.0) * lap + (d - 1.0) * gc / rj);
      }
    }
    u_new[J] = 0.0;
    u.swap(u_new);
    t = lands_snapshot ? t_next : t + dt;

    double step_max = 0.0, step_min = u[0];
    for (double v : u) {
      step_max = std::max(step_max, v);
      step_min = std::min(step_min, v);
    }
    const double slack = 1e-12 * (1.0 + prev_max);
    if (step_max > prev_max + slack || step_min < prev_min - slack) {
      throw std::logic_error("solve: discrete max/min principle violated at t = " +
                             std::to_string(t));
    }
    if (step_max > blow_up_cap) {
      throw BlowUpError("solve: solution exceeded 10^3 max u0 at t = " +
                        std::to_string(t));
    }

    if (lands_snapshot) {
      traj.snapshots.push_back({t, u});
      ++next_snap;
    }
  }
  return traj;
}

double weighted_norm(const std::vector<double>& values, double delta_r,
                     double s, double d) {
  if (!(s > 0.0)) throw std::invalid_argument("weighted_norm: s must be > 0");
  if (!(d >= 1.0)) throw std::invalid_argument("weighted_norm: d must be >= 1");
  if (!(delta_r > 0.0)) throw std::invalid_argument("weighted_norm: delta_r must be > 0");
  if (values.size() < 2) throw std::invalid_argument("weighted_norm: need >= 2 nodes");

  double acc = 0.0;
  const std::size_t J = values.size() - 1;
  for (std::size_t j = 0; j <= J; ++j) {
    const double r = delta_r * static_cast<double>(j);
    const double w = (j == 0 || j == J) ? 0.5 * delta_r : delta_r;
    const double geom = (j == 0 && d > 1.0) ? 0.0 : std::pow(r, d - 1.0);
    acc += w * std::pow(std::abs(values[j]), s) * geom;
  }
  return std::pow(acc, 1.0 / s);
}

double weighted_norm(const RadialField& field, double s, double d) {
  return weighted_norm(field.values, field.delta_r, s, d);
}

TestFunction bump_test_function(double r0, double r_width, double t0,
                                double t_width) {
  if (!(r_width > 0.0 && t_width > 0.0)) {
    throw std::invalid_argument("bump_test_function: widths must be positive");
  }
  auto bump = [](double x) {
    const double s = 1.0 - x * x;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
  };
  auto bump_prime = [bump](double x) {
    const double s = 1.0 - x * x;
    if (s <= 0.0) return 0.0;
    return bump(x) * (-2.0 * x / (s * s));
  };
  TestFunction phi;
  phi.value = [=](double r, double t) {
    return bump((r - r0) / r_width) * bump((t - t0) / t_width);
  };
  phi.dr = [=](double r, double t) {
    return bump_prime((r - r0) / r_width) / r_width * bump((t - t0) / t_width);
  };
  phi.dt = [=](double r, double t) {
    return bump((r - r0) / r_width) * bump_prime((t - t0) / t_width) / t_width;
  };
  return phi;
}

double weak_form_residual(const Trajectory& traj, const TestFunction& phi,
                          double t1, double t2) {
  if (!(t2 > t1)) throw std::invalid_argument("weak_form_residual: need t2 > t1");
  const ExponentTriple& e = traj.exponents;
  const double q = e.q();
  const double d = e.d();
  const double eta = e.eta();
  const double dr = traj.delta_r;

  std::vector<const Snapshot*> window;
  for (const Snapshot& s : traj.snapshots) {
    if (s.t >= t1 - 1e-12 * t2 && s.t <= t2 + 1e-12 * t2) window.push_back(&s);
  }
  if (window.size() < 2) {
    throw std::invalid_argument("weak_form_residual: fewer than 2 snapshots in [t1, t2]");
  }

  const std::size_t J1 = window.front()->u.size();
  const std::size_t J = J1 - 1;

  // Support checks: phi must vanish at the lateral boundary throughout the
  // window and at both temporal endpoints.
  const double abs_tol = 1e-14;
  for (const Snapshot* s : window) {
    if (std::abs(phi.value(traj.R, s->t)) > abs_tol ||
        std::abs(phi.value(traj.R - dr, s->t)) > abs_tol) {
      throw SupportViolationError("weak_form_residual: phi does not vanish near r = R");
    }
  }
  for (double tb : {window.front()->t, window.back()->t}) {
    for (std::size_t j = 0; j < J1; ++j) {
      if (std::abs(phi.value(dr * static_cast<double>(j), tb)) > abs_tol) {
        throw SupportViolationError(
            "weak_form_residual: phi does not vanish at the temporal endpoints");
      }
    }
  }

  // Spatial integrand at one snapshot: trapezoid over nodes for u phi_t,
  // midpoint faces for the flux term.
  auto integrand = [&](const Snapshot& s, double& abs_mass) {
    double acc = 0.0;
    for (std::size_t j = 0; j < J1; ++j) {
      const double r = dr * static_cast<double>(j);
      const double w = (j == 0 || j == J) ? 0.5 * dr : dr;
      const double geom = (j == 0 && d > 1.0) ? 0.0 : std::pow(r, d - 1.0);
      const double term = w * geom * s.u[j] * phi.dt(r, s.t);
      acc += term;
      abs_mass += std::abs(term);
    }
    for (std::size_t j = 0; j < J; ++j) {
      const double r_face = dr * (static_cast<double>(j) + 0.5);
      const double g = (s.u[j + 1] - s.u[j]) / dr;
      const double term = -eta * dr * std::pow(r_face, d - 1.0) *
                          exact_flux(g, q) * phi.dr(r_face, s.t);
      acc += term;
      abs_mass += std::abs(term);
    }
    return acc;
  };

  double total = 0.0;
  double denom = 0.0;
  std::vector<double> vals(window.size()), abs_vals(window.size(), 0.0);
  for (std::size_t i = 0; i < window.size(); ++i) {
    vals[i] = integrand(*window[i], abs_vals[i]);
  }
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    const double w = 0.5 * (window[i + 1]->t - window[i]->t);
    total += w * (vals[i] + vals[i + 1]);
    denom += w * (abs_vals[i] + abs_vals[i + 1]);
  }
  if (denom == 0.0) return 0.0;
  return std::abs(total) / denom;
}

}  // namespace hlab
