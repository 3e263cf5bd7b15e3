#pragma once

// Closed-form reference solutions used as oracles by the tests and the
// acceptance suite.  Both are exact solutions of special cases of the radial
// equation, so solver output can be compared against them directly.

namespace hlab::reference {

// Radial solution of the heat equation u_t = Laplace(u) in n dimensions with
// Gaussian initial data u(r,0) = exp(-r^2/(4a)):
//   u(r,t) = (a/(a+t))^{n/2} exp(-r^2 / (4(a+t))).
// Requires a > 0 and t >= 0.
double heat_kernel_radial(double r, double t, double a, int n);

// Source-type self-similar solution of the one-dimensional flux law
// u_t = (|u_x|^{q-2} u_x)_x for q > 2:
//   B(x,t) = t^{-alpha} (C - beta (|x| t^{-alpha})^{q/(q-1)})_+^{(q-1)/(q-2)}
// with alpha = 1/(2(q-1)) and beta = ((q-2)/q) (2(q-1))^{-1/(q-1)}.
// Requires t > 0, C > 0, q > 2.
double barenblatt_profile(double x, double t, double C, double q);

// alpha = 1/(2(q-1)), the self-similar time exponent of barenblatt_profile.
double barenblatt_alpha(double q);

// beta = ((q-2)/q) (2(q-1))^{-1/(q-1)}, the profile coefficient.
double barenblatt_beta(double q);

// Radius of the support of B(.,t): (C/beta)^{(q-1)/q} t^{alpha}.
double barenblatt_support_edge(double t, double C, double q);

}  // namespace hlab::reference
