#include "hlab/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace hlab::reference {

double heat_kernel_radial(double r, double t, double a, int n) {
  if (!(a > 0.0)) throw std::domain_error("heat_kernel_radial: a must be > 0");
  if (!(t >= 0.0)) throw std::domain_error("heat_kernel_radial: t must be >= 0");
  const double s = a + t;
  return std::pow(a / s, 0.5 * n) * std::exp(-r * r / (4.0 * s));
}

double barenblatt_alpha(double q) { return 1.0 / (2.0 * (q - 1.0)); }

double barenblatt_beta(double q) {
  return (q - 2.0) / q * std::pow(2.0 * (q - 1.0), -1.0 / (q - 1.0));
}

double barenblatt_profile(double x, double t, double C, double q) {
  if (!(q > 2.0)) throw std::domain_error("barenblatt_profile: q must be > 2");
  if (!(t > 0.0)) throw std::domain_error("barenblatt_profile: t must be > 0");
  if (!(C > 0.0)) throw std::domain_error("barenblatt_profile: C must be > 0");
  const double alpha = barenblatt_alpha(q);
  const double beta = barenblatt_beta(q);
  const double xi = std::abs(x) * std::pow(t, -alpha);
  const double bracket = C - beta * std::pow(xi, q / (q - 1.0));
  if (bracket <= 0.0) return 0.0;
  return std::pow(t, -alpha) * std::pow(bracket, (q - 1.0) / (q - 2.0));
}

double barenblatt_support_edge(double t, double C, double q) {
  if (!(q > 2.0)) throw std::domain_error("barenblatt_support_edge: q must be > 2");
  if (!(t > 0.0)) throw std::domain_error("barenblatt_support_edge: t must be > 0");
  if (!(C > 0.0)) throw std::domain_error("barenblatt_support_edge: C must be > 0");
  return std::pow(C / barenblatt_beta(q), (q - 1.0) / q) *
         std::pow(t, barenblatt_alpha(q));
}

}  // namespace hlab::reference
