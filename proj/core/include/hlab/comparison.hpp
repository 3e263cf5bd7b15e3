#pragma once

// The three explicit comparison subsolutions, automated selection of their
// free constants from their defining inequalities, and grid certification
// that each has nonpositive residual on its validity domain.

#include <map>
#include <string>
#include <variant>

#include "hlab/exponents.hpp"

namespace hlab {

// Expanding-support subsolution (singular regime q < 2):
//   Phi(r,t) = (kappa rho^{q xi} / R(t)^xi) (1 - (r^q/R(t))^{1/(q-1)})_+^2,
//   R(t)     = eta kappa^{q-2} t + rho^q.
// supp Phi(.,t) = B_{R(t)^{1/q}}(0); 0 <= Phi <= kappa for t >= 0.
struct PhiSpec {
  double kappa;  // amplitude > 0
  double rho;    // initial support radius > 0
  double xi;     // shape exponent > 1
  double delta;  // auxiliary constant in (0,1) from the selection inequalities
};

// Near-critical subsolution (q on either side of 2, inside the admissible
// interval returned by select_g_nu):
//   G(r,t)   = (kappa rho^{nu/lambda} / Sigma(t)^nu)
//              (1 - (r/Sigma(t)^lambda)^{q/(q-1)})_+^{q/(q-1)},
//   Sigma(t) = eta kappa^{q-2} rho^{(q-2) nu/lambda} t + rho^{1/lambda},
//   lambda   = (1 - nu(q-2))/q.
struct GSpec {
  double kappa;   // amplitude > 0
  double rho;     // support scale > 0
  double nu;      // shape constant > 1
  double lambda;  // derived = (1 - nu(q-2))/q; must be > 0
};

// Annular hole-filling subsolution (singular regime q < 2):
//   Psi(r,t) = k (1-r^2)_+^{q/(q-1)} (1+z)^{-(q-1)/(2-q)},
//   z        = k^{(2-q)/(q-1)} zeta (r^q/(eta t))^{1/(q-1)},
// valid on {nu_hole < r < 1} x (0, theta), theta = nu_hole^q k^{2-q} Theta.
struct PsiSpec {
  double k;        // boundary amplitude > 0
  double nu_hole;  // inner radius in (0,1)
  double zeta;     // > 0
  double Theta;    // time-scale constant > 0
  double Z;        // z-threshold above which the annulus margin holds
  double lambda;   // = q - d(2-q); positive exactly on the admissible range
  double C1;       // gradient-bound constant q/(2-q) + 2q/(q-1)
  double C2;       // subsolution margin constant q lambda / (2(2-q))
};

using ComparisonSpec = std::variant<PhiSpec, GSpec, PsiSpec>;

// Value and closed-form derivatives at one point, for residual evaluation.
struct PointDerivatives {
  double value;
  double dt;
  double dr;
  double drr;
};

// ---- Phi -------------------------------------------------------------------

struct PhiConstants {
  double delta;
  double xi;
};

// delta found by repeated halving from 1/2 (at most 60 halvings) until
//   (n-1)/eta + 1 - q/delta < 0   and
//   2/(q-1) + (2q/(q-1))^{q-1} ((n-1)/eta + 1 - q/delta) < 0;
// xi is the closed-form lower bound
//   (2/((q-1) delta)) (e/delta)^{q-2} ((n-1)/eta + 1)
// rounded up 10% (and at least 1.1).  Requires q < 2 and the range condition.
PhiConstants select_phi_constants(const ExponentTriple& e);

double eval_phi(const PhiSpec& spec, double x_norm, double t,
                const ExponentTriple& e);
PointDerivatives phi_derivatives(const PhiSpec& spec, double r, double t,
                                 const ExponentTriple& e);
double phi_support_radius(const PhiSpec& spec, double t, const ExponentTriple& e);
// Upper end of the validity window (0, kappa^{2-q} rho^q / (eta xi)).
double phi_time_window(const PhiSpec& spec, const ExponentTriple& e);

// ---- G ---------------------------------------------------------------------

struct GNuSelection {
  double nu;    // > 1; depends on n and p but not q
  double q_lo;  // admissible interval lower end, 4 - q(nu)
  double q_hi;  // admissible interval upper end, 7/3
};

// nu maximizes a_hat (7/8 + C1/eta) (C2/(2(C1+C2)))^{-q/(q-1)} over a
// 10^4-point grid of q in [8/5, 7/3], where a = (q/(q-1))^2,
// a_hat = max{a, a^{q-1}}, C1 = ((n-1)(q-1)+p-1)/(q-1), C2 = q(p-1)/(q-1)^2
// and eta are all evaluated at the grid q.
GNuSelection select_g_nu(const ExponentTriple& e);

double g_lambda(double nu, double q);  // (1 - nu(q-2))/q
double g_q_of_nu(double nu);           // 4(1+2nu)/(1+4nu)

double eval_g(const GSpec& spec, double x_norm, double t,
              const ExponentTriple& e);
PointDerivatives g_derivatives(const GSpec& spec, double r, double t,
                               const ExponentTriple& e);
double g_support_radius(const GSpec& spec, double t, const ExponentTriple& e);
// Time for Sigma to double from its initial value; the certification window.
double g_time_window(const GSpec& spec, const ExponentTriple& e);

// ---- Psi -------------------------------------------------------------------

struct PsiConstants {
  double zeta;
  double Theta;
  double Z;
  double lambda;
  double C1;
  double C2;
};

// K1 = ((n-1)/(p-1))(2-q)/(2q), K2 = (1 + (n-1)/(p-1))(2-q)/(3q),
// K = max{K1,K2} (verified < 1), Z = K/(1-K), lambda = q - d(2-q)
// (verified > 0), C1 = q/(2-q) + 2q/(q-1), C2 = q lambda/(2(2-q)),
// zeta = smallest value with C1^{2-q}/zeta^{q-1} <= C2, rounded up 10%,
// Theta = (zeta^{q-1}/eta) min{(lambda/(2q))^{q-1}, Z^{-(q-1)}}.
// Requires q < 2 and the range condition.
PsiConstants select_psi_constants(const ExponentTriple& e);

double eval_psi(const PsiSpec& spec, double x_norm, double t,
                const ExponentTriple& e);
PointDerivatives psi_derivatives(const PsiSpec& spec, double r, double t,
                                 const ExponentTriple& e);
// theta = nu_hole^q k^{2-q} Theta, the upper end of the validity window.
double psi_time_window(const PsiSpec& spec, const ExponentTriple& e);
// Similarity variable z at (r, t).
double psi_z(const PsiSpec& spec, double r, double t, const ExponentTriple& e);
// Annulus margin E(r) = 2 q(p-1)/(2-q) z/((1+z) r)
//                     + 2 (p-1)/(q-1) r^2/(1-r^2) - p - n + 2;
// nonnegative whenever z >= Z.
double psi_annulus_margin(double r, double z, const ExponentTriple& e);

// ---- Certification -----------------------------------------------------------

struct GridSpec {
  int nr = 400;
  int nt = 400;
};

// Absolute residual tolerance after normalizing to unit amplitude.
inline constexpr double kCertifyTolerance = 1e-9;
// Cells excluded at each radial end of the grid, where the classical formula
// is not valid (critical points are handled by the viscosity definition).
inline constexpr int kBoundaryMarginCells = 2;

struct CertificateReport {
  std::string function;  // "phi", "g" or "psi"
  std::map<std::string, double> constants;
  GridSpec grid;
  double max_residual = 0.0;  // normalized to unit amplitude
  double argmax_r = 0.0;
  double argmax_t = 0.0;
  bool aux_ok = true;  // psi only: E(r) >= 0 scan over the grid
  bool pass = false;
};

// Evaluates the closed-form derivatives and residual_npq at every node of a
// cell-centered (r,t) grid inside the validity domain (radial extent follows
// the support at each time; kBoundaryMarginCells cells dropped at both radial
// ends).  pass iff the amplitude-normalized max residual is at most
// kCertifyTolerance and, for Psi, the E(r) scan holds.
CertificateReport certify_subsolution(const ComparisonSpec& spec,
                                      const ExponentTriple& e,
                                      const GridSpec& grid = {});

}  // namespace hlab
