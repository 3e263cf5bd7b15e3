#include "hlab/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hlab/errors.hpp"

namespace hlab {
namespace {

// pow for a strictly positive base, routed through exp/log so that exponents
// of order 1/(q-1) near q = 1 degrade by graceful underflow/overflow of the
// logarithm rather than by pow's corner cases.  Exact zeros are handled by
// the callers before any power is formed.
double powp(double base, double expo) {
  return std::exp(expo * std::log(base));
}

void require_singular_in_range(const ExponentTriple& e, const char* who) {
  if (e.q() >= 2.0) {
    throw RegimeError(std::string(who) + ": requires the singular regime q < 2");
  }
  if (!check_range(e).in_range) {
    throw RegimeError(std::string(who) + ": exponents violate the range condition");
  }
}

}  // namespace

// ---- Phi -------------------------------------------------------------------

PhiConstants select_phi_constants(const ExponentTriple& e) {
  require_singular_in_range(e, "select_phi_constants");
  const double q = e.q();
  const double base = (e.n() - 1.0) / e.eta() + 1.0;

  // Normalizing the residual by the positive factor eta kappa^{q-1}
  // rho^{q xi} F / R^{xi+1} leaves
  //   L = -xi*F + (2/(q-1))*w + m * X^{q-2} * (B - q*w/F),
  // with w = 1 - F in (0,1), m = (2q/(q-1))^{q-1}, B = (n-1)/eta + 1, and
  // X = c*F where c = (rho^q/R(t))^xi ranges over [1/e, 1] on the validity
  // window.  delta marks the edge region F < delta where the bracket is
  // negative enough that L < 0 independently of xi (using w > 1-delta and
  // X^{q-2} >= 1); the halving loop enforces exactly that.
  double delta = 0.5;
  bool found = false;
  for (int i = 0; i < 60; ++i) {
    const double bracket = base - q * (1.0 - delta) / delta;
    const bool first = bracket < 0.0;
    const bool second =
        2.0 / (q - 1.0) + powp(2.0 * q / (q - 1.0), q - 1.0) * bracket < 0.0;
    if (first && second) {
      found = true;
      break;
    }
    delta *= 0.5;
  }
  if (!found) {
    throw SelectionError("select_phi_constants: no admissible delta after 60 halvings");
  }

  // xi must dominate the xi-free part of L/F for every F in (0,1] under the
  // worst admissible c: c = 1/e when the bracket is nonnegative (it inflates
  // X^{q-2}), c = 1 when it is negative (X^{q-2} >= F^{q-2} then preserves
  // the most of the sign).  A dense scan of the scalar profile is exact
  // enough; the 1.1 safety factor dwarfs the scan's resolution error.  The
  // closed-form edge-region bound below is kept as a floor so the reported
  // constant also dominates it.
  const double a = 2.0 / (q - 1.0);
  const double m = powp(2.0 * q / (q - 1.0), q - 1.0);
  double sup = 1.0;
  constexpr int kScanSamples = 20000;
  for (int i = 1; i <= kScanSamples; ++i) {
    const double F = static_cast<double>(i) / kScanSamples;
    const double bracket = base - q * (1.0 - F) / F;
    const double weight = bracket >= 0.0
                              ? powp(F / std::numbers::e, q - 2.0)
                              : powp(F, q - 2.0);
    const double h = (a * (1.0 - F) + m * weight * bracket) / F;
    sup = std::max(sup, h);
  }
  const double xi_floor =
      (2.0 / ((q - 1.0) * delta)) * powp(std::numbers::e / delta, q - 2.0) * base;
  const double xi = 1.1 * std::max(sup, xi_floor);
  return PhiConstants{delta, xi};
}

namespace {

struct PhiFrame {
  double R;   // R(t)
  double A;   // amplitude factor kappa rho^{q xi} / R^xi
  double Rp;  // R'(t) = eta kappa^{q-2}
};

PhiFrame phi_frame(const PhiSpec& s, double t, const ExponentTriple& e) {
  if (s.kappa <= 0.0 || s.rho <= 0.0) {
    throw std::invalid_argument("phi: kappa and rho must be positive");
  }
  if (t < 0.0) throw std::domain_error("phi: t must be >= 0");
  const double q = e.q();
  const double Rp = e.eta() * powp(s.kappa, q - 2.0);
  const double rho_q = powp(s.rho, q);
  const double R = Rp * t + rho_q;
  // xi is large, so form the amplitude from the ratio rho^q/R <= 1 instead
  // of rho^{q xi} and R^xi separately, which over- or underflow for rho
  // away from 1.
  const double A = s.kappa * powp(rho_q / R, s.xi);
  return {R, A, Rp};
}

}  // namespace

double eval_phi(const PhiSpec& spec, double x_norm, double t,
                const ExponentTriple& e) {
  if (x_norm < 0.0) throw std::domain_error("phi: |x| must be >= 0");
  const PhiFrame f = phi_frame(spec, t, e);
  if (x_norm == 0.0) return f.A;
  const double q = e.q();
  const double z = powp(x_norm, q) / f.R;
  if (z >= 1.0) return 0.0;
  const double F = 1.0 - powp(z, 1.0 / (q - 1.0));
  return f.A * F * F;
}

PointDerivatives phi_derivatives(const PhiSpec& spec, double r, double t,
                                 const ExponentTriple& e) {
  if (r <= 0.0) {
    throw std::domain_error("phi_derivatives: r must be > 0 (classical formulas)");
  }
  const PhiFrame f = phi_frame(spec, t, e);
  const double q = e.q();
  const double z = powp(r, q) / f.R;
  if (z >= 1.0) return {0.0, 0.0, 0.0, 0.0};

  const double w = powp(z, 1.0 / (q - 1.0));  // z^{1/(q-1)}
  const double F = 1.0 - w;
  const double m = q / (q - 1.0);

  PointDerivatives d;
  d.value = f.A * F * F;
  d.dr = -2.0 * f.A * F * m * w / r;
  d.drr = 2.0 * f.A * (q / ((q - 1.0) * (q - 1.0))) * w * (q * w - F) / (r * r);
  d.dt = (f.A * f.Rp / f.R) * F * (-spec.xi * F + 2.0 * w / (q - 1.0));
  return d;
}

double phi_support_radius(const PhiSpec& spec, double t, const ExponentTriple& e) {
  const PhiFrame f = phi_frame(spec, t, e);
  return powp(f.R, 1.0 / e.q());
}

double phi_time_window(const PhiSpec& spec, const ExponentTriple& e) {
  if (spec.xi <= 0.0) throw std::invalid_argument("phi: xi must be positive");
  const double q = e.q();
  return powp(spec.kappa, 2.0 - q) * powp(spec.rho, q) / (e.eta() * spec.xi);
}

// ---- G ---------------------------------------------------------------------

double g_lambda(double nu, double q) { return (1.0 - nu * (q - 2.0)) / q; }

double g_q_of_nu(double nu) { return 4.0 * (1.0 + 2.0 * nu) / (1.0 + 4.0 * nu); }

GNuSelection select_g_nu(const ExponentTriple& e) {
  const double n = e.n();
  const double p = e.p();
  constexpr int kGrid = 10000;
  const double q_lo = 8.0 / 5.0;
  const double q_hi = 7.0 / 3.0;

  double nu = 1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double q = q_lo + (q_hi - q_lo) * static_cast<double>(i) / (kGrid - 1);
    const double a = (q / (q - 1.0)) * (q / (q - 1.0));
    const double a_hat = std::max(a, powp(a, q - 1.0));
    const double eta = (p - 1.0) / (q - 1.0);
    const double C1 = ((n - 1.0) * (q - 1.0) + p - 1.0) / (q - 1.0);
    const double C2 = q * (p - 1.0) / ((q - 1.0) * (q - 1.0));
    const double val = a_hat * (7.0 / 8.0 + C1 / eta) *
                       powp(C2 / (2.0 * (C1 + C2)), -q / (q - 1.0));
    nu = std::max(nu, val);
  }
  if (nu <= 1.0) {
    throw SelectionError("select_g_nu: grid maximum did not exceed 1");
  }
  const double q_nu = g_q_of_nu(nu);
  return GNuSelection{nu, 4.0 - q_nu, q_hi};
}

namespace {

struct GFrame {
  double Sigma;    // Sigma(t)
  double Sl;       // Sigma^lambda
  double A;        // kappa rho^{nu/lambda} / Sigma^nu
  double ASp_over_S;  // A Sigma'/Sigma = eta (kappa rho^{nu/lambda})^{q-1} / Sigma^{nu+1}
};

GFrame g_frame(const GSpec& s, double t, const ExponentTriple& e) {
  if (s.kappa <= 0.0 || s.rho <= 0.0) {
    throw std::invalid_argument("g: kappa and rho must be positive");
  }
  if (s.nu <= 1.0) throw std::invalid_argument("g: nu must exceed 1");
  if (s.lambda <= 0.0) {
    throw RegimeError("g: lambda = (1 - nu(q-2))/q must be positive");
  }
  if (t < 0.0) throw std::domain_error("g: t must be >= 0");
  const double q = e.q();
  const double q_nu = g_q_of_nu(s.nu);
  if (!(q > 4.0 - q_nu && q < 7.0 / 3.0)) {
    throw RegimeError("g: q outside the admissible interval (4 - q(nu), 7/3)");
  }
  const double lam_expected = g_lambda(s.nu, q);
  if (std::abs(lam_expected - s.lambda) > 1e-12 * (1.0 + std::abs(lam_expected))) {
    throw std::invalid_argument("g: lambda inconsistent with nu and q");
  }

  GFrame f;
  const double S0 = powp(s.rho, 1.0 / s.lambda);  // Sigma(0)
  f.Sigma = e.eta() * powp(s.kappa, q - 2.0) *
                powp(s.rho, (q - 2.0) * s.nu / s.lambda) * t +
            S0;
  f.Sl = powp(f.Sigma, s.lambda);
  // nu is typically large, so the amplitude factors are formed from ratios
  // bounded by 1 instead of rho^{nu/lambda} and Sigma^nu separately, which
  // over- or underflow for rho != 1.
  f.A = s.kappa * powp(S0 / f.Sigma, s.nu);
  f.ASp_over_S = e.eta() * powp(s.kappa, q - 1.0) *
                 powp(powp(S0, q - 1.0) / f.Sigma, s.nu) / f.Sigma;
  return f;
}

}  // namespace

double eval_g(const GSpec& spec, double x_norm, double t, const ExponentTriple& e) {
  if (x_norm < 0.0) throw std::domain_error("g: |x| must be >= 0");
  const GFrame f = g_frame(spec, t, e);
  if (x_norm == 0.0) return f.A;
  const double q = e.q();
  const double z = x_norm / f.Sl;
  if (z >= 1.0) return 0.0;
  const double m = q / (q - 1.0);
  const double F = 1.0 - powp(z, m);
  if (F <= 0.0) return 0.0;
  return f.A * powp(F, m);
}

PointDerivatives g_derivatives(const GSpec& spec, double r, double t,
                               const ExponentTriple& e) {
  if (r <= 0.0) {
    throw std::domain_error("g_derivatives: r must be > 0 (classical formulas)");
  }
  const GFrame f = g_frame(spec, t, e);
  const double q = e.q();
  const double z = r / f.Sl;
  if (z >= 1.0) return {0.0, 0.0, 0.0, 0.0};

  const double m = q / (q - 1.0);   // shape exponent
  const double a = m * m;           // gradient prefactor
  const double s1 = 1.0 / (q - 1.0);
  const double zm = powp(z, m);
  const double F = 1.0 - zm;
  if (F <= 0.0) return {0.0, 0.0, 0.0, 0.0};

  PointDerivatives d;
  d.value = f.A * powp(F, m);
  d.dr = -f.A * a * powp(F, s1) * powp(z, s1) / f.Sl;
  d.drr = (f.A * a / (q - 1.0)) * powp(F, s1 - 1.0) * powp(z, s1 - 1.0) *
          (m * zm - F) / (f.Sl * f.Sl);
  d.dt = f.ASp_over_S * (-spec.nu * powp(F, m) + a * spec.lambda * powp(F, s1) * zm);
  return d;
}

double g_support_radius(const GSpec& spec, double t, const ExponentTriple& e) {
  const GFrame f = g_frame(spec, t, e);
  return f.Sl;
}

double g_time_window(const GSpec& spec, const ExponentTriple& e) {
  const double q = e.q();
  // Sigma(T) = 2 Sigma(0)  <=>  T = rho^{1/lambda} / (eta kappa^{q-2} rho^{(q-2)nu/lambda}),
  // and the exponent identity (1 - (q-2)nu)/lambda = q collapses the rho powers.
  return powp(spec.kappa, 2.0 - q) * powp(spec.rho, q) / e.eta();
}

// ---- Psi -------------------------------------------------------------------

PsiConstants select_psi_constants(const ExponentTriple& e) {
  require_singular_in_range(e, "select_psi_constants");
  const double n = e.n();
  const double p = e.p();
  const double q = e.q();
  const double ratio = (n - 1.0) / (p - 1.0);

  const double K1 = ratio * (2.0 - q) / (2.0 * q);
  const double K2 = (1.0 + ratio) * (2.0 - q) / (3.0 * q);
  const double K = std::max(K1, K2);
  if (K >= 1.0) {
    // The range condition bounds both constants strictly below 1; reaching
    // here means check_range and this computation disagree.
    throw std::logic_error("select_psi_constants: K >= 1 despite range condition");
  }
  const double Z = K / (1.0 - K);

  const double lambda = q - e.d() * (2.0 - q);
  if (lambda <= 0.0) {
    throw std::logic_error("select_psi_constants: lambda <= 0 despite range condition");
  }

  const double C1 = q / (2.0 - q) + 2.0 * q / (q - 1.0);
  const double C2 = q * lambda / (2.0 * (2.0 - q));
  const double zeta_min = powp(powp(C1, 2.0 - q) / C2, 1.0 / (q - 1.0));
  const double zeta = 1.1 * zeta_min;
  const double Theta =
      (powp(zeta, q - 1.0) / e.eta()) *
      std::min(powp(lambda / (2.0 * q), q - 1.0), powp(Z, -(q - 1.0)));

  return PsiConstants{zeta, Theta, Z, lambda, C1, C2};
}

namespace {

void check_psi_spec(const PsiSpec& s) {
  if (s.k <= 0.0) throw std::invalid_argument("psi: k must be positive");
  if (!(s.nu_hole > 0.0 && s.nu_hole < 1.0)) {
    throw std::invalid_argument("psi: nu_hole must lie in (0,1)");
  }
  if (s.zeta <= 0.0 || s.Theta <= 0.0) {
    throw std::invalid_argument("psi: zeta and Theta must be positive");
  }
}

}  // namespace

double psi_z(const PsiSpec& spec, double r, double t, const ExponentTriple& e) {
  check_psi_spec(spec);
  if (r < 0.0) throw std::domain_error("psi: |x| must be >= 0");
  if (t <= 0.0) throw std::domain_error("psi: t must be > 0");
  const double q = e.q();
  if (r == 0.0) return 0.0;
  return powp(spec.k, (2.0 - q) / (q - 1.0)) * spec.zeta *
         powp(powp(r, q) / (e.eta() * t), 1.0 / (q - 1.0));
}

double eval_psi(const PsiSpec& spec, double x_norm, double t,
                const ExponentTriple& e) {
  if (e.q() >= 2.0) throw RegimeError("psi: requires the singular regime q < 2");
  const double q = e.q();
  const double one_m_r2 = 1.0 - x_norm * x_norm;
  if (x_norm < 0.0) throw std::domain_error("psi: |x| must be >= 0");
  if (t <= 0.0) throw std::domain_error("psi: t must be > 0");
  check_psi_spec(spec);
  if (one_m_r2 <= 0.0) return 0.0;
  const double v = powp(one_m_r2, q / (q - 1.0));
  const double z = psi_z(spec, x_norm, t, e);
  const double w = spec.k * powp(1.0 + z, -(q - 1.0) / (2.0 - q));
  return v * w;
}

PointDerivatives psi_derivatives(const PsiSpec& spec, double r, double t,
                                 const ExponentTriple& e) {
  if (e.q() >= 2.0) throw RegimeError("psi: requires the singular regime q < 2");
  if (r <= 0.0) {
    throw std::domain_error("psi_derivatives: r must be > 0 (classical formulas)");
  }
  if (t <= 0.0) throw std::domain_error("psi: t must be > 0");
  check_psi_spec(spec);

  const double q = e.q();
  const double m = q / (q - 1.0);
  const double one_m_r2 = 1.0 - r * r;
  if (one_m_r2 <= 0.0) return {0.0, 0.0, 0.0, 0.0};

  // Cutoff factor v = (1-r^2)^{q/(q-1)} and its derivatives.
  const double v = powp(one_m_r2, m);
  const double vp = -2.0 * r * m * powp(one_m_r2, 1.0 / (q - 1.0));
  const double vpp = -2.0 * m * powp(one_m_r2, 1.0 / (q - 1.0)) +
                     4.0 * r * r * (q / ((q - 1.0) * (q - 1.0))) *
                         powp(one_m_r2, (2.0 - q) / (q - 1.0));

  // Pressure-like factor w = k (1+z)^{-(q-1)/(2-q)} and its derivatives,
  // using z_r = (q/(q-1)) z / r.
  const double z = psi_z(spec, r, t, e);
  const double F = 1.0 + z;
  const double w = spec.k * powp(F, -(q - 1.0) / (2.0 - q));
  const double wp = -(q / (2.0 - q)) * (w / F) * (z / r);
  const double wpp =
      (q * q / (((2.0 - q) * (2.0 - q)) * (q - 1.0))) * (w / (F * F)) * (z * z) /
          (r * r) -
      (q / ((2.0 - q) * (q - 1.0))) * (w / F) * z / (r * r);

  PointDerivatives d;
  d.value = v * w;
  d.dr = vp * w + v * wp;
  d.drr = vpp * w + 2.0 * vp * wp + v * wpp;
  d.dt = (1.0 / (2.0 - q)) * v * (w / F) * (z / t);
  return d;
}

double psi_time_window(const PsiSpec& spec, const ExponentTriple& e) {
  check_psi_spec(spec);
  return powp(spec.nu_hole, e.q()) * powp(spec.k, 2.0 - e.q()) * spec.Theta;
}

double psi_annulus_margin(double r, double z, const ExponentTriple& e) {
  if (!(r > 0.0 && r < 1.0)) {
    throw std::domain_error("psi_annulus_margin: r must lie in (0,1)");
  }
  if (z < 0.0) throw std::domain_error("psi_annulus_margin: z must be >= 0");
  const double q = e.q();
  const double p = e.p();
  const double n = e.n();
  return 2.0 * (q * (p - 1.0) / (2.0 - q)) * (z / (1.0 + z)) / r +
         2.0 * ((p - 1.0) / (q - 1.0)) * (r * r) / (1.0 - r * r) - p - n + 2.0;
}

// ---- Certification -----------------------------------------------------------

namespace {

struct CertProblem {
  std::string name;
  double amplitude;
  double t_hi;
  // Radial extent of the validity domain at time t.
  double (*r_lo)(const ComparisonSpec&, double, const ExponentTriple&);
  double (*r_hi)(const ComparisonSpec&, double, const ExponentTriple&);
  PointDerivatives (*derivs)(const ComparisonSpec&, double, double,
                             const ExponentTriple&);
};

CertProblem make_problem(const ComparisonSpec& spec, const ExponentTriple& e) {
  CertProblem pb;
  if (const auto* phi = std::get_if<PhiSpec>(&spec)) {
    pb.name = "phi";
    pb.amplitude = phi->kappa;
    pb.t_hi = phi_time_window(*phi, e);
    pb.r_lo = [](const ComparisonSpec&, double, const ExponentTriple&) {
      return 0.0;
    };
    pb.r_hi = [](const ComparisonSpec& s, double t, const ExponentTriple& ee) {
      return phi_support_radius(std::get<PhiSpec>(s), t, ee);
    };
    pb.derivs = [](const ComparisonSpec& s, double r, double t,
                   const ExponentTriple& ee) {
      return phi_derivatives(std::get<PhiSpec>(s), r, t, ee);
    };
  } else if (const auto* g = std::get_if<GSpec>(&spec)) {
    pb.name = "g";
    pb.amplitude = g->kappa;
    pb.t_hi = g_time_window(*g, e);
    pb.r_lo = [](const ComparisonSpec&, double, const ExponentTriple&) {
      return 0.0;
    };
    pb.r_hi = [](const ComparisonSpec& s, double t, const ExponentTriple& ee) {
      return g_support_radius(std::get<GSpec>(s), t, ee);
    };
    pb.derivs = [](const ComparisonSpec& s, double r, double t,
                   const ExponentTriple& ee) {
      return g_derivatives(std::get<GSpec>(s), r, t, ee);
    };
  } else {
    const auto& psi = std::get<PsiSpec>(spec);
    pb.name = "psi";
    pb.amplitude = psi.k;
    pb.t_hi = psi_time_window(psi, e);
    pb.r_lo = [](const ComparisonSpec& s, double, const ExponentTriple&) {
      return std::get<PsiSpec>(s).nu_hole;
    };
    pb.r_hi = [](const ComparisonSpec&, double, const ExponentTriple&) {
      return 1.0;
    };
    pb.derivs = [](const ComparisonSpec& s, double r, double t,
                   const ExponentTriple& ee) {
      return psi_derivatives(std::get<PsiSpec>(s), r, t, ee);
    };
  }
  return pb;
}

std::map<std::string, double> constants_of(const ComparisonSpec& spec) {
  std::map<std::string, double> c;
  if (const auto* phi = std::get_if<PhiSpec>(&spec)) {
    c = {{"kappa", phi->kappa}, {"rho", phi->rho}, {"xi", phi->xi},
         {"delta", phi->delta}};
  } else if (const auto* g = std::get_if<GSpec>(&spec)) {
    c = {{"kappa", g->kappa}, {"rho", g->rho}, {"nu", g->nu},
         {"lambda", g->lambda}};
  } else {
    const auto& psi = std::get<PsiSpec>(spec);
    c = {{"k", psi.k},          {"nu_hole", psi.nu_hole}, {"zeta", psi.zeta},
         {"Theta", psi.Theta},  {"Z", psi.Z},             {"lambda", psi.lambda},
         {"C1", psi.C1},        {"C2", psi.C2}};
  }
  return c;
}

}  // namespace

CertificateReport certify_subsolution(const ComparisonSpec& spec,
                                      const ExponentTriple& e,
                                      const GridSpec& grid) {
  if (grid.nr < 2 * kBoundaryMarginCells + 4 || grid.nt < 4) {
    throw std::invalid_argument("certify_subsolution: grid too coarse");
  }
  const CertProblem pb = make_problem(spec, e);
  const auto* psi = std::get_if<PsiSpec>(&spec);

  CertificateReport rep;
  rep.function = pb.name;
  rep.constants = constants_of(spec);
  rep.grid = grid;
  rep.max_residual = -std::numeric_limits<double>::infinity();

  const double amp_norm = std::pow(pb.amplitude, e.q() - 1.0);
  for (int i = 0; i < grid.nt; ++i) {
    const double t = pb.t_hi * (i + 0.5) / grid.nt;
    const double r_lo = pb.r_lo(spec, t, e);
    const double r_hi = pb.r_hi(spec, t, e);
    const double dr_cell = (r_hi - r_lo) / grid.nr;
    for (int j = kBoundaryMarginCells; j < grid.nr - kBoundaryMarginCells; ++j) {
      const double r = r_lo + (j + 0.5) * dr_cell;
      const PointDerivatives d = pb.derivs(spec, r, t, e);
      const double res = residual_npq(d.dt, d.dr, d.drr, r, e) / amp_norm;
      if (res > rep.max_residual) {
        rep.max_residual = res;
        rep.argmax_r = r;
        rep.argmax_t = t;
      }
      if (psi != nullptr) {
        const double z = psi_z(*psi, r, t, e);
        if (z < psi->Z * (1.0 - 1e-12) ||
            psi_annulus_margin(r, z, e) < -1e-12) {
          rep.aux_ok = false;
        }
      }
    }
  }
  rep.pass = rep.max_residual <= kCertifyTolerance && rep.aux_ok;
  return rep;
}

}  // namespace hlab
