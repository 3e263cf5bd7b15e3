// Harnack verifier unit tests: trajectory interpolation, forward/backward
// checks on synthetic and solver-generated fields, the sweep bookkeeping,
// chain constants and executed chains, oscillation decay, and the intrinsic
// scaling covariance.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hlab/errors.hpp"
#include "hlab/exponents.hpp"
#include "hlab/harnack.hpp"
#include "hlab/reference.hpp"
#include "hlab/solver.hpp"

namespace {

using hlab::ChainBase;
using hlab::ChainParams;
using hlab::ChainPoint;
using hlab::Direction;
using hlab::ExponentTriple;
using hlab::HarnackQuery;
using hlab::RadialField;
using hlab::SolverParams;
using hlab::Trajectory;

Trajectory synthetic_trajectory(const ExponentTriple& e, double R, int nodes,
                                const std::vector<double>& times,
                                const std::function<double(double, double)>& f) {
  std::vector<hlab::Snapshot> snaps;
  const double dr = R / (nodes - 1);
  for (double t : times) {
    hlab::Snapshot s;
    s.t = t;
    s.u.resize(nodes);
    for (int j = 0; j < nodes; ++j) s.u[j] = f(dr * j, t);
    snaps.push_back(std::move(s));
  }
  return Trajectory{std::move(snaps), e, SolverParams{}, dr, R, false};
}

Trajectory heat_trajectory(double t_final, int nodes = 201, double a = 0.002) {
  const ExponentTriple e(3, 2.0, 2.0);
  RadialField u0;
  u0.R = 1.0;
  u0.delta_r = 1.0 / (nodes - 1);
  u0.values.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    u0.values[j] =
        hlab::reference::heat_kernel_radial(u0.delta_r * j, 0.0, a, 3);
  }
  u0.values.back() = 0.0;
  SolverParams sp;
  sp.snapshot_count = 64;
  return hlab::solve(u0, t_final, e, sp);
}

// ---- Interpolation ---------------------------------------------------------------

TEST(TrajectoryValueTest, BilinearInterpolationIsExactOnAffineData) {
  const ExponentTriple e(3, 2.0, 2.0);
  const auto affine = [](double r, double t) { return 2.0 + 0.5 * r + 3.0 * t; };
  const Trajectory traj =
      synthetic_trajectory(e, 1.0, 11, {0.0, 0.4, 1.0}, affine);
  for (double x : {0.0, 0.137, 0.55, 1.0}) {
    for (double t : {0.0, 0.2, 0.4, 0.77, 1.0}) {
      EXPECT_NEAR(hlab::trajectory_value(traj, x, t), affine(x, t), 1e-12);
    }
  }
}

TEST(TrajectoryValueTest, RejectsPointsOutsideTheDomain) {
  const ExponentTriple e(3, 2.0, 2.0);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 11, {0.0, 1.0}, [](double, double) { return 1.0; });
  EXPECT_THROW(hlab::trajectory_value(traj, 1.2, 0.5), hlab::GeometryError);
  EXPECT_THROW(hlab::trajectory_value(traj, 0.5, 1.5), hlab::GeometryError);
  EXPECT_THROW(hlab::trajectory_value(traj, 0.5, -0.1), hlab::GeometryError);
}

// ---- Forward/backward checks -------------------------------------------------------

TEST(HarnackCheckTest, ConstantFieldHasMuExactlyOne) {
  const ExponentTriple e(3, 2.0, 1.8);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 101, {0.0, 5.0, 10.0}, [](double, double) { return 1.0; });
  HarnackQuery query;
  query.x0 = 0.3;
  query.t0 = 5.0;
  query.r = 0.1;
  query.c = 1.0;
  query.mu = 1.0;
  query.sigma = 1.0;

  const hlab::HarnackReport fwd = hlab::forward_check(traj, query);
  EXPECT_TRUE(fwd.geometry_ok);
  EXPECT_DOUBLE_EQ(fwd.probe_value, 1.0);
  EXPECT_DOUBLE_EQ(fwd.extremum, 1.0);
  EXPECT_DOUBLE_EQ(fwd.empirical_mu, 1.0);
  EXPECT_TRUE(fwd.pass);

  query.direction = Direction::backward;
  const hlab::HarnackReport bwd = hlab::backward_check(traj, query);
  EXPECT_DOUBLE_EQ(bwd.empirical_mu, 1.0);
  EXPECT_TRUE(bwd.pass);
}

TEST(HarnackCheckTest, ThetaIsIntrinsicWaitingTime) {
  const ExponentTriple e(3, 2.0, 1.7);
  const Trajectory traj = synthetic_trajectory(
      e, 2.0, 101, {0.0, 4.0, 8.0},
      [](double r, double) { return 2.0 - 0.5 * r; });
  HarnackQuery query;
  query.x0 = 1.0;  // probe value 1.5
  query.t0 = 4.0;
  query.r = 0.2;
  query.c = 0.7;
  query.mu = 5.0;
  query.sigma = 1.0;
  const hlab::HarnackReport rep = hlab::forward_check(traj, query);
  EXPECT_NEAR(rep.probe_value, 1.5, 1e-12);
  EXPECT_NEAR(rep.theta, 0.7 * std::pow(1.5, 2.0 - 1.7), 1e-14);

  HarnackQuery doubled = query;
  doubled.c = 1.4;
  const hlab::HarnackReport rep2 = hlab::forward_check(traj, doubled);
  EXPECT_NEAR(rep2.theta, 2.0 * rep.theta, 1e-14 * rep.theta);
}

TEST(HarnackCheckTest, GeometryViolationsNameTheSide) {
  const ExponentTriple e(3, 2.0, 2.0);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 101, {0.0, 1.0}, [](double, double) { return 1.0; });
  HarnackQuery query;
  query.c = 1.0;
  query.mu = 2.0;
  query.sigma = 4.0;

  query.x0 = 0.9;  // 0.9 + 4 * 0.1 > 1
  query.t0 = 0.5;
  query.r = 0.1;
  try {
    hlab::forward_check(traj, query);
    FAIL() << "expected GeometryError";
  } catch (const hlab::GeometryError& err) {
    EXPECT_NE(std::string(err.what()).find("spatial side"), std::string::npos);
  }

  query.x0 = 0.1;
  query.t0 = 0.99;  // 0.99 + (0.4)^2 > 1
  try {
    hlab::forward_check(traj, query);
    FAIL() << "expected GeometryError";
  } catch (const hlab::GeometryError& err) {
    EXPECT_NE(std::string(err.what()).find("temporal side"), std::string::npos);
  }
}

TEST(HarnackCheckTest, DeadProbeIsRejected) {
  const ExponentTriple e(3, 2.0, 1.8);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 101, {0.0, 1.0},
      [](double r, double) { return std::max(1e-13, 1.0 - 2.0 * r); });
  HarnackQuery query;
  query.x0 = 0.8;  // value 1e-13 < 1e-10 * max u0
  query.t0 = 0.5;
  query.r = 0.05;
  query.sigma = 1.0;
  EXPECT_THROW(hlab::forward_check(traj, query), hlab::DeadPointError);
}

TEST(HarnackCheckTest, HeatKernelChecksAreInternallyConsistent) {
  const Trajectory traj = heat_trajectory(0.1);
  HarnackQuery query;
  query.x0 = 0.0;
  query.t0 = 0.05;
  query.r = 0.04;
  query.c = 1.0;
  query.mu = 10.0;
  query.sigma = 1.0;

  const hlab::HarnackReport fwd = hlab::forward_check(traj, query);
  EXPECT_TRUE(fwd.geometry_ok);
  EXPECT_GT(fwd.extremum, 0.0);
  EXPECT_NEAR(fwd.empirical_mu, fwd.probe_value / fwd.extremum,
              1e-13 * fwd.empirical_mu);
  EXPECT_GE(fwd.empirical_mu, 1.0);  // center dominates after waiting
  EXPECT_TRUE(fwd.pass);

  query.direction = Direction::backward;
  const hlab::HarnackReport bwd = hlab::backward_check(traj, query);
  EXPECT_NEAR(bwd.empirical_mu, bwd.extremum / bwd.probe_value,
              1e-13 * bwd.empirical_mu);
  EXPECT_GE(bwd.empirical_mu, 1.0);  // the past sup dominates under decay
  EXPECT_TRUE(bwd.pass);
}

// ---- Scaling covariance -------------------------------------------------------------

TEST(ScalingTest, ScaledTrajectoryTransformsFieldsExactly) {
  const ExponentTriple e(3, 1.4, 1.7);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 21, {0.0, 0.5, 1.0},
      [](double r, double t) { return 1.0 + r + t; });
  const double lambda = 3.0;
  const Trajectory scaled = hlab::scaled_trajectory(traj, lambda);
  const double tau = std::pow(lambda, 2.0 - e.q());
  ASSERT_EQ(scaled.snapshots.size(), traj.snapshots.size());
  EXPECT_DOUBLE_EQ(scaled.R, traj.R);
  EXPECT_DOUBLE_EQ(scaled.delta_r, traj.delta_r);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    EXPECT_NEAR(scaled.snapshots[i].t, tau * traj.snapshots[i].t, 1e-15);
    for (std::size_t j = 0; j < traj.snapshots[i].u.size(); ++j) {
      EXPECT_DOUBLE_EQ(scaled.snapshots[i].u[j],
                       lambda * traj.snapshots[i].u[j]);
    }
  }
}

TEST(ScalingTest, EmpiricalMuIsScaleInvariant) {
  // Singular-regime run so lambda^{2-q} != 1 exercises the time dilation.
  const ExponentTriple e(3, 1.4, 1.7);
  RadialField u0;
  const int nodes = 101;
  u0.R = 2.0;
  u0.delta_r = 2.0 / (nodes - 1);
  u0.values.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double r = u0.delta_r * j;
    const double s = 1.0 - (r / 1.0) * (r / 1.0);
    u0.values[j] = s > 0.0 ? s : 0.0;
  }
  u0.values.back() = 0.0;
  SolverParams sp;
  sp.snapshot_count = 32;
  sp.eps_grad = 3e-3;
  const Trajectory traj = hlab::solve(u0, 0.2, e, sp);

  HarnackQuery query;
  query.x0 = 0.0;
  query.t0 = 0.1;
  query.r = 0.1;
  query.c = 0.5;
  query.mu = 100.0;
  query.sigma = 1.0;
  const hlab::HarnackReport base = hlab::forward_check(traj, query);

  for (double lambda : {0.5, 2.0, 10.0}) {
    const Trajectory scaled = hlab::scaled_trajectory(traj, lambda);
    HarnackQuery sq = query;
    sq.t0 = query.t0 * std::pow(lambda, 2.0 - e.q());
    const hlab::HarnackReport rep = hlab::forward_check(scaled, sq);
    EXPECT_NEAR(rep.empirical_mu, base.empirical_mu,
                1e-10 * base.empirical_mu)
        << "lambda = " << lambda;
    EXPECT_NEAR(rep.theta, base.theta * std::pow(lambda, 2.0 - e.q()),
                1e-13 * rep.theta)
        << "lambda = " << lambda;
  }
}

// ---- Sweep ---------------------------------------------------------------------------

TEST(SweepTest, RowsCoverTheQueryFamilyWithReasons) {
  const Trajectory traj = heat_trajectory(0.1);
  const std::vector<hlab::BasePoint> points = {
      {0.0, 0.05},  // admissible both ways at r = 0.04
      {0.3, 0.05},  // alive, but sigma r exits the domain at r = 0.2
      {0.8, 0.05},  // dead probe (Gaussian tail)
  };
  const std::vector<double> radii = {0.04, 0.2};
  const hlab::SweepTable table = hlab::empirical_mu_sweep(traj, points, radii, 1.0);

  EXPECT_EQ(table.rows.size(), 2u * radii.size() * points.size());
  EXPECT_EQ(table.aggregates.size(), 2u * radii.size());
  for (const auto& agg : table.aggregates) {
    EXPECT_EQ(agg.evaluated + agg.skipped, static_cast<int>(points.size()));
  }
  int skipped = 0;
  for (const auto& row : table.rows) {
    if (row.skipped) {
      ++skipped;
      EXPECT_FALSE(row.reason.empty());
      EXPECT_FALSE(row.pass);
    } else {
      EXPECT_TRUE(std::isfinite(row.empirical_mu));
      EXPECT_GT(row.theta, 0.0);
    }
  }
  EXPECT_GT(skipped, 0);
  // The center point at the small radius must be evaluated in both directions.
  int center_rows = 0;
  for (const auto& row : table.rows) {
    if (row.x0 == 0.0 && row.r == 0.04 && !row.skipped) ++center_rows;
  }
  EXPECT_EQ(center_rows, 2);
}

// ---- Chain constants --------------------------------------------------------------

TEST(ChainConstantsTest, PassthroughWhenBaseSlackSuffices) {
  const ExponentTriple e(3, 2.0, 2.0);
  ChainBase base;
  base.tilde_c = 1.0;
  base.tilde_mu = 2.0;
  base.tilde_sigma = 2.0;
  const ChainParams params = hlab::chain_constants(2.0, 3.0, base, e);
  EXPECT_TRUE(params.passthrough);
  EXPECT_DOUBLE_EQ(params.kappa, 1.0);
  EXPECT_DOUBLE_EQ(params.alpha, 1.0);
  EXPECT_DOUBLE_EQ(params.c_time, base.tilde_c);
  EXPECT_DOUBLE_EQ(params.mu_time, base.tilde_mu);
  EXPECT_EQ(params.max_time_steps, 1);
  // rho_0 = r, and the schedule is flat at q = 2.
  EXPECT_DOUBLE_EQ(params.rho(0, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(params.rho(5, 0.3), 0.3);
}

TEST(ChainConstantsTest, DerivedFormulasAtQTwo) {
  const ExponentTriple e(3, 2.0, 2.0);
  ChainBase base;
  base.tilde_c = 1.0;
  base.tilde_mu = 2.0;
  base.tilde_sigma = 2.0;
  const ChainParams params = hlab::chain_constants(1.5, 3.0, base, e);
  EXPECT_FALSE(params.passthrough);
  EXPECT_NEAR(params.kappa, 3.0 / 1.25, 1e-14);          // (4-1)/(2.25-1)
  EXPECT_NEAR(params.alpha, 1.0 / std::sqrt(2.4), 1e-14);
  EXPECT_EQ(params.max_time_steps, 4);                   // ceil(2.4) + 1
  EXPECT_NEAR(params.c_time, 4.0 / 2.4, 1e-14);
  EXPECT_NEAR(params.mu_time, 16.0, 1e-12);              // 2^4
  // sigma_x = alpha (2 * 1 + 1); varrho = (3-1)/sigma_x; K = ceil(1.5)+1 = 3.
  EXPECT_NEAR(params.sigma_x, 3.0 * params.alpha, 1e-14);
  EXPECT_NEAR(params.varrho, 2.0 / params.sigma_x, 1e-14);
  EXPECT_EQ(params.max_space_steps, 3);
  EXPECT_NEAR(params.mu_space, 8.0, 1e-12);              // 2^3
  EXPECT_NEAR(params.c_space, params.varrho * params.varrho * 3.0, 1e-12);
  // At q = 2 the radius schedule is constant alpha r.
  EXPECT_NEAR(params.rho(0, 1.0), params.alpha, 1e-15);
  EXPECT_NEAR(params.rho(3, 1.0), params.alpha, 1e-15);
}

TEST(ChainConstantsTest, ValidatesInputs) {
  const ExponentTriple e(3, 2.0, 2.0);
  ChainBase base;
  EXPECT_THROW(hlab::chain_constants(1.0, 2.0, base, e), std::invalid_argument);
  EXPECT_THROW(hlab::chain_constants(1.5, 1.0, base, e), std::invalid_argument);
  ChainBase bad = base;
  bad.tilde_sigma = 1.0;
  EXPECT_THROW(hlab::chain_constants(1.5, 2.0, bad, e), std::invalid_argument);
}

// ---- Executed chains ---------------------------------------------------------------

class ChainRunTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    traj_ = new Trajectory(heat_trajectory(0.5));
    ChainBase base;
    base.tilde_c = 1.0;
    base.tilde_mu = 2.0;
    base.tilde_sigma = 2.0;
    params_ = new ChainParams(
        hlab::chain_constants(1.5, 3.0, base, ExponentTriple(3, 2.0, 2.0)));
  }
  static void TearDownTestSuite() {
    delete traj_;
    delete params_;
    traj_ = nullptr;
    params_ = nullptr;
  }
  static Trajectory* traj_;
  static ChainParams* params_;
};

Trajectory* ChainRunTest::traj_ = nullptr;
ChainParams* ChainRunTest::params_ = nullptr;

TEST_F(ChainRunTest, TargetEqualsStartIsTrivial) {
  const ChainPoint pt{0.2, 0.1};
  const hlab::ChainTrace trace = hlab::run_chain(*traj_, pt, pt, *params_);
  EXPECT_EQ(trace.steps.size(), 1u);
  EXPECT_EQ(trace.space_steps, 0);
  EXPECT_EQ(trace.time_steps, 0);
  EXPECT_DOUBLE_EQ(trace.mu_total, 1.0);
  EXPECT_TRUE(trace.certified);
}

TEST_F(ChainRunTest, PureTimeAdvanceUsesTheFullIteration) {
  // q = 2: every time step advances c~ (alpha r)^2, so the budget is spent in
  // exactly ceil(kappa) + 1 steps landing on the target time.
  const hlab::ChainTrace trace =
      hlab::run_chain(*traj_, ChainPoint{0.0, 0.12}, ChainPoint{0.0, 0.22},
                      *params_);
  EXPECT_EQ(trace.space_steps, 0);
  EXPECT_EQ(trace.time_steps, params_->max_time_steps);
  EXPECT_TRUE(trace.certified);
  EXPECT_NEAR(trace.steps.back().t, 0.22, 1e-9);
  EXPECT_NEAR(trace.mu_total,
              std::pow(params_->base.tilde_mu, trace.time_steps), 1e-12);
  // Soundness: the chain inequality it certifies really holds.
  const double u_start = hlab::trajectory_value(*traj_, 0.0, 0.12);
  const double u_target = hlab::trajectory_value(*traj_, 0.0, 0.22);
  EXPECT_LE(u_start, trace.mu_total * u_target * (1.0 + 1e-6));
}

TEST_F(ChainRunTest, SpaceThenTimePhasesStayWithinBounds) {
  const hlab::ChainTrace trace =
      hlab::run_chain(*traj_, ChainPoint{0.3, 0.2}, ChainPoint{0.0, 0.35},
                      *params_);
  EXPECT_GT(trace.space_steps, 0);
  EXPECT_LE(trace.space_steps, params_->max_space_steps);
  EXPECT_LE(trace.time_steps, params_->max_time_steps);
  EXPECT_TRUE(trace.certified);
  EXPECT_NEAR(trace.steps.back().x, 0.0, 1e-12);
  EXPECT_NEAR(trace.steps.back().t, 0.35, 1e-9);
  // Phases are ordered: spatial steps first, then time steps.
  bool seen_time = false;
  for (const auto& step : trace.steps) {
    if (step.phase == 't') seen_time = true;
    if (step.phase == 'x') EXPECT_FALSE(seen_time);
  }
}

TEST_F(ChainRunTest, ReportsRoomErrorNearTheBoundary) {
  EXPECT_THROW(hlab::run_chain(*traj_, ChainPoint{0.0, 0.2},
                               ChainPoint{0.9, 0.35}, *params_),
               hlab::RoomError);
}

TEST_F(ChainRunTest, RejectsBackwardTargets) {
  EXPECT_THROW(hlab::run_chain(*traj_, ChainPoint{0.0, 0.3},
                               ChainPoint{0.0, 0.2}, *params_),
               std::invalid_argument);
}

// ---- Oscillation decay ---------------------------------------------------------------

TEST(OscillationTest, AffineFieldHasUnitSlope) {
  const ExponentTriple e(3, 2.0, 2.0);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 101, {0.0, 1.0},
      [](double r, double) { return 0.5 + 0.25 * r; });
  // Radii are exact node multiples so the grid oscillation is exactly 2 b rho.
  const hlab::OscillationFit fit =
      hlab::oscillation_decay(traj, 0.5, 0.5, 0.4, {0.1, 0.2, 0.4});
  EXPECT_EQ(fit.n_points, 3);
  EXPECT_NEAR(fit.slope, 1.0, 1e-10);
  EXPECT_NEAR(std::exp(fit.intercept), 2.0 * 0.25 * 0.4, 1e-9);
}

TEST(OscillationTest, ConstantFieldIsDegenerate) {
  const ExponentTriple e(3, 2.0, 2.0);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 51, {0.0, 1.0}, [](double, double) { return 2.0; });
  EXPECT_THROW(hlab::oscillation_decay(traj, 0.5, 0.5, 0.2, {0.1, 0.2}),
               hlab::DegenerateFitError);
}

TEST(OscillationTest, BallOutsideDomainIsGeometryError) {
  const ExponentTriple e(3, 2.0, 2.0);
  const Trajectory traj = synthetic_trajectory(
      e, 1.0, 51, {0.0, 1.0}, [](double r, double) { return 1.0 + r; });
  EXPECT_THROW(hlab::oscillation_decay(traj, 0.9, 0.5, 0.2, {0.1, 0.2}),
               hlab::GeometryError);
}

}  // namespace
