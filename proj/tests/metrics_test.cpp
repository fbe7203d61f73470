#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "doco/metrics.hpp"
#include "oracles.hpp"

namespace doco {
namespace {

// Builds a trajectory whose decisions are given per round (one vector per unit).
RunTrajectory scripted(const std::vector<std::vector<Vector>>& rounds, const ConstraintSet& cs) {
  RunTrajectory traj(rounds.front().size(), cs.dimension(), cs.count());
  for (const auto& xs : rounds) {
    RoundRecord rec;
    for (const auto& x : xs) {
      rec.decisions.push_back(x);
      rec.queries.push_back(x);
      rec.incurred.push_back(0.0);
      rec.observed.push_back(0.0);
      rec.positive_parts.push_back(cs.positive_parts(x));
    }
    traj.append(rec);
  }
  return traj;
}

TEST(Comparator, ClampsToBox) {
  SufficientStats stats(1, 0.0);
  stats.add({{1.0}, 10.0});
  const BoxConstraintSet box(-0.15, 0.15, 1);
  const auto comp = solve_comparator(stats, box);
  EXPECT_NEAR(comp.x_star[0], 0.15, 1e-12);
}

TEST(Comparator, PureRegularizerAtOrigin) {
  SufficientStats stats(3, 1.0);
  stats.add({{0.0, 0.0, 0.0}, 0.0});
  const auto comp = solve_comparator(stats, BoxConstraintSet(-0.15, 0.15, 3));
  for (double v : comp.x_star) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_NEAR(comp.objective_value, 0.0, 1e-15);
}

TEST(Comparator, MatchesGridSearchIn2d) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int inst = 0; inst < 10; ++inst) {
    std::vector<RegressionExample> rows;
    SufficientStats stats(2, 1.0);
    for (int k = 0; k < 20; ++k) {
      rows.push_back({{u(rng), u(rng)}, u(rng)});
      stats.add(rows.back());
    }
    Vector grid_x;
    const double grid_best = oracle::grid_box_minimum_2d(rows, 1.0, -0.15, 0.15, 1e-3, &grid_x);
    const auto comp = solve_comparator(stats, BoxConstraintSet(-0.15, 0.15, 2));
    EXPECT_LE(stats.objective(comp.x_star), grid_best + 1e-9);
    EXPECT_LE(distance(comp.x_star, grid_x), 2e-3);
  }
}

TEST(Comparator, BeatsRandomFeasiblePoints) {
  const auto stream = synthetic_stream(6, 4, 100, 0.0, 3, 0.3);
  const BoxConstraintSet box(-0.15, 0.15, 4);
  const auto comp = offline_comparator(stream, 100, box);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  const double best = cumulative_system_loss(stream, comp.x_star, 100);
  for (int k = 0; k < 1000; ++k) {
    const Vector z{u(rng), u(rng), u(rng), u(rng)};
    EXPECT_LE(best, cumulative_system_loss(stream, z, 100) + 1e-7);
  }
  for (double v : comp.x_star) {
    EXPECT_GE(v, -0.15);
    EXPECT_LE(v, 0.15);
  }
}

TEST(Regret, ZeroWhenPlayingTheComparator) {
  const auto stream = synthetic_stream(3, 4, 20, 0.5, 4, 0.3);
  const BoxConstraintSet box(-0.15, 0.15, 4);
  const auto comp = offline_comparator(stream, 20, box);
  const auto traj = scripted(std::vector<std::vector<Vector>>(20, std::vector<Vector>(3, comp.x_star)), box);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(regret(traj, stream, comp, i, 20), 0.0, 1e-12);
  EXPECT_EQ(cacv(traj, 20), 0.0);
}

TEST(Regret, SingleRoundClosedForm) {
  // One unit, l(x) = 1/2 (x - 0.1)^2: the comparator is 0.1, playing 0 costs 0.005.
  const BoxConstraintSet box(-0.15, 0.15, 1);
  const LossStream direct(1, 1, 0.0, 0.15, {{{1.0}, 0.1}});
  const auto comp = offline_comparator(direct, 1, box);
  EXPECT_NEAR(comp.x_star[0], 0.1, 1e-9);
  const auto traj = scripted({{Vector{0.0}}}, box);
  EXPECT_NEAR(regret(traj, direct, comp, 0, 1), 0.005, 1e-12);
  EXPECT_DOUBLE_EQ(sreg(traj, direct, comp, 1), regret(traj, direct, comp, 0, 1));
}

TEST(Regret, SregIsMaximumOverUnits) {
  const auto stream = synthetic_stream(4, 4, 30, 0.0, 9, 0.3);
  const BoxConstraintSet box(-0.15, 0.15, 4);
  const auto comp = offline_comparator(stream, 30, box);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  std::vector<std::vector<Vector>> rounds(30, std::vector<Vector>(4));
  for (auto& r : rounds)
    for (auto& x : r) x = {u(rng), u(rng), u(rng), u(rng)};
  const auto traj = scripted(rounds, box);
  double top = -1e300;
  for (std::size_t i = 0; i < 4; ++i) top = std::max(top, regret(traj, stream, comp, i, 30));
  EXPECT_EQ(sreg(traj, stream, comp, 30), top);
  EXPECT_THROW(regret(traj, stream, comp, 0, 31), ConfigError);
}

TEST(Cacv, Examples) {
  const BoxConstraintSet box(-0.15, 0.15, 2);
  const auto traj = scripted({{Vector{0.25, 0.0}, Vector{0.0, -0.35}}, {Vector{0.0, 0.0}, Vector{0.15, 0.15}}},
                             box);
  EXPECT_NEAR(cacv(traj, 1), 0.3, 1e-15);
  EXPECT_NEAR(cacv(traj, 2), 0.3, 1e-15);
}

TEST(Cacv, NonDecreasingInT) {
  const BoxConstraintSet box(-0.15, 0.15, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<std::vector<Vector>> rounds(50, std::vector<Vector>(2));
  for (auto& r : rounds)
    for (auto& x : r) x = {u(rng), u(rng), u(rng)};
  const auto traj = scripted(rounds, box);
  for (std::size_t t = 2; t <= 50; ++t) EXPECT_GE(cacv(traj, t), cacv(traj, t - 1));
}

TEST(CommunicationCost, Examples) {
  const TopologySchedule empty({Graph(4)}, {WeightMatrix::identity(4)}, 1);
  EXPECT_EQ(communication_cost(empty, 10), 0u);
  EXPECT_EQ(communication_cost(default_ring6_schedule(), 4), 24u);
  const auto complete = TopologySchedule::with_max_degree_weights({Graph::complete(5)}, 1);
  EXPECT_EQ(communication_cost(complete, 1), 20u);
}

TEST(CheckpointGrid, Doubling) {
  EXPECT_EQ(checkpoint_grid(8192, 512), (std::vector<std::size_t>{512, 1024, 2048, 4096, 8192}));
  EXPECT_EQ(checkpoint_grid(8192), (std::vector<std::size_t>{512, 1024, 2048, 4096, 8192}));
  EXPECT_EQ(checkpoint_grid(100, 512), (std::vector<std::size_t>{100}));
  EXPECT_EQ(checkpoint_grid(1000, 512), (std::vector<std::size_t>{512, 1000}));
  EXPECT_THROW(checkpoint_grid(0), ConfigError);
}

MetricSeries series_of(std::vector<std::pair<std::size_t, Vector>> rows) {
  MetricSeries s;
  for (auto& [cp, regs] : rows) {
    MetricRow r;
    r.checkpoint = cp;
    r.regrets = regs;
    r.sreg = *std::max_element(regs.begin(), regs.end());
    r.sreg_max_of_mean = r.sreg;
    r.cacv = regs[0];
    s.rows.push_back(r);
  }
  return s;
}

TEST(AveragedMetrics, IdentityAndCancellation) {
  const auto a = series_of({{4, {1.0, 3.0}}, {8, {2.0, -1.0}}});
  const auto one = averaged_metrics({a});
  EXPECT_EQ(one.rows[0].regrets, a.rows[0].regrets);
  EXPECT_EQ(one.rows[1].sreg, a.rows[1].sreg);

  const auto b = series_of({{4, {-1.0, -3.0}}, {8, {-2.0, 1.0}}});
  const auto mean = averaged_metrics({a, b});
  EXPECT_EQ(mean.rows[0].regrets, (Vector{0.0, 0.0}));
  EXPECT_EQ(mean.rows[0].cacv, 0.0);
  // Mean of maxima (3 and -1) vs maximum of means (0).
  EXPECT_EQ(mean.rows[0].sreg, 1.0);
  EXPECT_EQ(mean.rows[0].sreg_max_of_mean, 0.0);

  const auto same = averaged_metrics({a, a, a});
  EXPECT_EQ(same.rows[1].regrets, a.rows[1].regrets);
}

TEST(AveragedMetrics, RejectsMismatchedGrids) {
  EXPECT_THROW(averaged_metrics({series_of({{4, {1.0}}}), series_of({{5, {1.0}}})}), ConfigError);
  EXPECT_THROW(averaged_metrics({}), ConfigError);
}

TEST(MetricSeries, AgreesWithDirectMetrics) {
  const auto stream = synthetic_stream(6, 4, 64, 0.0, 12, 0.3);
  const BoxConstraintSet box(-0.15, 0.15, 4);
  ScheduleInputs in;
  in.constraint_count = 8;
  in.gradient_bound = stream.gradient_bound(box);
  in.radius = 0.3;
  in.horizon = 64;
  const auto hyper = make_schedule(Variant::kConvexFull, in);
  const auto topo = default_ring6_schedule();
  const auto traj = run_experiment(stream, topo, hyper, box, 12);
  const auto series = compute_metric_series(traj, stream, box, topo, {16, 64});
  for (const auto& row : series.rows) {
    const auto comp = offline_comparator(stream, row.checkpoint, box);
    EXPECT_NEAR(row.sreg, sreg(traj, stream, comp, row.checkpoint), 1e-8);
    EXPECT_EQ(row.cacv, cacv(traj, row.checkpoint));
    EXPECT_EQ(row.comm_cost, static_cast<double>(communication_cost(topo, row.checkpoint)));
  }
}

TEST(BoundConstants, DefaultNetworkPsi) {
  BoundInputs in;
  in.units = 6;
  in.window = 2;
  in.zeta = 0.5;
  in.constraint_count = 8;
  in.gradient_bound = 2.0;
  in.radius = 0.3;
  const auto k = bound_constants(in);
  EXPECT_DOUBLE_EQ(k.psi, 287.0 / 288.0);
  EXPECT_GT(k.c_hat, 0.0);
  EXPECT_GT(k.regret_constant, 0.0);
  EXPECT_GT(k.cacv_constant, 0.0);
  EXPECT_DOUBLE_EQ(k.regret_rate.power, 0.5);
  EXPECT_DOUBLE_EQ(k.cacv_rate.power, 0.75);
}

TEST(BoundConstants, ConvexCacvConstantExample) {
  BoundInputs in;  // N = 1, a = 2, p = 1, G = 1, R = 1
  EXPECT_DOUBLE_EQ(bound_constants(in).cacv_constant, std::sqrt(7.0));
}

TEST(BoundConstants, AllVariantsPositive) {
  for (Variant v : {Variant::kConvexFull, Variant::kStronglyConvexFull, Variant::kConvexBandit,
                    Variant::kStronglyConvexBandit}) {
    BoundInputs in;
    in.variant = v;
    in.units = 6;
    in.window = 2;
    in.zeta = 0.5;
    in.constraint_count = 8;
    in.gradient_bound = 2.0;
    in.radius = 0.3;
    in.strong_convexity = 2.0;
    in.value_bound = 1.5;
    in.dimension = 4;
    const auto k = bound_constants(in);
    EXPECT_GT(k.regret_constant, 0.0) << to_string(v);
    EXPECT_GT(k.cacv_constant, 0.0) << to_string(v);
    EXPECT_GT(k.regret_bound(8192.0), 0.0);
  }
}

TEST(BoundConstants, LiteralPsiIsRejected) {
  BoundInputs in;
  in.units = 6;
  in.window = 2;
  in.zeta = 0.5;
  in.literal_psi = true;
  EXPECT_THROW(bound_constants(in), ConfigError);
}

}  // namespace
}  // namespace doco
