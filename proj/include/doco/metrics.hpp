#pragma once

// Regret against the best fixed feasible decision in hindsight, cumulative
// absolute constraint violation, communication cost and the closed-form
// bound constants of the convergence guarantees.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doco/algorithm.hpp"
#include "doco/errors.hpp"
#include "doco/linalg.hpp"
#include "doco/network.hpp"
#include "doco/problems.hpp"

namespace doco {

// Running sums that determine F_T(x) = sum_{t<=T} sum_j l_{j,t}(x) for the
// regression family: F(x) = 1/2 x^T S x - x^T r + 1/2 q + rho * n * ||x||^2.
class SufficientStats {
 public:
  SufficientStats(std::size_t dimension, double rho)
      : dim_(dimension), rho_(rho), gram_(dimension * dimension, 0.0), cross_(dimension, 0.0) {}

  void add(const RegressionExample& ex) {
    require_same_size(ex.features.size(), dim_, "sufficient statistics");
    const auto& a = ex.features;
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t c = 0; c < dim_; ++c) gram_[r * dim_ + c] += a[r] * a[c];
      cross_[r] += a[r] * ex.target;
    }
    target_sq_ += ex.target * ex.target;
    ++count_;
  }

  // Adds every unit's example for rounds first..last.
  void add_rounds(const LossStream& stream, std::size_t first, std::size_t last) {
    for (std::size_t t = first; t <= last; ++t)
      for (std::size_t i = 0; i < stream.units(); ++i) add(stream.example(i, t));
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }

  double objective(std::span<const double> x) const {
    double quad = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) quad += x[r] * gram_[r * dim_ + c] * x[c];
    return 0.5 * quad - dot(x, cross_) + 0.5 * target_sq_ +
           rho_ * static_cast<double>(count_) * squared_norm(x);
  }

  Vector gradient(std::span<const double> x) const {
    Vector g(dim_, 0.0);
    const double reg = 2.0 * rho_ * static_cast<double>(count_);
    for (std::size_t r = 0; r < dim_; ++r) {
      double acc = -cross_[r] + reg * x[r];
      for (std::size_t c = 0; c < dim_; ++c) acc += gram_[r * dim_ + c] * x[c];
      g[r] = acc;
    }
    return g;
  }

  // trace(S) + 2 rho n bounds the largest Hessian eigenvalue.
  double curvature_bound() const {
    double tr = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) tr += gram_[r * dim_ + r];
    return tr + 2.0 * rho_ * static_cast<double>(count_);
  }

 private:
  std::size_t dim_;
  double rho_;
  std::vector<double> gram_;
  Vector cross_;
  double target_sq_ = 0.0;
  std::size_t count_ = 0;
};

struct Comparator {
  Vector x_star;
  double objective_value = 0.0;
  double solver_residual = 0.0;
  std::size_t iterations = 0;
};

inline constexpr double kComparatorStepTolerance = 1e-9;
inline constexpr std::size_t kComparatorMaxIterations = 100000;

// Projected gradient descent with coordinate clamping onto the box.
inline Comparator solve_comparator(const SufficientStats& stats, const ConstraintSet& constraints,
                                   std::optional<Vector> warm_start = std::nullopt) {
  const auto box = constraints.as_box();
  if (!box) throw ConfigError("offline comparator supports box constraints only");
  const std::size_t d = stats.dimension();
  require_same_size(constraints.dimension(), d, "comparator dimension");
  auto clamp = [&](Vector& x) {
    for (double& v : x) v = std::clamp(v, box->lower, box->upper);
  };
  Vector x = warm_start.value_or(Vector(d, 0.0));
  require_same_size(x.size(), d, "comparator warm start");
  clamp(x);
  const double curvature = stats.curvature_bound();
  Comparator out;
  if (!(curvature > 0.0)) {
    // Constant objective: every feasible point is optimal.
    out.x_star = x;
    out.objective_value = stats.objective(x);
    return out;
  }
  const double step = 1.0 / curvature;
  double change = 0.0;
  std::size_t k = 0;
  for (; k < kComparatorMaxIterations; ++k) {
    const Vector g = stats.gradient(x);
    Vector next = x;
    axpy(-step, g, next);
    clamp(next);
    change = distance(next, x);
    x.swap(next);
    if (change <= kComparatorStepTolerance) break;
  }
  if (change > kComparatorStepTolerance) {
    throw SolverError("comparator did not converge in " +
                          std::to_string(kComparatorMaxIterations) + " iterations",
                      change);
  }
  out.x_star = std::move(x);
  out.objective_value = stats.objective(out.x_star);
  out.solver_residual = change;
  out.iterations = k + 1;
  return out;
}

inline Comparator offline_comparator(const LossStream& stream, std::size_t horizon,
                                     const ConstraintSet& constraints) {
  if (horizon == 0 || horizon > stream.horizon()) {
    throw ConfigError("comparator horizon outside the stream");
  }
  SufficientStats stats(stream.dimension(), stream.rho());
  stats.add_rounds(stream, 1, horizon);
  return solve_comparator(stats, constraints);
}

// sum_{t<=T} sum_j l_{j,t}(x), summed round by round.
inline double cumulative_system_loss(const LossStream& stream, std::span<const double> x,
                                     std::size_t horizon) {
  double acc = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    double row = 0.0;
    for (std::size_t j = 0; j < stream.units(); ++j) row += stream.oracle(j, t).value(x);
    acc += row;
  }
  return acc;
}

namespace detail {

inline void check_horizon(const RunTrajectory& traj, std::size_t horizon) {
  if (horizon == 0 || horizon > traj.rounds()) {
    throw ConfigError("T = " + std::to_string(horizon) + " exceeds trajectory length " +
                      std::to_string(traj.rounds()));
  }
}

// prefix[t] = sum_{s<=t} sum_j l_{j,s}(x_i(s)), with prefix[0] = 0.
inline Vector unit_loss_prefix(const RunTrajectory& traj, const LossStream& stream, std::size_t i,
                               std::size_t horizon) {
  Vector prefix(horizon + 1, 0.0);
  double acc = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto x = traj.decision(t, i);
    double row = 0.0;
    for (std::size_t j = 0; j < stream.units(); ++j) row += stream.oracle(j, t).value(x);
    acc += row;
    prefix[t] = acc;
  }
  return prefix;
}

}  // namespace detail

// Reg(i, T): unit i's decisions evaluated on every unit's losses, minus the
// comparator's cumulative loss.
inline double regret(const RunTrajectory& traj, const LossStream& stream,
                     const Comparator& comparator, std::size_t i, std::size_t horizon) {
  detail::check_horizon(traj, horizon);
  return detail::unit_loss_prefix(traj, stream, i, horizon)[horizon] -
         cumulative_system_loss(stream, comparator.x_star, horizon);
}

inline double sreg(const RunTrajectory& traj, const LossStream& stream,
                   const Comparator& comparator, std::size_t horizon) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.units(); ++i) {
    best = std::max(best, regret(traj, stream, comparator, i, horizon));
  }
  return best;
}

// sum_t sum_i sum_s [c_s(x_i(t))]_+
inline double cacv(const RunTrajectory& traj, std::size_t horizon) {
  detail::check_horizon(traj, horizon);
  double acc = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t)
    for (std::size_t i = 0; i < traj.units(); ++i)
      for (double v : traj.positive_parts(t, i)) acc += v;
  return acc;
}

// Two directed transmissions per undirected edge, summed over rounds 1..T.
inline std::uint64_t communication_cost(const TopologySchedule& schedule, std::size_t horizon) {
  std::uint64_t total = 0;
  for (std::size_t t = 1; t <= horizon; ++t) total += 2 * schedule.graph_at(t).edge_count();
  return total;
}

// {ceil(T/16) * 2^k} capped at T, plus T.
inline std::vector<std::size_t> checkpoint_grid(std::size_t horizon, std::size_t first = 0) {
  if (horizon == 0) throw ConfigError("horizon T must be >= 1");
  std::size_t cp = first == 0 ? (horizon + 15) / 16 : first;
  std::vector<std::size_t> grid;
  while (cp < horizon) {
    grid.push_back(cp);
    cp *= 2;
  }
  grid.push_back(horizon);
  return grid;
}

struct MetricRow {
  std::size_t checkpoint = 0;
  double sreg = 0.0;              // max_i Reg(i, T); for averages, the mean of per-run maxima
  Vector regrets;                 // Reg(i, T) per unit
  double cacv = 0.0;
  double comm_cost = 0.0;
  double sreg_max_of_mean = 0.0;  // max_i of the (averaged) Reg(i, T)
};

struct MetricSeries {
  std::vector<MetricRow> rows;

  std::vector<std::size_t> checkpoints() const {
    std::vector<std::size_t> cps;
    for (const auto& r : rows) cps.push_back(r.checkpoint);
    return cps;
  }
};

// Evaluates every metric at each checkpoint; the comparator is re-solved per
// checkpoint from running sufficient statistics.
inline MetricSeries compute_metric_series(const RunTrajectory& traj, const LossStream& stream,
                                          const ConstraintSet& constraints,
                                          const TopologySchedule& topology,
                                          const std::vector<std::size_t>& checkpoints) {
  if (checkpoints.empty()) throw ConfigError("empty checkpoint grid");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    detail::check_horizon(traj, checkpoints[k]);
    if (k > 0 && checkpoints[k] <= checkpoints[k - 1]) {
      throw ConfigError("checkpoints must be strictly increasing");
    }
  }
  const std::size_t last = checkpoints.back();
  std::vector<Vector> prefixes;
  for (std::size_t i = 0; i < traj.units(); ++i) {
    prefixes.push_back(detail::unit_loss_prefix(traj, stream, i, last));
  }

  MetricSeries series;
  SufficientStats stats(stream.dimension(), stream.rho());
  std::size_t covered = 0;
  std::optional<Vector> warm;
  for (std::size_t cp : checkpoints) {
    stats.add_rounds(stream, covered + 1, cp);
    covered = cp;
    const Comparator comp = solve_comparator(stats, constraints, warm);
    warm = comp.x_star;
    const double best = cumulative_system_loss(stream, comp.x_star, cp);
    MetricRow row;
    row.checkpoint = cp;
    row.sreg = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.units(); ++i) {
      row.regrets.push_back(prefixes[i][cp] - best);
      row.sreg = std::max(row.sreg, row.regrets.back());
    }
    row.sreg_max_of_mean = row.sreg;
    row.cacv = cacv(traj, cp);
    row.comm_cost = static_cast<double>(communication_cost(topology, cp));
    series.rows.push_back(std::move(row));
  }
  return series;
}

// Per-checkpoint arithmetic means across runs.
inline MetricSeries averaged_metrics(const std::vector<MetricSeries>& runs) {
  if (runs.empty()) throw ConfigError("no runs to average");
  const auto grid = runs.front().checkpoints();
  for (const auto& r : runs) {
    if (r.checkpoints() != grid) throw ConfigError("checkpoint grids differ between runs");
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      require_same_size(r.rows[k].regrets.size(), runs.front().rows[k].regrets.size(),
                        "units per run");
    }
  }
  const double k = static_cast<double>(runs.size());
  MetricSeries out;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    MetricRow row;
    row.checkpoint = grid[c];
    row.regrets.assign(runs.front().rows[c].regrets.size(), 0.0);
    for (const auto& r : runs) {
      const MetricRow& src = r.rows[c];
      row.sreg += src.sreg;
      row.cacv += src.cacv;
      row.comm_cost += src.comm_cost;
      for (std::size_t i = 0; i < row.regrets.size(); ++i) row.regrets[i] += src.regrets[i];
    }
    row.sreg /= k;
    row.cacv /= k;
    row.comm_cost /= k;
    for (double& v : row.regrets) v /= k;
    row.sreg_max_of_mean = *std::max_element(row.regrets.begin(), row.regrets.end());
    out.rows.push_back(std::move(row));
  }
  return out;
}

// T^power * (log T)^log_power
struct RateForm {
  double power = 0.0;
  double log_power = 0.0;

  double operator()(double horizon) const {
    return std::pow(horizon, power) * std::pow(std::log(horizon), log_power);
  }
};

struct BoundInputs {
  Variant variant = Variant::kConvexFull;
  std::size_t units = 1;        // N
  std::size_t window = 1;       // B
  double zeta = 1.0;
  std::size_t constraint_count = 1;  // p
  double gradient_bound = 1.0;  // G
  double radius = 1.0;          // R_X
  double a = 2.0;
  double c = 0.5;
  double strong_convexity = 0.0;  // sigma
  double value_bound = 0.0;       // C
  std::size_t dimension = 1;      // d
  // Evaluate psi = (1 - zeta/(4N^2))^-2 as printed; this makes C_hat negative.
  bool literal_psi = false;
};

struct BoundConstants {
  double psi = 0.0;
  double c_hat = 0.0;
  double regret_constant = 0.0;
  double cacv_constant = 0.0;
  std::string regret_name;
  std::string cacv_name;
  RateForm regret_rate;
  RateForm cacv_rate;

  double regret_bound(double horizon) const { return regret_constant * regret_rate(horizon); }
  double cacv_bound(double horizon) const { return cacv_constant * cacv_rate(horizon); }
};

inline BoundConstants bound_constants(const BoundInputs& in) {
  if (in.units == 0 || in.window == 0 || in.constraint_count == 0 || in.dimension == 0) {
    throw ConfigError("N, B, p and d must be positive");
  }
  if (!(in.zeta > 0.0 && in.zeta <= 1.0)) throw ConfigError("zeta must lie in (0, 1]");
  if (!(in.a > 1.0)) throw ConfigError("a must be > 1");
  if (!(in.gradient_bound > 0.0) || !(in.radius > 0.0)) {
    throw ConfigError("G and R_X must be positive");
  }
  if (!is_strongly_convex(in.variant) && !(in.c > 0.0 && in.c < 1.0)) {
    throw ConfigError("c must lie in (0, 1)");
  }
  if (is_strongly_convex(in.variant) && !(in.strong_convexity > 0.0)) {
    throw ConfigError("sigma must be positive for strongly convex variants");
  }
  if (is_bandit(in.variant) && !(in.value_bound > 0.0)) {
    throw ConfigError("value bound C must be positive for bandit variants");
  }

  const double n = static_cast<double>(in.units);
  const double b = static_cast<double>(in.window);
  const double p = static_cast<double>(in.constraint_count);
  const double g = in.gradient_bound;
  const double r = in.radius;
  const double a = in.a;
  const double c = in.c;
  const double sigma = in.strong_convexity;
  const double cv = in.value_bound;
  const double d = static_cast<double>(in.dimension);

  BoundConstants out;
  const double base = 1.0 - in.zeta / (4.0 * n * n);
  out.psi = in.literal_psi ? std::pow(base, -2.0) : base;
  out.c_hat = 2.0 * n *
              (3.0 * n / (std::pow(out.psi, 2.0 + 1.0 / b) * (1.0 - std::pow(out.psi, 1.0 / b))) +
               4.0);
  if (!(out.c_hat > 0.0)) {
    throw ConfigError("C_hat = " + std::to_string(out.c_hat) +
                      " is not positive (psi = " + std::to_string(out.psi) + ")");
  }
  const double ch = out.c_hat;

  switch (in.variant) {
    case Variant::kConvexFull:
      out.regret_name = "C_tilde";
      out.cacv_name = "C_bar";
      out.regret_constant = 0.5 * a * p * n * g * g * r * r + n * (1.0 + ch) / (a * p) +
                            n * ch * ch / (4.0 * a * (a - 1.0) * p);
      out.cacv_constant = std::sqrt(n * n / (a - 1.0) *
                                    (1.0 + 2.0 * a * p * g * r + 0.5 * a * a * p * p * g * g * r * r));
      out.regret_rate = {std::max(c, 1.0 - c), 0.0};
      out.cacv_rate = {1.0 - c / 2.0, 0.0};
      break;
    case Variant::kStronglyConvexFull:
      out.regret_name = "C_tilde_sc";
      out.cacv_name = "C_bar_sc";
      out.regret_constant = n * g * g / (2.0 * sigma) * (4.0 + 4.0 * ch + ch * ch);
      out.cacv_constant = 4.0 * p * n * std::pow(g, 1.5) / std::sqrt(sigma) *
                          (std::sqrt(r) + std::sqrt(g / sigma));
      out.regret_rate = {0.0, 1.0};
      out.cacv_rate = {0.5, 0.5};
      break;
    case Variant::kConvexBandit:
      out.regret_name = "C_tilde_bandit";
      out.cacv_name = "C_bar_bandit";
      out.regret_constant = 3.0 * n * g + n * cv * ch * d / (a * p * g) +
                            n * cv * cv * d * d / (a * p * g * g) + 0.5 * a * p * n * g * g * r * r +
                            n * ch * ch / (4.0 * a * (a - 1.0) * p);
      out.cacv_constant =
          std::sqrt(n * n / (a - 1.0) *
                    (cv * cv * d * d / (g * g) + 2.0 * a * p * g * r + 0.5 * a * a * p * p * g * g * r * r));
      out.regret_rate = {std::max(1.0 - c / 3.0, c), 0.0};
      out.cacv_rate = {1.0 - c / 2.0, 0.0};
      break;
    case Variant::kStronglyConvexBandit:
      out.regret_name = "C_tilde_bandit_sc";
      out.cacv_name = "C_bar_bandit_sc";
      out.regret_constant = 3.0 * n * g + n / (2.0 * sigma) *
                                              (4.0 * cv * ch * g * d + 4.0 * cv * cv * d * d +
                                               ch * ch * g * g);
      out.cacv_constant = 4.0 * p * n * g / std::sqrt(sigma) *
                          (std::sqrt(g * r) + cv * d / std::sqrt(sigma));
      out.regret_rate = {2.0 / 3.0, 1.0};
      out.cacv_rate = {0.5, 0.5};
      break;
  }
  return out;
}

}  // namespace doco
