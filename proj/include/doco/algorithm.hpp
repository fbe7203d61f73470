#pragma once

// Distributed primal-dual online updates with consensus mixing, for
// full-information and one-point bandit feedback.
//
// Every unit i holds a decision x_i and multipliers lambda_i. One round:
//   y_i   = x_i - beta_t * (g_i + sum_s lambda_is * d[c_s(x_i)]_+)
//   x_i'  = Proj_ball(sum_j a_ij(t) y_j)
//   lambda_i' = [c(x_i')]_+ / eta_t
// where g_i is the exact gradient (full information) or the one-point
// estimate (d/eps) l(x_i + eps u) u (bandit feedback).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doco/errors.hpp"
#include "doco/linalg.hpp"
#include "doco/network.hpp"
#include "doco/problems.hpp"
#include "doco/rng.hpp"

namespace doco {

inline constexpr double kContainmentTolerance = 1e-12;

enum class Variant {
  kConvexFull,
  kStronglyConvexFull,
  kConvexBandit,
  kStronglyConvexBandit,
};

inline bool is_bandit(Variant v) {
  return v == Variant::kConvexBandit || v == Variant::kStronglyConvexBandit;
}

inline bool is_strongly_convex(Variant v) {
  return v == Variant::kStronglyConvexFull || v == Variant::kStronglyConvexBandit;
}

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kConvexFull: return "convex-full";
    case Variant::kStronglyConvexFull: return "strongly-convex-full";
    case Variant::kConvexBandit: return "convex-bandit";
    case Variant::kStronglyConvexBandit: return "strongly-convex-bandit";
  }
  return "unknown";
}

inline Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::kConvexFull, Variant::kStronglyConvexFull, Variant::kConvexBandit,
                    Variant::kStronglyConvexBandit}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown algorithm variant '" + std::string(name) + "'");
}

struct ScheduleInputs {
  double c = 0.5;
  double a = 2.0;
  std::size_t constraint_count = 1;  // p
  double gradient_bound = 1.0;       // G
  double strong_convexity = 0.0;     // sigma
  double radius = 1.0;               // R_X
  std::size_t horizon = 1;           // T
};

// Step sizes beta_t, dual regularizers eta_t and, for bandit feedback, the
// exploration radius eps_t and shrinkage pi.
class HyperSchedule {
 public:
  HyperSchedule(Variant variant, ScheduleInputs in) : variant_(variant), in_(in) {}

  Variant variant() const noexcept { return variant_; }
  const ScheduleInputs& inputs() const noexcept { return in_; }
  std::size_t horizon() const noexcept { return in_.horizon; }
  bool bandit() const noexcept { return is_bandit(variant_); }

  double eta(std::size_t t) const {
    check_round(t);
    const double p = static_cast<double>(in_.constraint_count);
    const double g = in_.gradient_bound;
    if (is_strongly_convex(variant_)) {
      return 2.0 * p * g * g / (in_.strong_convexity * static_cast<double>(t));
    }
    return std::pow(static_cast<double>(in_.horizon), -in_.c);
  }

  double beta(std::size_t t) const {
    check_round(t);
    if (is_strongly_convex(variant_)) {
      return 1.0 / (in_.strong_convexity * static_cast<double>(t));
    }
    const double p = static_cast<double>(in_.constraint_count);
    const double g = in_.gradient_bound;
    return 1.0 / (in_.a * p * g * g * std::pow(static_cast<double>(in_.horizon), in_.c));
  }

  // b = c/3 for convex bandit, 1/3 for strongly convex bandit, 0 otherwise.
  double exploration_exponent() const noexcept {
    switch (variant_) {
      case Variant::kConvexBandit: return in_.c / 3.0;
      case Variant::kStronglyConvexBandit: return 1.0 / 3.0;
      default: return 0.0;
    }
  }

  double exploration(std::size_t t) const {
    check_round(t);
    if (!bandit()) return 0.0;
    return std::pow(static_cast<double>(in_.horizon), -exploration_exponent());
  }

  double shrinkage() const {
    if (!bandit()) return 0.0;
    return 1.0 / (in_.radius * std::pow(static_cast<double>(in_.horizon), exploration_exponent()));
  }

  // Radius of the ball decisions are projected onto: R_X or (1 - pi) R_X.
  double decision_radius() const { return (1.0 - shrinkage()) * in_.radius; }

 private:
  void check_round(std::size_t t) const {
    if (t == 0 || t > in_.horizon) {
      throw ConfigError("round " + std::to_string(t) + " outside 1.." +
                        std::to_string(in_.horizon));
    }
  }

  Variant variant_;
  ScheduleInputs in_;
};

inline HyperSchedule make_schedule(Variant variant, const ScheduleInputs& in) {
  if (!(in.c > 0.0 && in.c < 1.0)) throw ConfigError("c must lie in (0, 1)");
  if (!(in.a > 1.0)) throw ConfigError("a must be > 1");
  if (in.horizon == 0) throw ConfigError("horizon T must be >= 1");
  if (in.constraint_count == 0) throw ConfigError("need at least one constraint");
  if (!(in.gradient_bound > 0.0) || !std::isfinite(in.gradient_bound)) {
    throw ConfigError("gradient bound G must be positive and finite");
  }
  if (!(in.radius > 0.0)) throw ConfigError("ball radius R_X must be positive");
  if (is_strongly_convex(variant) && !(in.strong_convexity > 0.0)) {
    throw ConfigError("strongly convex variants need sigma > 0 (rho > 0)");
  }
  HyperSchedule schedule(variant, in);
  if (schedule.bandit()) {
    if (!(schedule.shrinkage() < 1.0)) {
      throw ConfigError("shrinkage pi = " + std::to_string(schedule.shrinkage()) +
                        " leaves no room for decisions; increase T or R_X");
    }
    // eps_t <= pi R_X keeps every query point in the ball; equality holds here.
    const double slack = schedule.shrinkage() * in.radius * (1.0 + 1e-12);
    for (std::size_t t = 1; t <= in.horizon; ++t) {
      if (schedule.exploration(t) > slack) {
        throw ConfigError("exploration radius exceeds pi R_X at round " + std::to_string(t));
      }
    }
  }
  return schedule;
}

inline Vector project_ball(std::span<const double> x, double radius) {
  if (!(radius > 0.0)) throw ConfigError("projection radius must be positive");
  Vector out(x.begin(), x.end());
  const double n = norm(x);
  if (n > radius) {
    const double s = radius / n;
    for (double& v : out) v *= s;
  }
  return out;
}

// grad + sum_s lambda_s d[c_s(x)]_+
inline Vector primal_direction(std::span<const double> grad, std::span<const double> lambda,
                               const ConstraintSet& constraints, std::span<const double> x) {
  require_same_size(grad.size(), constraints.dimension(), "primal direction gradient");
  require_same_size(x.size(), constraints.dimension(), "primal direction point");
  require_same_size(lambda.size(), constraints.count(), "primal direction multipliers");
  Vector dir(grad.begin(), grad.end());
  for (std::size_t s = 0; s < constraints.count(); ++s) {
    if (lambda[s] != 0.0 && constraints.value(s, x) > 0.0) {
      constraints.add_scaled_gradient(s, x, lambda[s], dir);
    }
  }
  return dir;
}

// argmax over lambda >= 0 of the augmented Lagrangian: [c_s(x)]_+ / eta.
inline Vector dual_update(std::span<const double> x_next, double eta,
                          const ConstraintSet& constraints) {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  Vector lambda = constraints.positive_parts(x_next);
  for (double& v : lambda) v /= eta;
  return lambda;
}

// l(x) + sum_s lambda_s [c_s(x)]_+ - eta/2 ||lambda||^2
inline double augmented_lagrangian(const LossOracle& loss, const ConstraintSet& constraints,
                                   std::span<const double> x, std::span<const double> lambda,
                                   double eta) {
  require_same_size(lambda.size(), constraints.count(), "lagrangian multipliers");
  double v = loss.value(x);
  for (std::size_t s = 0; s < constraints.count(); ++s) {
    v += lambda[s] * positive_part(constraints.value(s, x));
  }
  return v - 0.5 * eta * squared_norm(lambda);
}

// Normalized vector of independent standard normals.
inline Vector sample_unit_sphere(std::size_t dimension, Rng& rng) {
  if (dimension == 0) throw ConfigError("sphere dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(dimension);
  double n = 0.0;
  do {
    for (double& v : u) v = normal(rng);
    n = norm(u);
  } while (n == 0.0);
  for (double& v : u) v /= n;
  return u;
}

// (d / eps) * l(x + eps u) * u
inline Vector one_point_estimator(double loss_value, std::size_t dimension, double eps,
                                  std::span<const double> u) {
  if (!(eps > 0.0)) throw ConfigError("exploration radius must be positive");
  require_same_size(u.size(), dimension, "estimator direction");
  return scaled(static_cast<double>(dimension) / eps * loss_value, u);
}

struct UnitState {
  Vector x;
  Vector lambda;
};

inline std::vector<UnitState> initial_states(std::size_t units, std::size_t dimension,
                                             std::size_t constraint_count) {
  return std::vector<UnitState>(units,
                                UnitState{Vector(dimension, 0.0), Vector(constraint_count, 0.0)});
}

// What every unit did in one round.
struct RoundRecord {
  std::vector<Vector> decisions;       // x_i(t)
  std::vector<Vector> queries;         // x_i(t) + eps_t u_i(t); equals decisions without bandit
  Vector incurred;                     // l_{i,t}(x_i(t))
  Vector observed;                     // value the unit actually saw
  std::vector<Vector> positive_parts;  // [c_s(x_i(t))]_+
  std::size_t edges = 0;
};

namespace detail {

inline void check_dual(const Vector& lambda) {
  for (double v : lambda) {
    if (!(v >= 0.0)) throw InvariantViolation("negative dual variable");
  }
}

inline void check_ball(std::span<const double> x, double radius, const char* what,
                       std::size_t t) {
  if (norm(x) > radius + kContainmentTolerance) {
    throw InvariantViolation(std::string(what) + " left its ball at round " + std::to_string(t) +
                             ": norm " + std::to_string(norm(x)) + " > " +
                             std::to_string(radius));
  }
}

// Steps shared by both feedback models once the per-unit gradient signals are known.
inline void mix_project_dual(std::vector<UnitState>& states, const std::vector<Vector>& signals,
                             const WeightMatrix& weights, const HyperSchedule& hyper,
                             const ConstraintSet& constraints, std::size_t t) {
  const std::size_t n = states.size();
  const double beta = hyper.beta(t);
  std::vector<Vector> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector dir = primal_direction(signals[i], states[i].lambda, constraints, states[i].x);
    y[i] = states[i].x;
    axpy(-beta, dir, y[i]);
  }
  const auto mixed = consensus_mix(weights, y);
  const double radius = hyper.decision_radius();
  const double eta = hyper.eta(t);
  for (std::size_t i = 0; i < n; ++i) {
    states[i].x = project_ball(mixed[i], radius);
    states[i].lambda = dual_update(states[i].x, eta, constraints);
    check_ball(states[i].x, radius, "decision", t + 1);
    check_dual(states[i].lambda);
  }
}

inline void check_round_inputs(const std::vector<UnitState>& states,
                               std::span<const LossOracle> losses, const WeightMatrix& weights) {
  require_same_size(losses.size(), states.size(), "losses per round");
  require_same_size(weights.size(), states.size(), "weight matrix size");
}

}  // namespace detail

inline RoundRecord run_round_full(std::vector<UnitState>& states,
                                  std::span<const LossOracle> losses,
                                  const WeightMatrix& weights, const HyperSchedule& hyper,
                                  const ConstraintSet& constraints, std::size_t t) {
  detail::check_round_inputs(states, losses, weights);
  const std::size_t n = states.size();
  RoundRecord rec;
  rec.incurred.resize(n);
  rec.observed.resize(n);
  std::vector<Vector> grads(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::check_ball(states[i].x, hyper.decision_radius(), "decision", t);
    rec.decisions.push_back(states[i].x);
    rec.queries.push_back(states[i].x);
    rec.incurred[i] = losses[i].value(states[i].x);
    rec.observed[i] = rec.incurred[i];
    rec.positive_parts.push_back(constraints.positive_parts(states[i].x));
    grads[i] = losses[i].gradient(states[i].x);
  }
  detail::mix_project_dual(states, grads, weights, hyper, constraints, t);
  return rec;
}

// `rngs` holds one exploration stream per unit.
inline RoundRecord run_round_bandit(std::vector<UnitState>& states,
                                    std::span<const LossOracle> losses,
                                    const WeightMatrix& weights, const HyperSchedule& hyper,
                                    const ConstraintSet& constraints, std::size_t t,
                                    std::span<Rng> rngs) {
  detail::check_round_inputs(states, losses, weights);
  require_same_size(rngs.size(), states.size(), "exploration streams");
  if (!hyper.bandit()) throw ConfigError("bandit round needs a bandit schedule");
  const std::size_t n = states.size();
  const std::size_t d = constraints.dimension();
  const double eps = hyper.exploration(t);
  const double outer = hyper.inputs().radius;
  RoundRecord rec;
  rec.incurred.resize(n);
  rec.observed.resize(n);
  std::vector<Vector> estimates(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector& x = states[i].x;
    detail::check_ball(x, hyper.decision_radius(), "decision", t);
    const Vector u = sample_unit_sphere(d, rngs[i]);
    Vector q = x;
    axpy(eps, u, q);
    detail::check_ball(q, outer, "query point", t);
    rec.decisions.push_back(x);
    rec.incurred[i] = losses[i].value(x);
    rec.observed[i] = losses[i].value(q);
    rec.positive_parts.push_back(constraints.positive_parts(x));
    rec.queries.push_back(std::move(q));
    estimates[i] = one_point_estimator(rec.observed[i], d, eps, u);
  }
  detail::mix_project_dual(states, estimates, weights, hyper, constraints, t);
  return rec;
}

// Per-round, per-unit record of a full run. Rounds are 1-based, units 0-based.
class RunTrajectory {
 public:
  RunTrajectory() = default;
  RunTrajectory(std::size_t units, std::size_t dimension, std::size_t constraint_count)
      : units_(units), dim_(dimension), p_(constraint_count) {}

  std::size_t units() const noexcept { return units_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t constraint_count() const noexcept { return p_; }
  std::size_t rounds() const noexcept { return edges_.size(); }

  void append(const RoundRecord& rec) {
    require_same_size(rec.decisions.size(), units_, "record decisions");
    for (std::size_t i = 0; i < units_; ++i) {
      require_same_size(rec.decisions[i].size(), dim_, "record decision dimension");
      require_same_size(rec.queries[i].size(), dim_, "record query dimension");
      require_same_size(rec.positive_parts[i].size(), p_, "record constraint count");
      decisions_.insert(decisions_.end(), rec.decisions[i].begin(), rec.decisions[i].end());
      queries_.insert(queries_.end(), rec.queries[i].begin(), rec.queries[i].end());
      positive_.insert(positive_.end(), rec.positive_parts[i].begin(),
                       rec.positive_parts[i].end());
      incurred_.push_back(rec.incurred[i]);
      observed_.push_back(rec.observed[i]);
    }
    edges_.push_back(rec.edges);
  }

  std::span<const double> decision(std::size_t t, std::size_t i) const {
    return {decisions_.data() + slot(t, i) * dim_, dim_};
  }
  std::span<const double> query(std::size_t t, std::size_t i) const {
    return {queries_.data() + slot(t, i) * dim_, dim_};
  }
  std::span<const double> positive_parts(std::size_t t, std::size_t i) const {
    return {positive_.data() + slot(t, i) * p_, p_};
  }
  double incurred(std::size_t t, std::size_t i) const { return incurred_[slot(t, i)]; }
  double observed(std::size_t t, std::size_t i) const { return observed_[slot(t, i)]; }
  std::size_t edges(std::size_t t) const {
    slot(t, 0);
    return edges_[t - 1];
  }

  bool operator==(const RunTrajectory&) const = default;

 private:
  std::size_t slot(std::size_t t, std::size_t i) const {
    if (t == 0 || t > rounds() || i >= units_) {
      throw std::out_of_range("trajectory slot (" + std::to_string(t) + "," + std::to_string(i) +
                              ") out of range");
    }
    return (t - 1) * units_ + i;
  }

  std::size_t units_ = 0;
  std::size_t dim_ = 0;
  std::size_t p_ = 0;
  std::vector<double> decisions_;
  std::vector<double> queries_;
  std::vector<double> positive_;
  std::vector<double> incurred_;
  std::vector<double> observed_;
  std::vector<std::size_t> edges_;
};

// Runs all T rounds of the schedule's variant from x = 0, lambda = 0.
inline RunTrajectory run_experiment(const LossStream& stream, const TopologySchedule& topology,
                                    const HyperSchedule& hyper, const ConstraintSet& constraints,
                                    std::uint64_t seed) {
  const std::size_t n = stream.units();
  const std::size_t horizon = hyper.horizon();
  if (horizon == 0) throw ConfigError("horizon T must be >= 1");
  if (topology.node_count() != n) {
    throw ConfigError("topology has " + std::to_string(topology.node_count()) +
                      " nodes but the stream has " + std::to_string(n) + " units");
  }
  if (stream.horizon() < horizon) throw ConfigError("stream shorter than the schedule horizon");
  if (stream.dimension() != constraints.dimension()) {
    throw ConfigError("stream dimension differs from constraint dimension");
  }
  if (hyper.inputs().constraint_count != constraints.count()) {
    throw ConfigError("schedule built for a different constraint count");
  }

  auto states = initial_states(n, stream.dimension(), constraints.count());
  std::vector<Rng> rngs;
  if (hyper.bandit()) {
    for (std::size_t i = 0; i < n; ++i) {
      rngs.push_back(derive_rng(seed, i, StreamPurpose::kExploration));
    }
  }
  RunTrajectory traj(n, stream.dimension(), constraints.count());
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto losses = stream.oracles_at(t);
    const WeightMatrix& w = topology.weights_at(t);
    RoundRecord rec = hyper.bandit()
                          ? run_round_bandit(states, losses, w, hyper, constraints, t, rngs)
                          : run_round_full(states, losses, w, hyper, constraints, t);
    rec.edges = topology.graph_at(t).edge_count();
    traj.append(rec);
  }
  return traj;
}

}  // namespace doco
