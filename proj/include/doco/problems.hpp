#pragma once

// Constraint sets, the regularized least-squares loss family and the loss
// streams that feed a run.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doco/errors.hpp"
#include "doco/linalg.hpp"
#include "doco/rng.hpp"

namespace doco {

struct Box {
  double lower;
  double upper;
};

// Inequality constraints c_s(x) <= 0, s = 0 .. count()-1.
class ConstraintSet {
 public:
  virtual ~ConstraintSet() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t count() const = 0;
  virtual double value(std::size_t s, std::span<const double> x) const = 0;
  // out += scale * grad c_s(x)
  virtual void add_scaled_gradient(std::size_t s, std::span<const double> x, double scale,
                                   std::span<double> out) const = 0;
  // Upper bound on ||grad c_s(x)|| over the ball.
  virtual double gradient_bound() const = 0;
  virtual std::optional<Box> as_box() const { return std::nullopt; }

  Vector gradient(std::size_t s, std::span<const double> x) const {
    check_index(s);
    Vector g(dimension(), 0.0);
    add_scaled_gradient(s, x, 1.0, g);
    return g;
  }

  Vector positive_parts(std::span<const double> x) const {
    Vector out(count());
    for (std::size_t s = 0; s < count(); ++s) out[s] = positive_part(value(s, x));
    return out;
  }

  bool feasible(std::span<const double> x, double tol = 0.0) const {
    for (std::size_t s = 0; s < count(); ++s)
      if (value(s, x) > tol) return false;
    return true;
  }

 protected:
  void check_index(std::size_t s) const {
    if (s >= count()) {
      throw std::out_of_range("constraint index " + std::to_string(s) + " out of range (p = " +
                              std::to_string(count()) + ")");
    }
  }
};

// c_m(x) = L - x_m and c_{d+m}(x) = x_m - U for m < d; gradients are -e_m, +e_m.
class BoxConstraintSet final : public ConstraintSet {
 public:
  BoxConstraintSet(double lower, double upper, std::size_t dimension)
      : lower_(lower), upper_(upper), dim_(dimension) {
    if (!(lower < upper)) throw ConfigError("box constraints need L < U");
    if (dimension == 0) throw ConfigError("box dimension must be positive");
  }

  std::size_t dimension() const override { return dim_; }
  std::size_t count() const override { return 2 * dim_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  double value(std::size_t s, std::span<const double> x) const override {
    check_index(s);
    require_same_size(x.size(), dim_, "box constraint point");
    return s < dim_ ? lower_ - x[s] : x[s - dim_] - upper_;
  }

  void add_scaled_gradient(std::size_t s, std::span<const double> x, double scale,
                           std::span<double> out) const override {
    check_index(s);
    require_same_size(x.size(), dim_, "box constraint point");
    require_same_size(out.size(), dim_, "box constraint gradient");
    if (s < dim_) {
      out[s] -= scale;
    } else {
      out[s - dim_] += scale;
    }
  }

  double gradient_bound() const override { return 1.0; }
  std::optional<Box> as_box() const override { return Box{lower_, upper_}; }

  // Largest norm of a box vertex; the box lies in any ball at least this big.
  double enclosing_radius() const {
    const double m = std::max(std::abs(lower_), std::abs(upper_));
    return m * std::sqrt(static_cast<double>(dim_));
  }

 private:
  double lower_;
  double upper_;
  std::size_t dim_;
};

// Constraints given as callables, for problems without box structure.
class FunctionConstraintSet final : public ConstraintSet {
 public:
  struct Constraint {
    std::function<double(std::span<const double>)> value;
    std::function<Vector(std::span<const double>)> gradient;
  };

  FunctionConstraintSet(std::size_t dimension, std::vector<Constraint> constraints,
                        double gradient_bound)
      : dim_(dimension), constraints_(std::move(constraints)), gradient_bound_(gradient_bound) {}

  std::size_t dimension() const override { return dim_; }
  std::size_t count() const override { return constraints_.size(); }
  double value(std::size_t s, std::span<const double> x) const override {
    check_index(s);
    return constraints_[s].value(x);
  }
  void add_scaled_gradient(std::size_t s, std::span<const double> x, double scale,
                           std::span<double> out) const override {
    check_index(s);
    const Vector g = constraints_[s].gradient(x);
    require_same_size(g.size(), out.size(), "constraint gradient");
    axpy(scale, g, out);
  }
  double gradient_bound() const override { return gradient_bound_; }

 private:
  std::size_t dim_;
  std::vector<Constraint> constraints_;
  double gradient_bound_;
};

// d[c_s(x)]_+ : grad c_s(x) where c_s(x) > 0, the zero vector otherwise.
inline Vector clipped_subgradient(const ConstraintSet& constraints, std::span<const double> x,
                                  std::size_t s) {
  if (s >= constraints.count()) {
    throw std::out_of_range("constraint index " + std::to_string(s) + " out of range");
  }
  Vector out(constraints.dimension(), 0.0);
  if (constraints.value(s, x) > 0.0) constraints.add_scaled_gradient(s, x, 1.0, out);
  return out;
}

struct RegressionExample {
  Vector features;
  double target = 0.0;
};

// l(x) = 1/2 (a^T x - b)^2 + rho ||x||^2 with analytic bounds over the ball of
// radius `radius`.
class LossOracle {
 public:
  LossOracle(const RegressionExample* example, double rho, double radius)
      : example_(example), rho_(rho), radius_(radius) {
    if (rho < 0.0) throw ConfigError("regularization rho must be nonnegative");
  }

  std::size_t dimension() const noexcept { return example_->features.size(); }
  const RegressionExample& example() const noexcept { return *example_; }
  double rho() const noexcept { return rho_; }

  double residual(std::span<const double> x) const {
    return dot(example_->features, x) - example_->target;
  }

  double value(std::span<const double> x) const {
    const double r = residual(x);
    return 0.5 * r * r + rho_ * squared_norm(x);
  }

  Vector gradient(std::span<const double> x) const {
    Vector g(x.begin(), x.end());
    for (double& v : g) v *= 2.0 * rho_;
    axpy(residual(x), example_->features, g);
    return g;
  }

  double gradient_bound() const {
    const double an = norm(example_->features);
    return (an * radius_ + std::abs(example_->target)) * an + 2.0 * rho_ * radius_;
  }

  double value_bound() const {
    const double r = norm(example_->features) * radius_ + std::abs(example_->target);
    return 0.5 * r * r + rho_ * radius_ * radius_;
  }

  double strong_convexity() const noexcept { return 2.0 * rho_; }

 private:
  const RegressionExample* example_;
  double rho_;
  double radius_;
};

// Grid of regression examples indexed by (unit, round); rounds are 1-based.
class LossStream {
 public:
  LossStream(std::size_t units, std::size_t horizon, double rho, double radius,
             std::vector<RegressionExample> grid)
      : units_(units), horizon_(horizon), rho_(rho), radius_(radius), grid_(std::move(grid)) {
    if (units == 0 || horizon == 0) throw ConfigError("stream needs N >= 1 and T >= 1");
    if (rho < 0.0) throw ConfigError("regularization rho must be nonnegative");
    if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
    require_same_size(grid_.size(), units * horizon, "stream grid");
    dim_ = grid_.front().features.size();
    for (const auto& e : grid_) require_same_size(e.features.size(), dim_, "example features");
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      LossOracle o(&grid_[k], rho_, radius_);
      loss_gradient_bound_ = std::max(loss_gradient_bound_, o.gradient_bound());
      value_bound_ = std::max(value_bound_, o.value_bound());
    }
  }

  LossStream(const LossStream&) = delete;
  LossStream& operator=(const LossStream&) = delete;
  LossStream(LossStream&&) noexcept = default;
  LossStream& operator=(LossStream&&) noexcept = default;

  std::size_t units() const noexcept { return units_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t dimension() const noexcept { return dim_; }
  double rho() const noexcept { return rho_; }
  double radius() const noexcept { return radius_; }

  const RegressionExample& example(std::size_t unit, std::size_t round) const {
    if (unit >= units_ || round == 0 || round > horizon_) {
      throw std::out_of_range("stream slot (" + std::to_string(unit) + "," +
                              std::to_string(round) + ") out of range");
    }
    return grid_[(round - 1) * units_ + unit];
  }

  LossOracle oracle(std::size_t unit, std::size_t round) const {
    return LossOracle(&example(unit, round), rho_, radius_);
  }

  std::vector<LossOracle> oracles_at(std::size_t round) const {
    std::vector<LossOracle> out;
    out.reserve(units_);
    for (std::size_t i = 0; i < units_; ++i) out.push_back(oracle(i, round));
    return out;
  }

  // Max of the per-oracle analytic sups over the realized data.
  double loss_gradient_bound() const noexcept { return loss_gradient_bound_; }
  double value_bound() const noexcept { return value_bound_; }
  double strong_convexity() const noexcept { return 2.0 * rho_; }

  // G = max{G_l, G_c}
  double gradient_bound(const ConstraintSet& constraints) const {
    return std::max(loss_gradient_bound_, constraints.gradient_bound());
  }

 private:
  std::size_t units_;
  std::size_t horizon_;
  std::size_t dim_ = 0;
  double rho_;
  double radius_;
  std::vector<RegressionExample> grid_;
  double loss_gradient_bound_ = 0.0;
  double value_bound_ = 0.0;
};

inline LossOracle regression_loss(const RegressionExample& example, double rho, double radius) {
  return LossOracle(&example, rho, radius);
}

struct AssumptionReport {
  bool ok = true;
  std::string violation;

  explicit operator bool() const noexcept { return ok; }
};

// Samples oracles and point pairs in the ball and checks |l| <= C,
// ||grad l|| <= G_l and the sigma-strong convexity inequality.
inline AssumptionReport validate_loss_assumptions(const LossStream& stream, std::size_t samples,
                                                  std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0, StreamPurpose::kValidation);
  std::uniform_int_distribution<std::size_t> unit(0, stream.units() - 1);
  std::uniform_int_distribution<std::size_t> round(1, stream.horizon());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t d = stream.dimension();
  auto point_in_ball = [&] {
    Vector x(d);
    for (double& v : x) v = normal(rng);
    const double scale = stream.radius() * std::pow(unif(rng), 1.0 / static_cast<double>(d)) /
                         std::max(norm(x), 1e-300);
    for (double& v : x) v *= scale;
    return x;
  };
  const double sigma = stream.strong_convexity();
  for (std::size_t k = 0; k < samples; ++k) {
    const LossOracle f = stream.oracle(unit(rng), round(rng));
    const Vector x = point_in_ball();
    const Vector y = point_in_ball();
    const double fx = f.value(x);
    const Vector gx = f.gradient(x);
    const double tol = 1e-9 * (1.0 + std::abs(fx));
    if (std::abs(fx) > stream.value_bound() + tol) {
      return {false, "loss value exceeds the value bound C"};
    }
    if (norm(gx) > stream.loss_gradient_bound() * (1.0 + 1e-12) + 1e-12) {
      return {false, "loss gradient exceeds the gradient bound G"};
    }
    Vector diff = y;
    axpy(-1.0, x, diff);
    const double lower = fx + dot(gx, diff) + 0.5 * sigma * squared_norm(diff);
    if (f.value(y) < lower - tol) {
      return {false, "strong convexity inequality fails for sigma = " + std::to_string(sigma)};
    }
  }
  return {};
}

// First floor(d/2) coordinates are one, the rest zero.
inline Vector synthetic_ground_truth(std::size_t dimension) {
  Vector x(dimension, 0.0);
  for (std::size_t k = 0; k < dimension / 2; ++k) x[k] = 1.0;
  return x;
}

// a entries ~ U[-1, 1], b = a^T xbar + N(0, 1). Unit i draws from its own
// stream derived from `seed`.
inline LossStream synthetic_stream(std::size_t units, std::size_t dimension, std::size_t horizon,
                                   double rho, std::uint64_t seed, double radius) {
  if (units == 0 || dimension == 0 || horizon == 0) {
    throw ConfigError("synthetic stream needs N, d, T >= 1");
  }
  const Vector truth = synthetic_ground_truth(dimension);
  std::vector<RegressionExample> grid(units * horizon);
  for (std::size_t i = 0; i < units; ++i) {
    Rng rng = derive_rng(seed, i, StreamPurpose::kData);
    std::uniform_real_distribution<double> feature(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      RegressionExample& ex = grid[t * units + i];
      ex.features.resize(dimension);
      for (double& v : ex.features) v = feature(rng);
      ex.target = dot(ex.features, truth) + noise(rng);
    }
  }
  return LossStream(units, horizon, rho, radius, std::move(grid));
}

}  // namespace doco
