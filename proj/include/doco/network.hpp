#pragma once

// Time-varying communication graphs, doubly stochastic mixing weights and the
// diagnostics used to check the network assumptions.
//
// Node indices are 0-based in memory. Rounds are 1-based: round t uses graph
// index (t - 1) mod period.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "doco/errors.hpp"
#include "doco/linalg.hpp"

namespace doco {

inline constexpr double kStochasticTolerance = 1e-12;

// Undirected graph; each stored edge {i, j} stands for both links i->j and j->i.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  explicit Graph(std::size_t node_count, std::vector<Edge> edges = {}) : node_count_(node_count) {
    if (node_count == 0) throw ConfigError("graph needs at least one node");
    for (auto [i, j] : edges) {
      if (i >= node_count || j >= node_count) {
        throw ConfigError("edge endpoint out of range: {" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + "}");
      }
      if (i == j) throw ConfigError("self-loop edge at node " + std::to_string(i + 1));
      edges_.emplace_back(std::min(i, j), std::max(i, j));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  }

  // Builds from 1-based endpoint pairs, the convention of scenario files.
  static Graph from_one_based(std::size_t node_count, const std::vector<Edge>& edges) {
    std::vector<Edge> zero_based;
    zero_based.reserve(edges.size());
    for (auto [i, j] : edges) {
      if (i == 0 || j == 0) throw ConfigError("node indices are 1-based");
      zero_based.emplace_back(i - 1, j - 1);
    }
    return Graph(node_count, std::move(zero_based));
  }

  static Graph complete(std::size_t node_count) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < node_count; ++i)
      for (std::size_t j = i + 1; j < node_count; ++j) edges.emplace_back(i, j);
    return Graph(node_count, std::move(edges));
  }

  std::size_t node_count() const noexcept { return node_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  bool has_edge(std::size_t i, std::size_t j) const {
    Edge e{std::min(i, j), std::max(i, j)};
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(node_count_, 0);
    for (auto [i, j] : edges_) {
      ++deg[i];
      ++deg[j];
    }
    return deg;
  }

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
};

// Dense row-major N x N nonnegative matrix; zeta is its smallest positive entry.
class WeightMatrix {
 public:
  WeightMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
    if (n == 0) throw DimensionError("weight matrix must be nonempty");
    require_same_size(entries_.size(), n * n, "weight matrix entries");
    zeta_ = std::numeric_limits<double>::infinity();
    for (double v : entries_) {
      if (v > 0.0) zeta_ = std::min(zeta_, v);
    }
    if (!std::isfinite(zeta_)) zeta_ = 0.0;
  }

  static WeightMatrix identity(std::size_t n) {
    std::vector<double> e(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
    return WeightMatrix(n, std::move(e));
  }

  static WeightMatrix uniform(std::size_t n) {
    return WeightMatrix(n, std::vector<double>(n * n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * n_, n_}; }
  const std::vector<double>& entries() const noexcept { return entries_; }
  double zeta() const noexcept { return zeta_; }

 private:
  std::size_t n_;
  std::vector<double> entries_;
  double zeta_;
};

// a_ij = 1/(1+Delta) on edges, a_ii = 1 - deg(i)/(1+Delta).
inline WeightMatrix max_degree_weights(const Graph& graph) {
  const std::size_t n = graph.node_count();
  const auto deg = graph.degrees();
  const std::size_t max_deg = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  const double w = 1.0 / (1.0 + static_cast<double>(max_deg));
  std::vector<double> e(n * n, 0.0);
  for (auto [i, j] : graph.edges()) {
    e[i * n + j] = w;
    e[j * n + i] = w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    e[i * n + i] = 1.0 - static_cast<double>(deg[i]) * w;
  }
  return WeightMatrix(n, std::move(e));
}

struct ValidationReport {
  bool ok = true;
  std::string violation;

  explicit operator bool() const noexcept { return ok; }
};

// Checks double stochasticity, the diagonal/edge floor zeta and zero entries
// off the graph's support.
inline ValidationReport validate_assumption4(const WeightMatrix& matrix, const Graph& graph) {
  const std::size_t n = matrix.size();
  if (n != graph.node_count()) {
    throw DimensionError("weight matrix is " + std::to_string(n) + "x" + std::to_string(n) +
                         " but graph has " + std::to_string(graph.node_count()) + " nodes");
  }
  auto fail = [](std::string msg) { return ValidationReport{false, std::move(msg)}; };
  const double zeta = matrix.zeta();
  if (!(zeta > 0.0)) return fail("no positive entry");
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    double col_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = matrix(i, j);
      if (!(a >= 0.0)) return fail("negative entry at (" + std::to_string(i + 1) + "," +
                                   std::to_string(j + 1) + ")");
      row_sum += a;
      col_sum += matrix(j, i);
      if (i == j) {
        if (a < zeta) return fail("diagonal entry " + std::to_string(i + 1) + " below zeta");
      } else if (graph.has_edge(i, j)) {
        if (a < zeta) return fail("edge weight (" + std::to_string(i + 1) + "," +
                                  std::to_string(j + 1) + ") below zeta");
      } else if (a != 0.0) {
        return fail("nonzero weight off the graph at (" + std::to_string(i + 1) + "," +
                    std::to_string(j + 1) + ")");
      }
    }
    if (std::abs(row_sum - 1.0) > kStochasticTolerance) {
      return fail("row " + std::to_string(i + 1) + " sums to " + std::to_string(row_sum));
    }
    if (std::abs(col_sum - 1.0) > kStochasticTolerance) {
      return fail("column " + std::to_string(i + 1) + " sums to " + std::to_string(col_sum));
    }
  }
  return {};
}

// Periodic sequence of graphs with their mixing matrices and window B.
class TopologySchedule {
 public:
  TopologySchedule(std::vector<Graph> graphs, std::vector<WeightMatrix> weights,
                   std::size_t connectivity_window)
      : graphs_(std::move(graphs)), weights_(std::move(weights)), window_(connectivity_window) {
    if (graphs_.empty()) throw ConfigError("topology schedule needs at least one graph");
    require_same_size(graphs_.size(), weights_.size(), "schedule graphs vs weights");
    if (window_ == 0) throw ConfigError("connectivity window B must be >= 1");
    const std::size_t n = graphs_.front().node_count();
    for (std::size_t k = 0; k < graphs_.size(); ++k) {
      require_same_size(graphs_[k].node_count(), n, "schedule node count");
      require_same_size(weights_[k].size(), n, "schedule weight size");
    }
  }

  // Weights from the maximum-degree rule for every graph.
  static TopologySchedule with_max_degree_weights(std::vector<Graph> graphs,
                                                  std::size_t connectivity_window) {
    std::vector<WeightMatrix> w;
    w.reserve(graphs.size());
    for (const auto& g : graphs) w.push_back(max_degree_weights(g));
    return TopologySchedule(std::move(graphs), std::move(w), connectivity_window);
  }

  std::size_t node_count() const noexcept { return graphs_.front().node_count(); }
  std::size_t period() const noexcept { return graphs_.size(); }
  std::size_t connectivity_window() const noexcept { return window_; }
  const std::vector<Graph>& graphs() const noexcept { return graphs_; }
  const std::vector<WeightMatrix>& weights() const noexcept { return weights_; }

  std::size_t index_at(std::size_t round) const {
    if (round == 0) throw ConfigError("rounds are 1-based");
    return (round - 1) % graphs_.size();
  }
  const Graph& graph_at(std::size_t round) const { return graphs_[index_at(round)]; }
  const WeightMatrix& weights_at(std::size_t round) const { return weights_[index_at(round)]; }

  double zeta() const {
    double z = std::numeric_limits<double>::infinity();
    for (const auto& w : weights_) z = std::min(z, w.zeta());
    return z;
  }

 private:
  std::vector<Graph> graphs_;
  std::vector<WeightMatrix> weights_;
  std::size_t window_;
};

// Six nodes alternating between the two perfect matchings of the 6-cycle:
// [H1, H2, H1, H2], H1 = {12, 34, 56}, H2 = {23, 45, 61}, B = 2.
inline TopologySchedule default_ring6_schedule() {
  const Graph h1 = Graph::from_one_based(6, {{1, 2}, {3, 4}, {5, 6}});
  const Graph h2 = Graph::from_one_based(6, {{2, 3}, {4, 5}, {6, 1}});
  return TopologySchedule::with_max_degree_weights({h1, h2, h1, h2}, 2);
}

namespace detail {

inline bool strongly_connected(std::size_t n, const std::vector<std::vector<bool>>& adj) {
  // Links are bidirectional, but check both directions so user supplied
  // asymmetric supports are treated correctly.
  auto reaches_all = [&](bool reverse) {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        const bool link = reverse ? adj[v][u] : adj[u][v];
        if (link && !seen[v]) {
          seen[v] = true;
          ++count;
          q.push(v);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

}  // namespace detail

// True iff every window of B consecutive graphs has a strongly connected union.
// Periodicity means windows k = 0 .. lcm(L, B)/B - 1 cover every case.
inline bool verify_window_connectivity(const TopologySchedule& schedule) {
  const std::size_t n = schedule.node_count();
  const std::size_t period = schedule.period();
  const std::size_t window = schedule.connectivity_window();
  const std::size_t windows = std::lcm(period, window) / window;
  for (std::size_t k = 0; k < windows; ++k) {
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t r = 0; r < window; ++r) {
      const Graph& g = schedule.graphs()[(k * window + r) % period];
      for (auto [i, j] : g.edges()) {
        adj[i][j] = true;
        adj[j][i] = true;
      }
    }
    if (!detail::strongly_connected(n, adj)) return false;
  }
  return true;
}

// output_i = sum_j a_ij * vectors_j
inline std::vector<Vector> consensus_mix(const WeightMatrix& matrix,
                                         const std::vector<Vector>& vectors) {
  const std::size_t n = matrix.size();
  require_same_size(vectors.size(), n, "consensus_mix unit count");
  const std::size_t d = vectors.front().size();
  for (const auto& v : vectors) require_same_size(v.size(), d, "consensus_mix dimension");
  std::vector<Vector> out(n, Vector(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = matrix(i, j);
      if (a != 0.0) axpy(a, vectors[j], out[i]);
    }
  }
  return out;
}

// Left product A(t) A(t-1) ... A(m), row-major.
inline std::vector<double> transition_product(const TopologySchedule& schedule, std::size_t t,
                                              std::size_t m) {
  if (m == 0 || t < m) throw ConfigError("transition product needs t >= m >= 1");
  const std::size_t n = schedule.node_count();
  std::vector<double> prod = schedule.weights_at(m).entries();
  std::vector<double> next(n * n);
  for (std::size_t s = m + 1; s <= t; ++s) {
    const WeightMatrix& a = schedule.weights_at(s);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += a(i, k) * prod[k * n + j];
        next[i * n + j] = acc;
      }
    }
    prod.swap(next);
  }
  return prod;
}

// max_ij |[A(t,m)]_ij - 1/N|
inline double product_deviation(const TopologySchedule& schedule, std::size_t t, std::size_t m) {
  const auto prod = transition_product(schedule, t, m);
  const double target = 1.0 / static_cast<double>(schedule.node_count());
  double dev = 0.0;
  for (double v : prod) dev = std::max(dev, std::abs(v - target));
  return dev;
}

// (1 - zeta/(4N^2))^((t-m)/B - 2)
inline double contraction_bound(const TopologySchedule& schedule, std::size_t t, std::size_t m) {
  const double n = static_cast<double>(schedule.node_count());
  const double base = 1.0 - schedule.zeta() / (4.0 * n * n);
  const double exponent = static_cast<double>(t - m) /
                              static_cast<double>(schedule.connectivity_window()) -
                          2.0;
  return std::pow(base, exponent);
}

}  // namespace doco
