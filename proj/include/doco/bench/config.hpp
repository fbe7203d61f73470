#pragma once

// Scenario description for the benchmark runner, its text format and the
// built-in presets.
//
// File format: `key = value` lines grouped under `[section]` headers; `#`
// starts a comment. Example:
//
//   name = my-scenario
//   [problem]
//   source = synthetic        # or: dataset
//   units = 6
//   dimension = 4             # synthetic only
//   rho = 0
//   dataset = data/mg         # dataset only (LIBSVM text)
//   [topology]
//   preset = default-ring-6   # or: nodes/window plus one `graph = 1-2 3-4` line per graph
//   [constraints]
//   lower = -0.15
//   upper = 0.15
//   radius = 0.3              # optional, defaults to U*sqrt(d)
//   [algorithm]
//   variant = convex-full     # strongly-convex-full | convex-bandit | strongly-convex-bandit
//   c = 0.5
//   a = 2
//   [run]
//   horizon = 8192
//   checkpoint_start = 512    # optional, defaults to ceil(T/16)
//   seed_count = 10           # seeds 1..k, or: seeds = 3 5 8
//   output = results

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "doco/algorithm.hpp"
#include "doco/errors.hpp"
#include "doco/network.hpp"
#include "doco/problems.hpp"

namespace doco::bench {

enum class ProblemSource { kSynthetic, kDataset };

inline constexpr std::string_view kDefaultTopology = "default-ring-6";

struct ScenarioConfig {
  std::string name = "scenario";

  ProblemSource source = ProblemSource::kSynthetic;
  std::size_t units = 6;
  std::size_t dimension = 4;  // synthetic; datasets infer it from the file
  double rho = 0.0;
  std::string dataset;

  std::string topology_preset = std::string(kDefaultTopology);
  std::size_t topology_nodes = 0;
  std::size_t window = 0;
  std::vector<std::vector<Graph::Edge>> graphs;  // 1-based endpoints

  double lower = -0.15;
  double upper = 0.15;
  std::optional<double> radius;

  Variant variant = Variant::kConvexFull;
  double c = 0.5;
  double a = 2.0;

  std::size_t horizon = 8192;
  std::size_t checkpoint_start = 0;
  std::vector<std::uint64_t> seeds = default_seeds(10);
  std::string output = ".";

  static std::vector<std::uint64_t> default_seeds(std::size_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t k = 0; k < count; ++k) s[k] = k + 1;
    return s;
  }

  // R_X for a given dimension: the configured radius or U*sqrt(d).
  double radius_for(std::size_t dim) const {
    if (radius) return *radius;
    return upper * std::sqrt(static_cast<double>(dim));
  }

  TopologySchedule topology() const {
    if (!topology_preset.empty()) {
      if (topology_preset == kDefaultTopology) return default_ring6_schedule();
      throw ConfigError("unknown topology preset '" + topology_preset + "'");
    }
    if (graphs.empty()) throw ConfigError("topology: no graphs given");
    std::vector<Graph> gs;
    for (const auto& edges : graphs) gs.push_back(Graph::from_one_based(topology_nodes, edges));
    return TopologySchedule::with_max_degree_weights(std::move(gs), window);
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline double to_real(const std::string& v, std::size_t line, const std::string& key) {
  double out = 0.0;
  const char* first = v.data();
  if (!v.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ParseError(line, "field '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t to_count(const std::string& v, std::size_t line, const std::string& key) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ParseError(line, "field '" + key + "': expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

// "1-2 3-4" -> {{1,2},{3,4}}
inline std::vector<Graph::Edge> parse_edges(const std::string& v, std::size_t line) {
  std::vector<Graph::Edge> edges;
  for (const auto& tok : split_ws(v)) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos) {
      throw ParseError(line, "field 'graph': edge '" + tok + "' is not of the form i-j");
    }
    edges.emplace_back(to_count(tok.substr(0, dash), line, "graph"),
                       to_count(tok.substr(dash + 1), line, "graph"));
  }
  return edges;
}

}  // namespace detail

inline ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::string section;
  bool explicit_topology = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      static const std::vector<std::string> known{"problem", "topology", "constraints",
                                                  "algorithm", "run"};
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ParseError(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    const std::string field = section.empty() ? key : section + "." + key;
    auto unknown = [&] { throw ParseError(line_no, "unknown field '" + field + "'"); };

    if (section.empty()) {
      if (key == "name") cfg.name = value; else unknown();
    } else if (section == "problem") {
      if (key == "source") {
        if (value == "synthetic") cfg.source = ProblemSource::kSynthetic;
        else if (value == "dataset") cfg.source = ProblemSource::kDataset;
        else throw ParseError(line_no, "field 'problem.source': expected synthetic or dataset");
      } else if (key == "units") {
        cfg.units = detail::to_count(value, line_no, field);
      } else if (key == "dimension") {
        cfg.dimension = detail::to_count(value, line_no, field);
      } else if (key == "rho") {
        cfg.rho = detail::to_real(value, line_no, field);
      } else if (key == "dataset") {
        cfg.dataset = value;
      } else {
        unknown();
      }
    } else if (section == "topology") {
      if (key == "preset") {
        cfg.topology_preset = value;
      } else if (key == "nodes") {
        cfg.topology_nodes = detail::to_count(value, line_no, field);
        explicit_topology = true;
      } else if (key == "window") {
        cfg.window = detail::to_count(value, line_no, field);
        explicit_topology = true;
      } else if (key == "graph") {
        cfg.graphs.push_back(detail::parse_edges(value, line_no));
        explicit_topology = true;
      } else {
        unknown();
      }
    } else if (section == "constraints") {
      if (key == "lower") cfg.lower = detail::to_real(value, line_no, field);
      else if (key == "upper") cfg.upper = detail::to_real(value, line_no, field);
      else if (key == "radius") cfg.radius = detail::to_real(value, line_no, field);
      else unknown();
    } else if (section == "algorithm") {
      if (key == "variant") {
        try {
          cfg.variant = parse_variant(value);
        } catch (const ConfigError& e) {
          throw ParseError(line_no, e.what());
        }
      } else if (key == "c") {
        cfg.c = detail::to_real(value, line_no, field);
      } else if (key == "a") {
        cfg.a = detail::to_real(value, line_no, field);
      } else {
        unknown();
      }
    } else if (section == "run") {
      if (key == "horizon") {
        cfg.horizon = detail::to_count(value, line_no, field);
      } else if (key == "checkpoint_start") {
        cfg.checkpoint_start = detail::to_count(value, line_no, field);
      } else if (key == "seed_count") {
        cfg.seeds = ScenarioConfig::default_seeds(detail::to_count(value, line_no, field));
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& tok : detail::split_ws(value)) {
          cfg.seeds.push_back(detail::to_count(tok, line_no, field));
        }
      } else if (key == "output") {
        cfg.output = value;
      } else {
        unknown();
      }
    }
  }
  if (explicit_topology) {
    if (cfg.topology_preset != kDefaultTopology && !cfg.topology_preset.empty()) {
      throw ConfigError("topology: give either a preset or an explicit graph list");
    }
    cfg.topology_preset.clear();
  }
  return cfg;
}

// Checks every setting that does not need the generated data: parameter
// ranges, the ball containing the box, and the network assumptions.
inline void validate_config(const ScenarioConfig& cfg) {
  if (cfg.units == 0) throw ConfigError("problem.units must be >= 1");
  if (cfg.source == ProblemSource::kSynthetic && cfg.dimension == 0) {
    throw ConfigError("problem.dimension must be >= 1");
  }
  if (cfg.source == ProblemSource::kDataset && cfg.dataset.empty()) {
    throw ConfigError("problem.dataset is required for dataset sources");
  }
  if (cfg.rho < 0.0) throw ConfigError("problem.rho must be >= 0");
  if (!(cfg.a > 1.0)) throw ConfigError("algorithm.a must be > 1");
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) throw ConfigError("algorithm.c must lie in (0, 1)");
  if (is_strongly_convex(cfg.variant) && !(cfg.rho > 0.0)) {
    throw ConfigError("strong convexity assumption: " + std::string(to_string(cfg.variant)) +
                      " needs rho > 0");
  }
  if (!(cfg.lower < cfg.upper)) throw ConfigError("constraints: need lower < upper");
  if (cfg.horizon == 0) throw ConfigError("run.horizon must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("run: at least one seed is required");
  if (cfg.radius && !(*cfg.radius > 0.0)) throw ConfigError("constraints.radius must be > 0");

  const TopologySchedule topo = cfg.topology();
  if (topo.node_count() != cfg.units) {
    throw ConfigError("topology has " + std::to_string(topo.node_count()) + " nodes but " +
                      std::to_string(cfg.units) + " units are configured");
  }
  for (std::size_t k = 0; k < topo.period(); ++k) {
    const auto report = validate_assumption4(topo.weights()[k], topo.graphs()[k]);
    if (!report) {
      throw ConfigError("weight assumption fails for graph " + std::to_string(k + 1) + ": " +
                        report.violation);
    }
  }
  if (!verify_window_connectivity(topo)) {
    throw ConfigError("connectivity assumption fails: some window of B = " +
                      std::to_string(topo.connectivity_window()) +
                      " graphs is not strongly connected");
  }
  if (cfg.source == ProblemSource::kSynthetic) {
    const BoxConstraintSet box(cfg.lower, cfg.upper, cfg.dimension);
    const double r = cfg.radius_for(cfg.dimension);
    if (box.enclosing_radius() > r * (1.0 + 1e-12)) {
      throw ConfigError("ball assumption fails: the box does not fit in the ball of radius " +
                        std::to_string(r));
    }
    if (is_bandit(cfg.variant)) {
      ScheduleInputs in;
      in.c = cfg.c;
      in.a = cfg.a;
      in.constraint_count = box.count();
      in.strong_convexity = 2.0 * cfg.rho;
      in.radius = r;
      in.horizon = cfg.horizon;
      make_schedule(cfg.variant, in);
    }
  }
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ScenarioConfig cfg = parse_config(ss.str());
  if (cfg.source == ProblemSource::kDataset && !cfg.dataset.empty()) {
    const std::filesystem::path p(cfg.dataset);
    if (p.is_relative()) cfg.dataset = (std::filesystem::path(path).parent_path() / p).string();
  }
  validate_config(cfg);
  return cfg;
}

struct PresetInfo {
  std::string name;
  std::string description;
};

inline std::vector<PresetInfo> list_presets() {
  return {
      {"synthetic-convex-c0.5", "synthetic regression, rho = 0, full information, c = 1/2"},
      {"synthetic-convex-c0.75", "synthetic regression, rho = 0, full information, c = 3/4"},
      {"synthetic-bandit-c0.5", "synthetic regression, rho = 0, one-point bandit, c = 1/2"},
      {"synthetic-bandit-c0.75", "synthetic regression, rho = 0, one-point bandit, c = 3/4"},
      {"synthetic-sc-rho1", "synthetic regression, rho = 1, full information"},
      {"synthetic-sc-rho2", "synthetic regression, rho = 2, full information"},
      {"synthetic-sc-bandit-rho1", "synthetic regression, rho = 1, one-point bandit"},
      {"synthetic-sc-bandit-rho2", "synthetic regression, rho = 2, one-point bandit"},
      {"mg-convex", "mg dataset, rho = 0, full information, c = 1/2"},
      {"mg-bandit", "mg dataset, rho = 0, one-point bandit, c = 1/2"},
      {"mg-sc", "mg dataset, rho = 1, full information, c = 1/2"},
      {"mg-sc-bandit", "mg dataset, rho = 1, one-point bandit, c = 1/2"},
      {"bodyfat-convex", "bodyfat dataset, rho = 0, full information, c = 1/2"},
      {"bodyfat-bandit", "bodyfat dataset, rho = 0, one-point bandit, c = 1/2"},
      {"bodyfat-sc", "bodyfat dataset, rho = 1, full information, c = 1/2"},
      {"bodyfat-sc-bandit", "bodyfat dataset, rho = 1, one-point bandit, c = 1/2"},
  };
}

inline std::string format_presets() {
  std::string out;
  for (const auto& p : list_presets()) {
    out += p.name;
    out.append(p.name.size() < 28 ? 28 - p.name.size() : 1, ' ');
    out += p.description;
    out += '\n';
  }
  return out;
}

// Where dataset presets look for LIBSVM files: $DOCO_DATA_DIR, else ./data.
inline std::string dataset_path(const std::string& dataset_name) {
  const char* dir = std::getenv("DOCO_DATA_DIR");
  const std::filesystem::path base = dir && *dir ? std::filesystem::path(dir) : "data";
  return (base / dataset_name).string();
}

inline ScenarioConfig preset_config(const std::string& name) {
  const auto presets = list_presets();
  if (std::none_of(presets.begin(), presets.end(),
                   [&](const PresetInfo& p) { return p.name == name; })) {
    throw ConfigError("unknown preset '" + name + "' (try `presets`)");
  }
  ScenarioConfig cfg;
  cfg.name = name;
  const bool bandit = name.find("bandit") != std::string::npos;
  const bool strongly = name.find("-sc") != std::string::npos;
  if (name.starts_with("synthetic")) {
    cfg.source = ProblemSource::kSynthetic;
    if (name.ends_with("c0.75")) cfg.c = 0.75;
    if (strongly) cfg.rho = name.ends_with("rho2") ? 2.0 : 1.0;
  } else {
    cfg.source = ProblemSource::kDataset;
    cfg.dataset = dataset_path(name.starts_with("mg") ? "mg" : "bodyfat");
    cfg.dimension = 0;
    if (strongly) cfg.rho = 1.0;
  }
  if (strongly) {
    cfg.variant = bandit ? Variant::kStronglyConvexBandit : Variant::kStronglyConvexFull;
  } else {
    cfg.variant = bandit ? Variant::kConvexBandit : Variant::kConvexFull;
  }
  cfg.checkpoint_start = 512;
  return cfg;
}

}  // namespace doco::bench
