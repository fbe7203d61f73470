#pragma once

// LIBSVM sparse text format: "<label> <idx>:<val> ..." with 1-based,
// strictly increasing indices per line.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "doco/errors.hpp"
#include "doco/problems.hpp"
#include "doco/rng.hpp"

namespace doco {

struct LibsvmData {
  std::vector<RegressionExample> examples;
  std::size_t dimension = 0;
};

namespace detail {

inline double parse_real(std::string_view token, std::size_t line, const char* what) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || token.empty()) {
    throw ParseError(line, std::string("malformed ") + what + " '" + std::string(token) + "'");
  }
  return v;
}

inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline LibsvmData parse_libsvm(std::string_view text) {
  struct Row {
    double label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Row> rows;
  std::size_t dimension = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::vector<std::string_view> tokens;
    std::size_t k = 0;
    while (k < line.size()) {
      while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
      std::size_t start = k;
      while (k < line.size() && line[k] != ' ' && line[k] != '\t') ++k;
      if (k > start) tokens.push_back(line.substr(start, k - start));
    }
    if (tokens.empty()) continue;

    Row row;
    row.label = detail::parse_real(tokens[0], line_no, "label");
    std::size_t previous = 0;
    for (std::size_t j = 1; j < tokens.size(); ++j) {
      const auto tok = tokens[j];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected <index>:<value>, got '" + std::string(tok) + "'");
      }
      const auto idx_text = tok.substr(0, colon);
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() || idx_text.empty()) {
        throw ParseError(line_no, "malformed feature index '" + std::string(idx_text) + "'");
      }
      if (idx < 1) throw ParseError(line_no, "feature index must be >= 1");
      if (idx <= previous) {
        throw ParseError(line_no, "feature indices must be strictly increasing (" +
                                      std::to_string(previous) + " then " + std::to_string(idx) +
                                      ")");
      }
      previous = idx;
      row.entries.emplace_back(idx, detail::parse_real(tok.substr(colon + 1), line_no, "value"));
      dimension = std::max(dimension, idx);
    }
    rows.push_back(std::move(row));
  }

  LibsvmData out;
  out.dimension = dimension;
  out.examples.reserve(rows.size());
  for (const auto& row : rows) {
    RegressionExample ex;
    ex.target = row.label;
    ex.features.assign(dimension, 0.0);
    for (auto [idx, v] : row.entries) ex.features[idx - 1] = v;
    out.examples.push_back(std::move(ex));
  }
  return out;
}

// Nonzero features only, shortest round-trip decimals. An explicit zero at the
// last index keeps the dimension when that column is entirely zero.
inline std::string serialize_libsvm(const LibsvmData& data) {
  bool last_column_used = data.dimension == 0;
  for (const auto& ex : data.examples) {
    if (data.dimension > 0 && ex.features[data.dimension - 1] != 0.0) last_column_used = true;
  }
  std::string out;
  for (std::size_t r = 0; r < data.examples.size(); ++r) {
    const auto& ex = data.examples[r];
    out += detail::format_real(ex.target);
    for (std::size_t k = 0; k < ex.features.size(); ++k) {
      const bool pad = !last_column_used && r == 0 && k + 1 == data.dimension;
      if (ex.features[k] != 0.0 || pad) {
        out += ' ';
        out += std::to_string(k + 1);
        out += ':';
        out += detail::format_real(ex.features[k]);
      }
    }
    out += '\n';
  }
  return out;
}

inline LibsvmData load_libsvm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_libsvm(ss.str());
}

// Rescales each feature column linearly onto [-1, 1]; constant columns map to 0.
inline std::vector<RegressionExample> rescale_features(std::vector<RegressionExample> examples) {
  if (examples.empty()) return examples;
  const std::size_t d = examples.front().features.size();
  for (std::size_t k = 0; k < d; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& ex : examples) {
      lo = std::min(lo, ex.features[k]);
      hi = std::max(hi, ex.features[k]);
    }
    for (auto& ex : examples) {
      ex.features[k] = hi > lo ? 2.0 * (ex.features[k] - lo) / (hi - lo) - 1.0 : 0.0;
    }
  }
  return examples;
}

// Seeded shuffle of the rows, then dealt round-robin over the N x T grid
// (round-major), cycling when the rows run out.
inline std::vector<std::size_t> dataset_assignment(std::size_t rows, std::size_t units,
                                                   std::size_t horizon, std::uint64_t seed) {
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = derive_rng(seed, 0, StreamPurpose::kShuffle);
  for (std::size_t k = rows; k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(perm[k - 1], perm[pick(rng)]);
  }
  std::vector<std::size_t> slots(units * horizon);
  for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = perm[s % rows];
  return slots;
}

inline LossStream dataset_stream(const std::vector<RegressionExample>& examples,
                                 std::size_t units, std::size_t horizon, double rho,
                                 std::uint64_t seed, double radius) {
  if (examples.empty()) throw ConfigError("dataset is empty");
  if (units == 0 || horizon == 0) throw ConfigError("dataset stream needs N >= 1 and T >= 1");
  const auto scaled_rows = rescale_features(examples);
  const auto slots = dataset_assignment(scaled_rows.size(), units, horizon, seed);
  std::vector<RegressionExample> grid;
  grid.reserve(slots.size());
  for (std::size_t s : slots) grid.push_back(scaled_rows[s]);
  return LossStream(units, horizon, rho, radius, std::move(grid));
}

}  // namespace doco
