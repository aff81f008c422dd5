#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fk/flow.hpp"
#include "fk/hetero.hpp"
#include "fk/minimax.hpp"
#include "fk/mpp.hpp"
#include "fk/potential.hpp"

namespace fk::cli {

/// Parse or validation failure. `key` is the offending key path
/// ("flow.dt", "p", ...) and `line` the 1-based source line (0 if none).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

inline constexpr const char* kCommands[] = {"minimize", "gap",          "mpp",    "hetero",
                                            "mph",      "multiplicity", "verify", "landscape"};

struct PathConfig {
  int nodes = 0;  // 0 selects the default node count
  PathKind kind = PathKind::kChi;
  int k = 2;
  MinimaxMode mode = MinimaxMode::kNodeFlow;

  friend bool operator==(const PathConfig&, const PathConfig&) = default;
};

struct RunConfig {
  std::string command = "minimize";
  PotentialDescriptor model;
  std::vector<int> p;  // empty selects (1, ..., 1)
  std::vector<int> q;  // empty selects (1, ..., 1)
  FlowParams flow;
  MinimaxParams minimax;
  PathConfig path;
  WindowPolicy window;
  std::optional<std::uint64_t> seed;
  int probes = 8;
  int seeds = 16;  // constant seeds for minimize
  int trials = 100;
  int k_max = 6;
  int grid = 400;
  std::size_t max_cells = 4096;
  std::string out;  // JSON manifest
  std::string csv;  // field or grid export

  Periods periods() const;
  TransversePeriods transverse() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// INI-style text: `key = value` lines, `[section]` headers, `#` comments.
/// Top-level keys: command, model, p, q, seed, probes, seeds, trials,
/// k_max, grid, max_cells, out, csv. Sections: [model] (dimension, radius
/// and the potential parameters), [flow], [minimax], [path], [window].
RunConfig parse_config(const std::string& text);

/// Sets one key path ("flow.tol", "model.amplitude", "p", ...) from its
/// text form; throws ConfigError for unknown keys or malformed values.
void set_key(RunConfig& config, const std::string& key, const std::string& value);

/// Canonical text that parse_config maps back to the same config.
std::string print_config(const RunConfig& config);

/// Throws ConfigError naming the key of the first violated invariant.
void validate(const RunConfig& config);

/// Commands whose results depend on a random stream and need a seed.
bool needs_seed(const std::string& command);

}  // namespace fk::cli
