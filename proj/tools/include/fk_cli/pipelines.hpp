#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fk/field.hpp"
#include "fk/potential.hpp"
#include "fk_cli/config.hpp"

namespace fk::cli {

struct RunManifest {
  RunConfig config;
  std::string version;
  double wall_time = 0.0;  // seconds
  std::map<std::string, double> scalars;
  nlohmann::ordered_json details;
  std::vector<std::string> files;
  std::vector<std::string> failures;  // one line per failed stage

  bool success() const { return failures.empty(); }
};

nlohmann::ordered_json to_json(const RunManifest& m);

/// Runs the pipeline named by config.command, writes config.csv (when set)
/// and the manifest to config.out (when set). Stage failures are recorded
/// in the manifest, not thrown; ConfigError is thrown for an invalid config.
RunManifest run(const RunConfig& config);

/// %.16e: 17 significant digits.
std::string format_scientific(double v);

/// Torus field as CSV rows `i1,...,in,value` in flattening order.
void write_field_csv(const std::string& path, const TorusField& u);
/// Strip window as CSV rows `i1,...,in,value`, layer-major.
void write_strip_csv(const std::string& path, const StripField& u);

struct LandscapeGrid {
  int grid = 0;
  std::vector<double> a, b, value;  // row-major, a slowest
  double max_value = 0.0;
  double max_a = 0.0;
  double max_b = 0.0;
};

/// I_0^p on p = (2, 1, ..., 1) sampled at (a, b) in {0, 1/(grid-1), ..., 1}^2,
/// where the field is v0 + a (w0 - v0) on i1 = 0 and v0 + b (w0 - v0) on i1 = 1.
/// Writes CSV `a,b,I` to `out` unless it is empty. Throws InvalidArgument
/// for other periods.
LandscapeGrid emit_landscape(PotentialPtr model, const Periods& p, int grid, const std::string& out,
                             std::uint64_t seed = 0);

}  // namespace fk::cli
