#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "polygreen/harness.hpp"

namespace polygreen {

using json = nlohmann::json;

/// Parsed run configuration: a single top-level JSON object per run; CLI
/// flags override file values. Validation failures carry the field path.
struct RunConfig {
  json raw;  // echo of the effective configuration

  std::shared_ptr<const Domain> domain;
  int m = 1;
  int n = 2;
  std::vector<double> grid_levels;
  SamplePlan plan;
  std::vector<BoundSpec> bounds;  // empty = all admissible (i, j <= 1)
  LhsSource lhs = LhsSource::solver;
  double exclusion_factor = 8.0;
  int y_cluster = 0;
  std::string output_dir = "out";
  DiscreteOperator::Backend backend = DiscreteOperator::Backend::automatic;

  // subcommand-specific knobs
  double decay_R = 0.2;
  double decay_r = 0.3;
  double exterior_offset = 1e-3;
  std::string decay_mode = "both";  // interior | infinity | both
  int hardy_trials = 50;
  std::vector<double> source_point;  // for `green`

  DimensionParams dimension_params() const { return DimensionParams::make(m, n); }
};

/// Parse + validate. Throws Error(config_invalid) with a field-path message.
RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::string& path);

json domain_to_json(const Domain& d);
std::shared_ptr<const Domain> domain_from_json(const json& j);

/// One CSV per spec per level (x, y, d_x, d_y, sep, region, lhs, rhs, ratio)
/// plus a JSON summary; files are byte-stable for identical inputs.
/// Returns the list of files written.
std::vector<std::string> write_reports(const std::vector<EstimateReport>& reports,
                                       const std::string& dir, const json& config_echo,
                                       const json& extra = json::object());

json estimate_report_to_json(const EstimateReport& rep);
json counterexample_report_to_json(const CounterexampleReport& rep);
json decay_report_to_json(const DecayReport& rep);
json dirichlet_report_to_json(const DirichletBoundReport& rep);
json hardy_report_to_json(const HardyReport& rep);

/// Format a double with 17 significant digits, locale-independent.
std::string format_g17(double v);

constexpr const char* kVersion = "1.0.0";

}  // namespace polygreen
