#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbatt/ensembles.hpp"

namespace qbatt::experiments {

// Config or usage problem; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

// Flag overrides shared by every subcommand.
struct RunOptions {
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool svg = false;
};

struct VerifyConfig {
  std::uint64_t seed = 0;
  int instances = 200;
  int max_sites = 6;
  std::vector<double> field_strengths = {0.5, 1.0, 2.0};
  int e_samples = 10;
  bool inject_fault = false;
};

struct ScalingConfig {
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> schedule;  // (L, realizations)
  int workers = 1;
};

struct HistogramConfig {
  std::uint64_t seed = 0;
  std::vector<int> L_values;
  int realizations = 100;
  double battery_h = 1.0;
  double bin_width = 0.1;
  int workers = 1;
};

struct QuenchConfig {
  BatterySpec battery;
  DrivingSpec driving;
  std::optional<std::uint64_t> seed;
  ScanParams scan;
};

// Strict parsers: unknown fields and schema_version mismatches are rejected.
VerifyConfig parse_verify_config(const nlohmann::json& j);
EnsembleConfig parse_figure1a_config(const nlohmann::json& j);
EnsembleConfig parse_figure1b_config(const nlohmann::json& j);
ScalingConfig parse_scaling_config(const nlohmann::json& j);
HistogramConfig parse_histogram_config(const nlohmann::json& j);
QuenchConfig parse_quench_config(const nlohmann::json& j);
DrivingSpec parse_driving_spec(const nlohmann::json& j);

// CSV renderers; all artifacts go through these so repeated runs are
// byte-identical.
std::string records_csv(const std::vector<EnsembleRecord>& records);
std::string stats_csv(const std::vector<EnsembleLStats>& stats);
std::string hist_csv(const std::vector<EnsembleLStats>& stats, double bin_width);
std::string hist_csv(const std::vector<CommutatorSample>& samples, double bin_width);
std::string fit_csv(const ScalingFit& fit);
std::string scaling_points_csv(const std::vector<NormSample>& samples, const ScalingFit& fit);
std::string figure_csv(const std::vector<EnsembleLStats>& stats,
                       const std::vector<double>& bounds);
std::string quench_csv(const QuenchResult& result);
std::string bound_report_csv(const EnsembleRecord& record);

// Subcommand drivers. Return the process exit code: 0 on success, 1 when an
// invariant check failed. Config problems throw ConfigError (exit 2).
int run_verify(const nlohmann::json& config, const RunOptions& options);
int run_figure1a(const nlohmann::json& config, const RunOptions& options);
int run_figure1b(const nlohmann::json& config, const RunOptions& options);
int run_scaling(const nlohmann::json& config, const RunOptions& options);
int run_histogram(const nlohmann::json& config, const RunOptions& options);
int run_quench(const nlohmann::json& config, const RunOptions& options);

}  // namespace qbatt::experiments
