#pragma once

#include "rfcpca/dataset.hpp"
#include "rfcpca/evaluation.hpp"
#include "rfcpca/fcpca.hpp"
#include "rfcpca/robust.hpp"
#include "rfcpca/selection.hpp"
#include "rfcpca/simgen.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rfcpca {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kJsonSchemaVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

struct TrialTable {
  Eigen::MatrixXd values;
  std::vector<std::string> columns;
};

/// Header row of channel names, then one row per time point.
void write_trial_csv(const std::filesystem::path& path, const Eigen::MatrixXd& x,
                     const std::vector<std::string>& channel_names);
TrialTable read_trial_csv(const std::filesystem::path& path);

/// One `<name>.csv` per series.
void write_dataset(const std::filesystem::path& dir, const MtsDataset& data);
/// Every *.csv in `dir`, sorted by file name. Works for real recordings too.
MtsDataset read_dataset(const std::filesystem::path& dir);

/// Sorted *.csv files of a dataset directory.
std::vector<std::filesystem::path> trial_files(const std::filesystem::path& dir);

/// "sha256:<hex>" over the sorted trial files (name and bytes of each).
std::string dataset_hash(const std::filesystem::path& dir);
std::string sha256_hex(std::string_view bytes);
/// Digest of the canonical (sorted-key, compact) dump.
std::string config_hash(const json& config);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

/// Configuration of `simulate`.
struct SimulateConfig {
  CleanConfig clean;
  Contamination contamination = Contamination::None;
  BurstConfig burst;
  BlinkConfig blink;
};

/// Configuration of `fit`; command-line flags override these values.
struct FitConfig {
  Variant variant = Variant::Fcpca;
  bool automatic = false;
  int clusters = 2;
  double fuzziness = 2.0;
  double alpha = 0.2;
  std::optional<double> lambda = 1.0;  // nullopt selects lambda by the elbow rule
  double variance = 0.95;
  int max_iter = 1000;
  double tol = 1e-3;
  int restarts = 3;
  int max_lag = 2;
  SubspaceRule subspace_rule = SubspaceRule::Adaptive;
  std::uint64_t seed = 0;
};

/// Both parsers throw ConfigError on unknown keys or ill-typed values.
SimulateConfig parse_simulate_config(const json& doc);
FitConfig parse_fit_config(const json& doc);
json to_json(const SimulateConfig& config);
json to_json(const FitConfig& config);

struct Provenance {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  std::string dataset_hash;
  std::uint64_t seed = 0;
};

json to_json(const Provenance& p);

json to_json(const SimManifest& manifest);
SimManifest manifest_from_json(const json& doc);

json to_json(const FitResult& fit);
/// Restores everything needed by evaluation and analysis.
FitResult fit_from_json(const json& doc);

json to_json(const SelectionReport& report);
json to_json(const EvalReport& report);
json to_json(const ElbowResult& elbow);

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& doc);

}  // namespace rfcpca
