#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpfl/data.hpp"
#include "dpfl/fl_protocol.hpp"

namespace dpfl::sim {

struct DatasetSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SynthParams synthetic;  // seed is replaced by the repeat seed
  std::filesystem::path csv_path;
  CsvOptions csv;
};

/// Everything one invocation of the runner needs. ε = std::nullopt stands
/// for "DP disabled".
struct ExperimentConfig {
  DatasetSource dataset;
  std::uint64_t general_seed = 42;
  std::size_t num_clients = 20;
  PartitionMode partition_mode = PartitionMode::kDisjointChunks;
  double train_fraction = 0.8;
  double server_validation_fraction = 0.5;
  double client_validation_fraction = 0.2;
  std::vector<std::optional<double>> epsilons = {std::nullopt, 0.01, 0.1, 1.0, 10.0};
  std::size_t repeats = 1;
  std::size_t jobs = 1;
  ProtocolConfig protocol;  // privacy.epsilon/dp_enabled are set per grid point

  void validate() const;
};

ExperimentConfig config_from_yaml(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_yaml(const ExperimentConfig& config);

// Parses "none", "0.01", "none,0.01,1" ...
std::vector<std::optional<double>> parse_epsilon_list(const std::string& text);
std::string epsilon_label(const std::optional<double>& epsilon);

// Seed used by repeat r; repeat 0 uses general_seed itself.
std::uint64_t repeat_seed(std::uint64_t general_seed, std::size_t repeat);

struct ExperimentResult {
  std::optional<double> epsilon;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::vector<RoundReport> reports;
};

// Dataset for one repeat (synthetic data is regenerated from the repeat seed).
Dataset dataset_for_repeat(const ExperimentConfig& config, std::size_t repeat);

ExperimentResult run_single(const ExperimentConfig& config, const Dataset& dataset, std::optional<double> epsilon,
                            std::size_t repeat);

// All (epsilon, repeat) pairs, ordered epsilon-major. Uses config.jobs threads.
std::vector<ExperimentResult> run_grid(const ExperimentConfig& config);

// Writes rounds.csv, mdi.csv, summary.json and experiments/<eps>_rep<r>/report.json.
void emit_reports(const std::vector<ExperimentResult>& results, const std::filesystem::path& out_dir);

// Experiment-level JSON (per-round metrics, accepted ids, client decisions).
nlohmann::json result_to_json(const ExperimentResult& result);

// Decimal text with 15 significant digits.
std::string format_number(double value);

}  // namespace dpfl::sim
