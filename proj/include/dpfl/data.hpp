#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dpfl/samples.hpp"

namespace dpfl {

/// Named tabular regression data. Unlike SampleMatrix it may be empty
/// (e.g. the test side of a tiny split).
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<double> features;  // row-major, rows() x feature_count()
  std::vector<double> targets;
  std::string target_name;
  std::size_t dropped_rows = 0;  // rows discarded during ingestion

  std::size_t rows() const { return targets.size(); }
  std::size_t feature_count() const { return feature_names.size(); }

  SampleMatrix samples() const;
  Dataset select(const std::vector<std::size_t>& rows) const;

  bool operator==(const Dataset&) const = default;
};

struct CsvOptions {
  std::string target_column;
  // Timestamp columns ("YYYY-MM-DD HH:MM[:SS]") expanded into <name>_hour
  // (fractional hour of day) and <name>_dow (0 = Monday).
  std::vector<std::string> date_columns;
  std::vector<std::string> drop_columns;
  char delimiter = ',';
};

// Reads a headered CSV. Columns with no numeric cell at all are dropped;
// rows with an unparseable cell in a kept column are dropped and counted.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

// Writes features then the target column, shortest round-trip decimal form.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

// Seeded shuffle, then the first round(N * train_fraction) rows train.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

enum class PartitionMode { kDisjointChunks, kPerClientSample };

struct PartitionPlan {
  std::uint64_t general_seed = 0;
  std::size_t num_clients = 20;
  PartitionMode mode = PartitionMode::kDisjointChunks;
  // Ids given to clients 0..num_clients-1 are first_client_id + i.
  std::uint32_t first_client_id = 1;
};

// One Dataset per client, in client order.
std::vector<Dataset> partition_clients(const Dataset& train, const PartitionPlan& plan);

struct SynthParams {
  std::size_t rows = 2000;
  std::size_t features = 8;
  double dominant_feature_weight = 10.0;
  bool minor_terms = true;  // linear terms on features 1.. (at most 1/6 of the dominant weight)
  bool step_terms = true;   // threshold effects on features 1 and 2
  // Gaussian-copula correlation between feature 0 and every other feature.
  // Marginals stay uniform[0,1]; the target still depends on feature 0 most.
  double correlation = 0.7;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

// Uniform[0,1] features (optionally correlated with feature 0); target
// dominated by feature 0.
Dataset synth_dataset(const SynthParams& params);

}  // namespace dpfl
