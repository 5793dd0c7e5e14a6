#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dpfl/data.hpp"
#include "dpfl/dp_tree.hpp"
#include "dpfl/ensemble.hpp"
#include "dpfl/rng.hpp"
#include "dpfl/samples.hpp"

namespace dpfl {

// Score the server uses to judge a submitted tree against threshold K.
enum class ScoreKind { kRSquared, kPearson };

enum class AggregationStrategy {
  kReplace,     // global model := this round's accepted trees
  kAccumulate,  // previous global + accepted, newest max_global_trees kept
};

struct ProtocolConfig {
  std::size_t trees_per_client = 1;
  TreeHyperparams tree;
  PrivacyParams privacy;
  double threshold_k = 0.5;
  ScoreKind score = ScoreKind::kRSquared;
  AggregationStrategy aggregation = AggregationStrategy::kAccumulate;
  std::size_t max_global_trees = 100;

  std::size_t num_rounds = 10;
  // Optional plateau stop: stop once the round-over-round improvement in
  // global test MSE stayed below plateau_tol for `patience` rounds in a row.
  bool early_stop = false;
  double plateau_tol = 0.0;
  std::size_t patience = 2;

  // Send every submission through its JSON wire form before the server sees it.
  bool serialize_submissions = true;

  void validate() const;
};

struct ClientState {
  std::uint32_t client_id;
  SampleMatrix local_train;
  SampleMatrix local_validation;
  std::optional<Forest> current_model;
  RngStream rng;  // seeded with general_seed + client_id
};

// Splits the client's chunk into local train/validation and seeds its stream.
ClientState make_client(std::uint32_t client_id, const Dataset& chunk, std::uint64_t general_seed,
                        double validation_fraction);

struct ServerState {
  SampleMatrix validation;
  double threshold_k = 0.5;
  std::optional<Forest> global_model;
  std::uint32_t round = 0;  // completed rounds
};

struct FilterResult {
  std::vector<TreeRecord> accepted;
  std::vector<TreeRecord> rejected;
};

struct AdoptionDecision {
  bool adopted_global = false;
  double local_mse = 0.0;
  std::optional<double> global_mse;  // absent when the server has no model yet
};

struct ClientRoundResult {
  std::uint32_t client_id = 0;
  AdoptionDecision decision;
  Forest local_model;  // the trees this client trained this round
};

struct RoundReport {
  std::uint32_t round = 0;
  std::vector<TreeId> accepted;
  std::vector<TreeId> rejected;
  bool degenerate = false;  // no tree accepted this round
  std::optional<double> global_mse_test;
  std::optional<double> global_pearson_test;
  std::optional<double> global_r2_test;
  std::optional<std::vector<double>> global_mdi;
  std::optional<double> global_mdi_entropy;
  std::size_t global_tree_count = 0;
  double epsilon_spent_total = 0.0;  // summed over every tree submitted this round
  std::vector<ClientRoundResult> per_client;
  std::optional<Forest> global_model;  // snapshot after aggregation
};

// Stage 1: trees_per_client trees, each on a fresh bootstrap of local_train.
std::vector<TreeRecord> client_train_round(ClientState& client, const ProtocolConfig& config, std::uint32_t round);

// Stage 2: scores every submission on the server validation set and keeps
// those with score >= threshold_k. Submission order is preserved.
FilterResult server_filter(std::vector<TreeRecord> submissions, const ServerState& server,
                           ScoreKind score = ScoreKind::kRSquared);

// Stage 3: installs the new global model. With nothing accepted the previous
// global model (possibly none) stays. Returns the resulting global model.
std::optional<Forest> server_aggregate(std::vector<TreeRecord> accepted, ServerState& server,
                                       const ProtocolConfig& config);

// Keeps the global model only if its MSE on local_validation is strictly lower.
AdoptionDecision client_adopt(ClientState& client, const Forest* global, const Forest& local);

RoundReport run_round(ServerState& server, std::vector<ClientState>& clients, const ProtocolConfig& config,
                      const SampleMatrix& test);

struct SetupParams {
  double train_fraction = 0.8;
  double server_validation_fraction = 0.5;  // share of the test split held by the server
  double client_validation_fraction = 0.2;
  PartitionPlan plan;
};

struct FederatedSetup {
  ServerState server;
  std::vector<ClientState> clients;
  SampleMatrix test;  // reporting test set
};

FederatedSetup make_setup(const Dataset& dataset, const SetupParams& params, double threshold_k);

std::vector<RoundReport> run_experiment(FederatedSetup setup, const ProtocolConfig& config);

}  // namespace dpfl
