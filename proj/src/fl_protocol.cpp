#include "dpfl/fl_protocol.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dpfl/errors.hpp"
#include "dpfl/metrics.hpp"
#include "dpfl/serialize.hpp"

namespace dpfl {

namespace {

constexpr std::uint64_t kClientValidationTag = 3;
constexpr std::uint64_t kTrainTestTag = 1;
constexpr std::uint64_t kServerSplitTag = 2;

double score_tree(const RegressionTree& tree, const SampleMatrix& validation, ScoreKind kind) {
  std::vector<double> predicted(validation.rows());
  for (std::size_t i = 0; i < validation.rows(); ++i) predicted[i] = predict_tree(tree, validation.row(i));
  if (kind == ScoreKind::kPearson) {
    // A constant prediction carries no correlation; it can never pass.
    return pearson(predicted, validation.targets()).value_or(-1.0);
  }
  return r_squared(predicted, validation.targets());
}

}  // namespace

void ProtocolConfig::validate() const {
  if (trees_per_client < 1) throw ConfigError("trees_per_client must be >= 1");
  if (!std::isfinite(threshold_k)) throw ConfigError("threshold_k must be finite");
  if (aggregation == AggregationStrategy::kAccumulate && max_global_trees < 1) {
    throw ConfigError("max_global_trees must be >= 1 with the accumulate strategy");
  }
  if (num_rounds < 1) throw ConfigError("num_rounds must be >= 1");
  if (early_stop && (patience < 1 || std::isnan(plateau_tol))) {
    throw ConfigError("early stop needs patience >= 1 and a plateau_tol");
  }
  try {
    tree.validate();
    privacy.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

ClientState make_client(std::uint32_t client_id, const Dataset& chunk, std::uint64_t general_seed,
                        double validation_fraction) {
  if (chunk.rows() < 2) {
    throw ConfigError("client " + std::to_string(client_id) + " has " + std::to_string(chunk.rows()) +
                      " rows; at least 2 are needed for a local train/validation split");
  }
  const std::uint64_t seed = general_seed + client_id;
  auto [train, validation] = train_test_split(chunk, 1.0 - validation_fraction, mix_seed(seed, kClientValidationTag));
  if (train.rows() == 0 || validation.rows() == 0) {
    throw ConfigError("client " + std::to_string(client_id) + ": local split left an empty side");
  }
  return ClientState{client_id, train.samples(), validation.samples(), std::nullopt, RngStream(seed)};
}

std::vector<TreeRecord> client_train_round(ClientState& client, const ProtocolConfig& config, std::uint32_t round) {
  std::vector<TreeRecord> out;
  out.reserve(config.trees_per_client);
  for (std::size_t t = 0; t < config.trees_per_client; ++t) {
    const SampleMatrix bag = bootstrap_sample(client.local_train, client.rng);
    out.push_back(TreeRecord{fit_tree(bag, config.tree, config.privacy, client.rng), client.client_id, round,
                             static_cast<std::uint32_t>(t), std::nullopt});
  }
  return out;
}

FilterResult server_filter(std::vector<TreeRecord> submissions, const ServerState& server, ScoreKind score) {
  FilterResult result;
  for (auto& record : submissions) {
    record.validation_score = score_tree(record.tree, server.validation, score);
    if (*record.validation_score >= server.threshold_k) {
      result.accepted.push_back(std::move(record));
    } else {
      result.rejected.push_back(std::move(record));
    }
  }
  return result;
}

std::optional<Forest> server_aggregate(std::vector<TreeRecord> accepted, ServerState& server,
                                       const ProtocolConfig& config) {
  if (accepted.empty()) return server.global_model;
  const std::size_t feature_count = accepted.front().tree.feature_count();
  if (config.aggregation == AggregationStrategy::kReplace || !server.global_model) {
    server.global_model = Forest(feature_count, std::move(accepted));
  } else {
    for (auto& record : accepted) server.global_model->add(std::move(record));
  }
  if (config.aggregation == AggregationStrategy::kAccumulate) {
    server.global_model->truncate_to_newest(config.max_global_trees);
  }
  return server.global_model;
}

AdoptionDecision client_adopt(ClientState& client, const Forest* global, const Forest& local) {
  AdoptionDecision decision;
  decision.local_mse = mse_of_model(local, client.local_validation);
  if (global != nullptr) {
    decision.global_mse = mse_of_model(*global, client.local_validation);
    decision.adopted_global = *decision.global_mse < decision.local_mse;
  }
  client.current_model = decision.adopted_global ? *global : local;
  return decision;
}

RoundReport run_round(ServerState& server, std::vector<ClientState>& clients, const ProtocolConfig& config,
                      const SampleMatrix& test) {
  RoundReport report;
  report.round = server.round + 1;

  // Stage 1: local training.
  std::vector<std::vector<TreeRecord>> local_trees;
  std::vector<TreeRecord> submissions;
  for (auto& client : clients) {
    local_trees.push_back(client_train_round(client, config, report.round));
    for (const auto& record : local_trees.back()) {
      report.epsilon_spent_total += record.tree.epsilon_spent();
      if (config.serialize_submissions) {
        submissions.push_back(record_from_json(nlohmann::json::parse(record_to_json(record).dump())));
      } else {
        submissions.push_back(record);
      }
    }
  }

  // Stage 2: threshold-K filter.
  FilterResult filtered = server_filter(std::move(submissions), server, config.score);
  for (const auto& r : filtered.accepted) report.accepted.push_back(id_of(r));
  for (const auto& r : filtered.rejected) report.rejected.push_back(id_of(r));
  report.degenerate = filtered.accepted.empty();

  // Stage 3: aggregation and redistribution.
  server_aggregate(std::move(filtered.accepted), server, config);
  const Forest* global = server.global_model ? &*server.global_model : nullptr;

  for (std::size_t c = 0; c < clients.size(); ++c) {
    const std::size_t features = clients[c].local_train.feature_count();
    Forest local(features, std::move(local_trees[c]));
    AdoptionDecision decision = client_adopt(clients[c], global, local);
    report.per_client.push_back({clients[c].client_id, decision, std::move(local)});
  }

  if (global != nullptr) {
    const std::vector<double> predicted = predict_forest_all(*global, test);
    report.global_mse_test = mse(predicted, test.targets());
    report.global_pearson_test = pearson(predicted, test.targets());
    report.global_r2_test = r_squared(predicted, test.targets());
    report.global_mdi = forest_mdi(*global);
    report.global_mdi_entropy = mdi_entropy(*report.global_mdi);
    report.global_tree_count = global->size();
    report.global_model = *global;
  }

  server.round = report.round;
  return report;
}

FederatedSetup make_setup(const Dataset& dataset, const SetupParams& params, double threshold_k) {
  const std::uint64_t seed = params.plan.general_seed;
  auto [train, held_out] = train_test_split(dataset, params.train_fraction, mix_seed(seed, kTrainTestTag));
  if (held_out.rows() < 4) throw ConfigError("test split too small to share between server and reporting");
  auto [server_validation, test] =
      train_test_split(held_out, params.server_validation_fraction, mix_seed(seed, kServerSplitTag));

  std::vector<Dataset> chunks = partition_clients(train, params.plan);
  std::vector<ClientState> clients;
  clients.reserve(chunks.size());
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const auto id = static_cast<std::uint32_t>(params.plan.first_client_id + c);
    clients.push_back(make_client(id, chunks[c], seed, params.client_validation_fraction));
  }
  return FederatedSetup{ServerState{server_validation.samples(), threshold_k, std::nullopt, 0}, std::move(clients),
                        test.samples()};
}

std::vector<RoundReport> run_experiment(FederatedSetup setup, const ProtocolConfig& config) {
  config.validate();
  setup.server.threshold_k = config.threshold_k;
  std::vector<RoundReport> reports;
  std::size_t stale_rounds = 0;
  for (std::size_t r = 0; r < config.num_rounds; ++r) {
    reports.push_back(run_round(setup.server, setup.clients, config, setup.test));
    if (!config.early_stop || reports.size() < 2) continue;
    const auto& prev = reports[reports.size() - 2].global_mse_test;
    const auto& cur = reports.back().global_mse_test;
    const double improvement = (prev && cur) ? *prev - *cur : -std::numeric_limits<double>::infinity();
    stale_rounds = improvement < config.plateau_tol ? stale_rounds + 1 : 0;
    if (stale_rounds >= config.patience) break;
  }
  return reports;
}

}  // namespace dpfl
