#include "dpfl/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "dpfl/errors.hpp"
#include "dpfl/metrics.hpp"
#include "dpfl/serialize.hpp"

namespace dpfl::sim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (num_clients < 1) throw ConfigError("num_clients must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (epsilons.empty()) throw ConfigError("epsilons must list at least one value (use 'none' for no DP)");
  for (const auto& e : epsilons) {
    if (e && (!(*e > 0.0) || !std::isfinite(*e))) throw ConfigError("every epsilon must be positive and finite");
  }
  auto fraction_ok = [](double f) { return f > 0.0 && f < 1.0; };
  if (!fraction_ok(train_fraction) || !fraction_ok(server_validation_fraction) ||
      !fraction_ok(client_validation_fraction)) {
    throw ConfigError("split fractions must lie strictly between 0 and 1");
  }
  if (dataset.kind == DatasetSource::Kind::kCsv) {
    if (dataset.csv_path.empty()) throw ConfigError("dataset.csv.path is required for a csv source");
    if (dataset.csv.target_column.empty()) throw ConfigError("dataset.csv.target is required for a csv source");
  }
  protocol.validate();
}

namespace {

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (const YAML::Node v = node[key]) {
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(std::string("config key '") + key + "' has an invalid value");
    }
  }
}

std::optional<double> parse_epsilon(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s == "none" || s == "null" || s == "off") return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("invalid epsilon '" + text + "'");
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("epsilon must be positive and finite, got '" + text + "'");
  return v;
}

std::string shortest(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  if (std::isnan(v)) return ".nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  // Keep YAML from reading whole-number doubles back as ints (harmless, but explicit).
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

const char* partition_name(PartitionMode m) {
  return m == PartitionMode::kDisjointChunks ? "disjoint" : "per_client_sample";
}

}  // namespace

std::vector<std::optional<double>> parse_epsilon_list(const std::string& text) {
  std::vector<std::optional<double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_epsilon(item));
  if (out.empty()) throw ConfigError("empty epsilon list");
  return out;
}

std::string epsilon_label(const std::optional<double>& epsilon) {
  return epsilon ? format_number(*epsilon) : "none";
}

ExperimentConfig config_from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  check_keys(root, "",
             {"general_seed", "num_clients", "num_rounds", "threshold_k", "epsilons", "repeats", "jobs",
              "trees_per_client", "score", "partition_mode", "splits", "tree", "aggregation", "early_stop",
              "dataset", "serialize_submissions"});

  read(root, "general_seed", cfg.general_seed);
  read(root, "num_clients", cfg.num_clients);
  read(root, "num_rounds", cfg.protocol.num_rounds);
  read(root, "threshold_k", cfg.protocol.threshold_k);
  read(root, "repeats", cfg.repeats);
  read(root, "jobs", cfg.jobs);
  read(root, "trees_per_client", cfg.protocol.trees_per_client);
  read(root, "serialize_submissions", cfg.protocol.serialize_submissions);

  if (const YAML::Node eps = root["epsilons"]) {
    cfg.epsilons.clear();
    if (eps.IsSequence()) {
      for (const auto& e : eps) {
        cfg.epsilons.push_back(e.IsNull() ? std::nullopt : parse_epsilon(e.as<std::string>()));
      }
    } else {
      cfg.epsilons = parse_epsilon_list(eps.as<std::string>());
    }
  }
  if (const YAML::Node s = root["score"]) {
    const auto v = s.as<std::string>();
    if (v == "r2") cfg.protocol.score = ScoreKind::kRSquared;
    else if (v == "pearson") cfg.protocol.score = ScoreKind::kPearson;
    else throw ConfigError("score must be 'r2' or 'pearson'");
  }
  if (const YAML::Node p = root["partition_mode"]) {
    const auto v = p.as<std::string>();
    if (v == "disjoint") cfg.partition_mode = PartitionMode::kDisjointChunks;
    else if (v == "per_client_sample") cfg.partition_mode = PartitionMode::kPerClientSample;
    else throw ConfigError("partition_mode must be 'disjoint' or 'per_client_sample'");
  }
  if (const YAML::Node s = root["splits"]) {
    check_keys(s, "splits", {"train_fraction", "server_validation_fraction", "client_validation_fraction"});
    read(s, "train_fraction", cfg.train_fraction);
    read(s, "server_validation_fraction", cfg.server_validation_fraction);
    read(s, "client_validation_fraction", cfg.client_validation_fraction);
  }
  if (const YAML::Node t = root["tree"]) {
    check_keys(t, "tree", {"max_depth", "min_samples_split", "min_samples_leaf", "sensitivity"});
    read(t, "max_depth", cfg.protocol.tree.max_depth);
    read(t, "min_samples_split", cfg.protocol.tree.min_samples_split);
    read(t, "min_samples_leaf", cfg.protocol.tree.min_samples_leaf);
    read(t, "sensitivity", cfg.protocol.privacy.sensitivity);
  }
  if (const YAML::Node a = root["aggregation"]) {
    check_keys(a, "aggregation", {"strategy", "max_global_trees"});
    if (const YAML::Node s = a["strategy"]) {
      const auto v = s.as<std::string>();
      if (v == "replace") cfg.protocol.aggregation = AggregationStrategy::kReplace;
      else if (v == "accumulate") cfg.protocol.aggregation = AggregationStrategy::kAccumulate;
      else throw ConfigError("aggregation.strategy must be 'replace' or 'accumulate'");
    }
    read(a, "max_global_trees", cfg.protocol.max_global_trees);
  }
  if (const YAML::Node e = root["early_stop"]) {
    check_keys(e, "early_stop", {"enabled", "plateau_tol", "patience"});
    read(e, "enabled", cfg.protocol.early_stop);
    read(e, "plateau_tol", cfg.protocol.plateau_tol);
    read(e, "patience", cfg.protocol.patience);
  }
  if (const YAML::Node d = root["dataset"]) {
    check_keys(d, "dataset", {"source", "synthetic", "csv"});
    if (const YAML::Node s = d["source"]) {
      const auto v = s.as<std::string>();
      if (v == "synthetic") cfg.dataset.kind = DatasetSource::Kind::kSynthetic;
      else if (v == "csv") cfg.dataset.kind = DatasetSource::Kind::kCsv;
      else throw ConfigError("dataset.source must be 'synthetic' or 'csv'");
    }
    if (const YAML::Node s = d["synthetic"]) {
      check_keys(s, "dataset.synthetic",
                 {"rows", "features", "dominant_feature_weight", "minor_terms", "step_terms", "noise_sd", "correlation"});
      auto& sp = cfg.dataset.synthetic;
      read(s, "rows", sp.rows);
      read(s, "features", sp.features);
      read(s, "dominant_feature_weight", sp.dominant_feature_weight);
      read(s, "minor_terms", sp.minor_terms);
      read(s, "step_terms", sp.step_terms);
      read(s, "noise_sd", sp.noise_sd);
      read(s, "correlation", sp.correlation);
    }
    if (const YAML::Node c = d["csv"]) {
      check_keys(c, "dataset.csv", {"path", "target", "date_columns", "drop_columns", "delimiter"});
      std::string path;
      read(c, "path", path);
      cfg.dataset.csv_path = path;
      read(c, "target", cfg.dataset.csv.target_column);
      read(c, "date_columns", cfg.dataset.csv.date_columns);
      read(c, "drop_columns", cfg.dataset.csv.drop_columns);
      std::string delim;
      read(c, "delimiter", delim);
      if (!delim.empty()) {
        if (delim.size() != 1) throw ConfigError("dataset.csv.delimiter must be one character");
        cfg.dataset.csv.delimiter = delim[0];
      }
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = config_from_yaml(buf.str());
  if (cfg.dataset.kind == DatasetSource::Kind::kCsv && cfg.dataset.csv_path.is_relative()) {
    cfg.dataset.csv_path = path.parent_path() / cfg.dataset.csv_path;
  }
  return cfg;
}

std::string config_to_yaml(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "general_seed" << YAML::Value << cfg.general_seed;
  out << YAML::Key << "num_clients" << YAML::Value << cfg.num_clients;
  out << YAML::Key << "num_rounds" << YAML::Value << cfg.protocol.num_rounds;
  out << YAML::Key << "threshold_k" << YAML::Value << shortest(cfg.protocol.threshold_k);
  out << YAML::Key << "epsilons" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& e : cfg.epsilons) out << (e ? shortest(*e) : std::string("none"));
  out << YAML::EndSeq;
  out << YAML::Key << "repeats" << YAML::Value << cfg.repeats;
  out << YAML::Key << "jobs" << YAML::Value << cfg.jobs;
  out << YAML::Key << "trees_per_client" << YAML::Value << cfg.protocol.trees_per_client;
  out << YAML::Key << "score" << YAML::Value << (cfg.protocol.score == ScoreKind::kRSquared ? "r2" : "pearson");
  out << YAML::Key << "partition_mode" << YAML::Value << partition_name(cfg.partition_mode);
  out << YAML::Key << "serialize_submissions" << YAML::Value << cfg.protocol.serialize_submissions;

  out << YAML::Key << "splits" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "train_fraction" << YAML::Value << shortest(cfg.train_fraction);
  out << YAML::Key << "server_validation_fraction" << YAML::Value << shortest(cfg.server_validation_fraction);
  out << YAML::Key << "client_validation_fraction" << YAML::Value << shortest(cfg.client_validation_fraction);
  out << YAML::EndMap;

  out << YAML::Key << "tree" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_depth" << YAML::Value << cfg.protocol.tree.max_depth;
  out << YAML::Key << "min_samples_split" << YAML::Value << cfg.protocol.tree.min_samples_split;
  out << YAML::Key << "min_samples_leaf" << YAML::Value << cfg.protocol.tree.min_samples_leaf;
  out << YAML::Key << "sensitivity" << YAML::Value << shortest(cfg.protocol.privacy.sensitivity);
  out << YAML::EndMap;

  out << YAML::Key << "aggregation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "strategy" << YAML::Value
      << (cfg.protocol.aggregation == AggregationStrategy::kReplace ? "replace" : "accumulate");
  out << YAML::Key << "max_global_trees" << YAML::Value << cfg.protocol.max_global_trees;
  out << YAML::EndMap;

  out << YAML::Key << "early_stop" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << cfg.protocol.early_stop;
  out << YAML::Key << "plateau_tol" << YAML::Value << shortest(cfg.protocol.plateau_tol);
  out << YAML::Key << "patience" << YAML::Value << cfg.protocol.patience;
  out << YAML::EndMap;

  const auto& sp = cfg.dataset.synthetic;
  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "source" << YAML::Value
      << (cfg.dataset.kind == DatasetSource::Kind::kSynthetic ? "synthetic" : "csv");
  out << YAML::Key << "synthetic" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rows" << YAML::Value << sp.rows;
  out << YAML::Key << "features" << YAML::Value << sp.features;
  out << YAML::Key << "dominant_feature_weight" << YAML::Value << shortest(sp.dominant_feature_weight);
  out << YAML::Key << "minor_terms" << YAML::Value << sp.minor_terms;
  out << YAML::Key << "step_terms" << YAML::Value << sp.step_terms;
  out << YAML::Key << "noise_sd" << YAML::Value << shortest(sp.noise_sd);
  out << YAML::Key << "correlation" << YAML::Value << shortest(sp.correlation);
  out << YAML::EndMap;
  out << YAML::Key << "csv" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "path" << YAML::Value << cfg.dataset.csv_path.string();
  out << YAML::Key << "target" << YAML::Value << cfg.dataset.csv.target_column;
  out << YAML::Key << "date_columns" << YAML::Value << YAML::Flow << cfg.dataset.csv.date_columns;
  out << YAML::Key << "drop_columns" << YAML::Value << YAML::Flow << cfg.dataset.csv.drop_columns;
  out << YAML::Key << "delimiter" << YAML::Value << std::string(1, cfg.dataset.csv.delimiter);
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Running

std::uint64_t repeat_seed(std::uint64_t general_seed, std::size_t repeat) {
  return repeat == 0 ? general_seed : mix_seed(general_seed, 0x5EED0000ULL + repeat);
}

Dataset dataset_for_repeat(const ExperimentConfig& config, std::size_t repeat) {
  if (config.dataset.kind == DatasetSource::Kind::kCsv) return load_csv(config.dataset.csv_path, config.dataset.csv);
  SynthParams params = config.dataset.synthetic;
  params.seed = repeat_seed(config.general_seed, repeat);
  return synth_dataset(params);
}

ExperimentResult run_single(const ExperimentConfig& config, const Dataset& dataset, std::optional<double> epsilon,
                            std::size_t repeat) {
  ExperimentResult result;
  result.epsilon = epsilon;
  result.repeat = repeat;
  result.seed = repeat_seed(config.general_seed, repeat);
  result.feature_names = dataset.feature_names;

  SetupParams setup;
  setup.train_fraction = config.train_fraction;
  setup.server_validation_fraction = config.server_validation_fraction;
  setup.client_validation_fraction = config.client_validation_fraction;
  setup.plan = PartitionPlan{result.seed, config.num_clients, config.partition_mode, 1};

  ProtocolConfig protocol = config.protocol;
  protocol.privacy = epsilon ? PrivacyParams::with_epsilon(*epsilon, protocol.privacy.sensitivity)
                             : PrivacyParams::disabled(protocol.privacy.sensitivity);
  result.reports = run_experiment(make_setup(dataset, setup, protocol.threshold_k), protocol);
  return result;
}

std::vector<ExperimentResult> run_grid(const ExperimentConfig& config) {
  config.validate();
  // Every epsilon of a repeat shares one dataset, hence identical partitions.
  std::vector<Dataset> datasets;
  if (config.dataset.kind == DatasetSource::Kind::kCsv) {
    datasets.push_back(dataset_for_repeat(config, 0));
  } else {
    for (std::size_t r = 0; r < config.repeats; ++r) datasets.push_back(dataset_for_repeat(config, r));
  }

  const std::size_t total = config.epsilons.size() * config.repeats;
  std::vector<std::optional<ExperimentResult>> results(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t e = i / config.repeats;
      const std::size_t r = i % config.repeats;
      try {
        results[i] = run_single(config, datasets[std::min(r, datasets.size() - 1)], config.epsilons[e], r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(config.jobs, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ExperimentResult> out;
  out.reserve(total);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string format_number(double value) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", value);
  return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Stats {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

Stats stats_of(const std::vector<double>& values) {
  Stats s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

json stats_json(const std::vector<double>& values) {
  const Stats s = stats_of(values);
  if (s.n == 0) return {{"n", 0}, {"mean", nullptr}, {"sd", nullptr}};
  return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

json tree_id_json(const TreeId& id) { return {{"client_id", id.client_id}, {"round", id.round}, {"index", id.index}}; }

}  // namespace

json result_to_json(const ExperimentResult& result) {
  json rounds = json::array();
  for (const auto& rep : result.reports) {
    json accepted = json::array();
    json rejected = json::array();
    for (const auto& id : rep.accepted) accepted.push_back(tree_id_json(id));
    for (const auto& id : rep.rejected) rejected.push_back(tree_id_json(id));
    json clients = json::array();
    for (const auto& c : rep.per_client) {
      clients.push_back({{"client_id", c.client_id},
                         {"local_mse", c.decision.local_mse},
                         {"global_mse", opt_json(c.decision.global_mse)},
                         {"adopted_global", c.decision.adopted_global}});
    }
    json scores = json::array();
    if (rep.global_model) {
      for (const auto& t : rep.global_model->trees()) {
        scores.push_back({{"client_id", t.client_id}, {"round", t.round}, {"index", t.index},
                          {"validation_score", opt_json(t.validation_score)}});
      }
    }
    rounds.push_back({{"round", rep.round},
                      {"degenerate", rep.degenerate},
                      {"accepted", accepted},
                      {"rejected", rejected},
                      {"global_mse_test", opt_json(rep.global_mse_test)},
                      {"global_pearson_test", opt_json(rep.global_pearson_test)},
                      {"global_r2_test", opt_json(rep.global_r2_test)},
                      {"global_mdi", rep.global_mdi ? json(*rep.global_mdi) : json(nullptr)},
                      {"global_mdi_entropy", opt_json(rep.global_mdi_entropy)},
                      {"global_tree_count", rep.global_tree_count},
                      {"global_tree_scores", scores},
                      {"epsilon_spent_total", rep.epsilon_spent_total},
                      {"per_client", clients}});
  }
  return {{"epsilon", opt_json(result.epsilon)},
          {"repeat", result.repeat},
          {"seed", result.seed},
          {"feature_names", result.feature_names},
          {"rounds", rounds}};
}

void emit_reports(const std::vector<ExperimentResult>& results, const std::filesystem::path& out_dir) {
  if (results.empty()) throw ContractViolation("emit_reports: no results");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "experiments", ec);
  if (ec) throw std::runtime_error("cannot create " + (out_dir / "experiments").string() + ": " + ec.message());

  std::ostringstream rounds_csv;
  rounds_csv << "epsilon,repeat,round,global_mse,global_pearson,accepted_trees,epsilon_spent_total\n";
  std::ostringstream mdi_csv;
  mdi_csv << "epsilon,repeat,feature_name,mdi\n";

  for (const auto& res : results) {
    const std::string label = epsilon_label(res.epsilon);
    for (const auto& rep : res.reports) {
      rounds_csv << label << ',' << res.repeat << ',' << rep.round << ',' << opt_number(rep.global_mse_test) << ','
                 << opt_number(rep.global_pearson_test) << ',' << rep.accepted.size() << ','
                 << format_number(rep.epsilon_spent_total) << '\n';
    }
    const auto& final_mdi = res.reports.back().global_mdi;
    for (std::size_t f = 0; f < res.feature_names.size(); ++f) {
      mdi_csv << label << ',' << res.repeat << ',' << res.feature_names[f] << ','
              << (final_mdi ? format_number((*final_mdi)[f]) : "NA") << '\n';
    }
    const auto dir = out_dir / "experiments" / ("eps_" + label + "_rep_" + std::to_string(res.repeat));
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "report.json", result_to_json(res).dump(2) + "\n");
  }
  write_file(out_dir / "rounds.csv", rounds_csv.str());
  write_file(out_dir / "mdi.csv", mdi_csv.str());

  // Group by epsilon, keeping first-appearance order.
  std::vector<std::string> labels;
  std::map<std::string, std::vector<const ExperimentResult*>> groups;
  for (const auto& res : results) {
    const std::string label = epsilon_label(res.epsilon);
    if (!groups.count(label)) labels.push_back(label);
    groups[label].push_back(&res);
  }

  json summary = json::array();
  for (const auto& label : labels) {
    const auto& group = groups[label];
    std::vector<double> final_mse, final_pearson, final_entropy, final_accepted, spent;
    std::map<std::uint32_t, std::pair<std::vector<double>, std::vector<double>>> per_round;
    const std::vector<std::string>& names = group.front()->feature_names;
    std::vector<std::vector<double>> mdi(names.size());
    for (const auto* res : group) {
      const RoundReport& last = res->reports.back();
      if (last.global_mse_test) final_mse.push_back(*last.global_mse_test);
      if (last.global_pearson_test) final_pearson.push_back(*last.global_pearson_test);
      if (last.global_mdi_entropy) final_entropy.push_back(*last.global_mdi_entropy);
      final_accepted.push_back(static_cast<double>(last.accepted.size()));
      double total_spent = 0.0;
      for (const auto& rep : res->reports) {
        total_spent += rep.epsilon_spent_total;
        if (rep.global_mse_test) per_round[rep.round].first.push_back(*rep.global_mse_test);
        if (rep.global_pearson_test) per_round[rep.round].second.push_back(*rep.global_pearson_test);
      }
      spent.push_back(total_spent);
      if (last.global_mdi) {
        for (std::size_t f = 0; f < names.size(); ++f) mdi[f].push_back((*last.global_mdi)[f]);
      }
    }
    json mdi_json = json::array();
    for (std::size_t f = 0; f < names.size(); ++f) {
      json entry = stats_json(mdi[f]);
      entry["feature_name"] = names[f];
      mdi_json.push_back(entry);
    }
    json rounds_json = json::array();
    for (const auto& [round, values] : per_round) {
      rounds_json.push_back(
          {{"round", round}, {"global_mse", stats_json(values.first)}, {"global_pearson", stats_json(values.second)}});
    }
    summary.push_back({{"epsilon", label},
                       {"repeats", group.size()},
                       {"final_global_mse", stats_json(final_mse)},
                       {"final_global_pearson", stats_json(final_pearson)},
                       {"final_mdi_entropy", stats_json(final_entropy)},
                       {"final_accepted_trees", stats_json(final_accepted)},
                       {"epsilon_spent_total", stats_json(spent)},
                       {"final_mdi", mdi_json},
                       {"rounds", rounds_json}});
  }
  write_file(out_dir / "summary.json", json{{"epsilons", summary}}.dump(2) + "\n");
}

}  // namespace dpfl::sim
