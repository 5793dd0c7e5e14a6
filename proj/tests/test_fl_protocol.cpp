#include <algorithm>
#include <limits>

#include "doctest.h"
#include "dpfl/errors.hpp"
#include "dpfl/fl_protocol.hpp"
#include "dpfl/metrics.hpp"

using namespace dpfl;

namespace {

RegressionTree leaf_tree(double value, std::size_t features) {
  TreeNode leaf;
  leaf.prediction = value;
  leaf.samples = 1;
  return RegressionTree({leaf}, features, {}, PrivacyParams::disabled(), 0.0);
}

// Stump on feature 0 at 0.5.
RegressionTree stump(double lo, double hi) {
  TreeNode root;
  root.left = 1;
  root.right = 2;
  root.feature = 0;
  root.threshold = 0.5;
  root.impurity = 1.0;
  root.gain_raw = 1.0;
  TreeNode l, r;
  l.prediction = lo;
  r.prediction = hi;
  return RegressionTree({root, l, r}, 1, {}, PrivacyParams::disabled(), 0.0);
}

TreeRecord rec(RegressionTree t, std::uint32_t client, std::uint32_t round = 1) {
  return {std::move(t), client, round, 0, std::nullopt};
}

// y = 10 * x on a grid of x in {0.05, 0.15, ..., 0.95}.
SampleMatrix line_data() {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(0.05 + 0.1 * i);
    y.push_back(10.0 * x.back());
  }
  return SampleMatrix(x, y, 1);
}

FederatedSetup small_setup(std::uint64_t seed, std::size_t clients = 20) {
  SynthParams p;
  p.rows = 1200;
  p.features = 4;
  p.seed = seed;
  SetupParams sp;
  sp.plan.general_seed = seed;
  sp.plan.num_clients = clients;
  return make_setup(synth_dataset(p), sp, 0.5);
}

}  // namespace

TEST_CASE("server_filter keeps scores at or above K in submission order") {
  const SampleMatrix validation = line_data();
  ServerState server{validation, 0.5, std::nullopt, 0};

  // Stump R^2 = 1 - SSE / SST with SST = 82.5 on this grid.
  std::vector<TreeRecord> subs;
  subs.push_back(rec(stump(1.0, 9.0), 1));    // SSE 42.5 -> 0.485
  subs.push_back(rec(stump(1.5, 8.5), 2));    // SSE 30   -> 0.636
  subs.push_back(rec(leaf_tree(5.0, 1), 3));  // mean predictor -> 0
  subs.push_back(rec(stump(2.5, 7.5), 4));    // SSE 20   -> 0.758
  const auto r = server_filter(subs, server);
  REQUIRE(r.accepted.size() == 2);
  REQUIRE(r.rejected.size() == 2);
  CHECK(r.accepted[0].client_id == 2);
  CHECK(r.accepted[1].client_id == 4);
  CHECK(r.rejected[0].client_id == 1);
  CHECK(r.rejected[1].client_id == 3);
  CHECK(*r.accepted[0].validation_score == doctest::Approx(1.0 - 30.0 / 82.5));
  CHECK(*r.accepted[1].validation_score == doctest::Approx(1.0 - 20.0 / 82.5));
  CHECK(*r.rejected[0].validation_score == doctest::Approx(1.0 - 42.5 / 82.5));
  CHECK(*r.rejected[1].validation_score == doctest::Approx(0.0));
}

TEST_CASE("server_filter boundary: score exactly K is accepted") {
  const SampleMatrix validation = line_data();
  const auto tree = stump(2.5, 7.5);
  std::vector<double> p;
  for (std::size_t i = 0; i < validation.rows(); ++i) p.push_back(predict_tree(tree, validation.row(i)));
  const double score = r_squared(p, validation.targets());
  ServerState at{validation, score, std::nullopt, 0};
  CHECK(server_filter({rec(tree, 1)}, at).accepted.size() == 1);
  ServerState above{validation, std::nextafter(score, 2.0), std::nullopt, 0};
  CHECK(server_filter({rec(tree, 1)}, above).accepted.empty());
}

TEST_CASE("pearson scoring rejects constant predictions") {
  ServerState server{line_data(), -0.5, std::nullopt, 0};
  const auto r = server_filter({rec(leaf_tree(3.0, 1), 1), rec(stump(1, 9), 2)}, server, ScoreKind::kPearson);
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].client_id == 1);
  CHECK(*r.rejected[0].validation_score == -1.0);
}

TEST_CASE("server_aggregate strategies") {
  ServerState server{line_data(), 0.5, std::nullopt, 0};
  ProtocolConfig cfg;
  SUBCASE("replace") {
    cfg.aggregation = AggregationStrategy::kReplace;
    server_aggregate({rec(leaf_tree(1, 1), 1, 1), rec(leaf_tree(2, 1), 2, 1)}, server, cfg);
    server_aggregate({rec(leaf_tree(3, 1), 1, 2)}, server, cfg);
    REQUIRE(server.global_model);
    CHECK(server.global_model->size() == 1);
    CHECK(server.global_model->trees()[0].round == 2);
  }
  SUBCASE("accumulate with cap") {
    cfg.aggregation = AggregationStrategy::kAccumulate;
    cfg.max_global_trees = 3;
    server_aggregate({rec(leaf_tree(1, 1), 1, 1), rec(leaf_tree(2, 1), 2, 1)}, server, cfg);
    server_aggregate({rec(leaf_tree(3, 1), 1, 2), rec(leaf_tree(4, 1), 2, 2)}, server, cfg);
    REQUIRE(server.global_model->size() == 3);
    CHECK(id_of(server.global_model->trees()[0]) == TreeId{2, 1, 0});
    CHECK(predict_forest(*server.global_model, std::vector<double>{0.0}) == 3.0);
  }
  SUBCASE("nothing accepted keeps the previous model") {
    CHECK_FALSE(server_aggregate({}, server, cfg).has_value());
    server_aggregate({rec(leaf_tree(1, 1), 1, 1)}, server, cfg);
    const Forest before = *server.global_model;
    CHECK(*server_aggregate({}, server, cfg) == before);
  }
}

TEST_CASE("client_adopt uses a strict comparison") {
  Dataset chunk;
  chunk.feature_names = {"x"};
  chunk.target_name = "y";
  for (int i = 0; i < 10; ++i) {
    chunk.features.push_back(0.05 + 0.1 * i);
    chunk.targets.push_back(i < 5 ? 0.0 : 10.0);
  }
  ClientState client = make_client(1, chunk, 7, 0.5);
  const Forest good(1, {rec(stump(0, 10), 1)});
  const Forest bad(1, {rec(leaf_tree(100, 1), 1)});

  auto d = client_adopt(client, &good, bad);
  CHECK(d.adopted_global);
  CHECK(*client.current_model == good);

  d = client_adopt(client, &good, good);  // tie: keep local
  CHECK_FALSE(d.adopted_global);
  CHECK(*d.global_mse == d.local_mse);

  d = client_adopt(client, &bad, good);
  CHECK_FALSE(d.adopted_global);
  CHECK(*client.current_model == good);

  d = client_adopt(client, nullptr, bad);
  CHECK_FALSE(d.adopted_global);
  CHECK_FALSE(d.global_mse.has_value());
}

TEST_CASE("run_round with twenty clients") {
  auto setup = small_setup(5);
  ProtocolConfig cfg;
  cfg.tree = {4, 4, 2};
  const auto rep = run_round(setup.server, setup.clients, cfg, setup.test);
  CHECK(rep.round == 1);
  CHECK(rep.accepted.size() + rep.rejected.size() == 20);
  CHECK(rep.per_client.size() == 20);
  CHECK(rep.epsilon_spent_total == 0.0);
  CHECK_FALSE(rep.degenerate);
  REQUIRE(rep.global_model);
  CHECK(rep.global_tree_count == rep.accepted.size());
  CHECK(rep.global_mse_test == doctest::Approx(mse_of_model(*rep.global_model, setup.test)).epsilon(1e-12));
  for (const auto& t : rep.global_model->trees()) CHECK(*t.validation_score >= 0.5);
  CHECK(setup.server.round == 1);
}

TEST_CASE("DP rounds account epsilon per split") {
  auto setup = small_setup(6);
  ProtocolConfig cfg;
  cfg.tree = {3, 4, 2};
  cfg.privacy = PrivacyParams::with_epsilon(0.25);
  const auto rep = run_round(setup.server, setup.clients, cfg, setup.test);
  double expected = 0;
  for (const auto& c : rep.per_client) {
    for (const auto& t : c.local_model.trees()) expected += 0.25 * static_cast<double>(t.tree.internal_node_count());
  }
  CHECK(rep.epsilon_spent_total == doctest::Approx(expected));
}

TEST_CASE("a round with K above 1 is degenerate") {
  auto setup = small_setup(8);
  setup.server.threshold_k = 1.5;
  ProtocolConfig cfg;
  const auto rep = run_round(setup.server, setup.clients, cfg, setup.test);
  CHECK(rep.degenerate);
  CHECK(rep.accepted.empty());
  CHECK_FALSE(rep.global_mse_test.has_value());
  CHECK_FALSE(rep.global_model.has_value());
  for (const auto& c : rep.per_client) CHECK_FALSE(c.decision.adopted_global);
}

TEST_CASE("client streams are isolated from client order") {
  auto a = small_setup(9, 6);
  auto b = small_setup(9, 6);
  std::reverse(b.clients.begin(), b.clients.end());
  ProtocolConfig cfg;
  cfg.privacy = PrivacyParams::with_epsilon(1.0);
  const auto ra = run_round(a.server, a.clients, cfg, a.test);
  const auto rb = run_round(b.server, b.clients, cfg, b.test);
  for (const auto& ca : ra.per_client) {
    const auto it = std::find_if(rb.per_client.begin(), rb.per_client.end(),
                                 [&](const ClientRoundResult& cb) { return cb.client_id == ca.client_id; });
    REQUIRE(it != rb.per_client.end());
    CHECK(it->local_model == ca.local_model);
  }
  REQUIRE(ra.global_model);
  CHECK(*ra.global_model == *rb.global_model);
  CHECK(ra.global_mse_test == rb.global_mse_test);
}

TEST_CASE("run_experiment stopping") {
  ProtocolConfig cfg;
  cfg.tree = {3, 4, 2};
  SUBCASE("single round") {
    cfg.num_rounds = 1;
    CHECK(run_experiment(small_setup(3), cfg).size() == 1);
  }
  SUBCASE("infinite plateau tolerance stops after 1 + patience rounds") {
    cfg.num_rounds = 10;
    cfg.early_stop = true;
    cfg.plateau_tol = std::numeric_limits<double>::infinity();
    cfg.patience = 3;
    CHECK(run_experiment(small_setup(3), cfg).size() == 4);
  }
  SUBCASE("no early stop runs every round") {
    cfg.num_rounds = 4;
    const auto reps = run_experiment(small_setup(3), cfg);
    REQUIRE(reps.size() == 4);
    for (std::size_t r = 0; r < 4; ++r) CHECK(reps[r].round == r + 1);
  }
  SUBCASE("invalid config") {
    cfg.num_rounds = 0;
    CHECK_THROWS_AS(run_experiment(small_setup(3), cfg), ConfigError);
  }
}

TEST_CASE("serialized submissions give the same result") {
  ProtocolConfig cfg;
  cfg.num_rounds = 2;
  cfg.privacy = PrivacyParams::with_epsilon(0.5);
  const auto wire = run_experiment(small_setup(4), cfg);
  cfg.serialize_submissions = false;
  const auto direct = run_experiment(small_setup(4), cfg);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(wire[r].global_mse_test == direct[r].global_mse_test);
    CHECK(wire[r].accepted == direct[r].accepted);
  }
}
