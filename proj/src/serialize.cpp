#include "dpfl/serialize.hpp"

#include "dpfl/errors.hpp"

namespace dpfl {

using nlohmann::json;

namespace {

json node_to_json(const std::vector<TreeNode>& nodes, std::size_t i) {
  const TreeNode& n = nodes[i];
  if (n.is_leaf()) {
    return {{"type", "leaf"},
            {"prediction", n.prediction},
            {"weight", n.weight},
            {"impurity", n.impurity},
            {"samples", n.samples}};
  }
  return {{"type", "internal"},
          {"feature", n.feature},
          {"threshold", n.threshold},
          {"impurity", n.impurity},
          {"weight", n.weight},
          {"gain_raw", n.gain_raw},
          {"samples", n.samples},
          {"left", node_to_json(nodes, static_cast<std::size_t>(n.left))},
          {"right", node_to_json(nodes, static_cast<std::size_t>(n.right))}};
}

std::int32_t node_from_json(const json& doc, std::vector<TreeNode>& out) {
  const auto index = static_cast<std::int32_t>(out.size());
  out.emplace_back();
  TreeNode node;
  const std::string type = doc.at("type").get<std::string>();
  node.weight = doc.at("weight").get<double>();
  node.impurity = doc.value("impurity", 0.0);
  node.samples = doc.value("samples", std::size_t{0});
  if (type == "leaf") {
    node.prediction = doc.at("prediction").get<double>();
    out[static_cast<std::size_t>(index)] = node;
    return index;
  }
  if (type != "internal") throw ContractViolation("tree_from_json: unknown node type '" + type + "'");
  node.feature = doc.at("feature").get<std::size_t>();
  node.threshold = doc.at("threshold").get<double>();
  node.gain_raw = doc.value("gain_raw", 0.0);
  node.left = node_from_json(doc.at("left"), out);
  node.right = node_from_json(doc.at("right"), out);
  out[static_cast<std::size_t>(index)] = node;
  return index;
}

}  // namespace

json tree_to_json(const RegressionTree& tree) {
  const auto& hp = tree.hyperparams();
  const auto& pp = tree.privacy();
  json privacy = {{"sensitivity", pp.sensitivity}};
  privacy["epsilon"] = pp.dp_enabled ? json(pp.epsilon) : json(nullptr);
  return {{"feature_count", tree.feature_count()},
          {"hyperparams",
           {{"max_depth", hp.max_depth},
            {"min_samples_split", hp.min_samples_split},
            {"min_samples_leaf", hp.min_samples_leaf}}},
          {"privacy", privacy},
          {"epsilon_spent", tree.epsilon_spent()},
          {"root", node_to_json(tree.nodes(), 0)}};
}

RegressionTree tree_from_json(const json& doc) {
  try {
    TreeHyperparams hp;
    const json& h = doc.at("hyperparams");
    hp.max_depth = h.at("max_depth").get<int>();
    hp.min_samples_split = h.at("min_samples_split").get<std::size_t>();
    hp.min_samples_leaf = h.at("min_samples_leaf").get<std::size_t>();

    PrivacyParams pp;
    const json& p = doc.at("privacy");
    pp.sensitivity = p.at("sensitivity").get<double>();
    if (p.at("epsilon").is_null()) {
      pp = PrivacyParams::disabled(pp.sensitivity);
    } else {
      pp = PrivacyParams::with_epsilon(p.at("epsilon").get<double>(), pp.sensitivity);
    }

    std::vector<TreeNode> nodes;
    node_from_json(doc.at("root"), nodes);
    return RegressionTree(std::move(nodes), doc.at("feature_count").get<std::size_t>(), hp, pp,
                          doc.at("epsilon_spent").get<double>());
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("tree_from_json: malformed document: ") + e.what());
  }
}

json record_to_json(const TreeRecord& record) {
  json doc = {{"client_id", record.client_id},
              {"round", record.round},
              {"index", record.index},
              {"tree", tree_to_json(record.tree)}};
  doc["validation_score"] = record.validation_score ? json(*record.validation_score) : json(nullptr);
  return doc;
}

TreeRecord record_from_json(const json& doc) {
  try {
    TreeRecord record{tree_from_json(doc.at("tree")), doc.at("client_id").get<std::uint32_t>(),
                      doc.at("round").get<std::uint32_t>(), doc.value("index", std::uint32_t{0}), std::nullopt};
    if (doc.contains("validation_score") && !doc.at("validation_score").is_null()) {
      record.validation_score = doc.at("validation_score").get<double>();
    }
    return record;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("record_from_json: malformed document: ") + e.what());
  }
}

json forest_to_json(const Forest& forest) {
  json trees = json::array();
  for (const auto& r : forest.trees()) trees.push_back(record_to_json(r));
  return {{"feature_count", forest.feature_count()}, {"trees", trees}};
}

Forest forest_from_json(const json& doc) {
  try {
    Forest forest(doc.at("feature_count").get<std::size_t>());
    for (const auto& t : doc.at("trees")) forest.add(record_from_json(t));
    return forest;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("forest_from_json: malformed document: ") + e.what());
  }
}

}  // namespace dpfl
