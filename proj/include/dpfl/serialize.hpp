#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "dpfl/dp_tree.hpp"
#include "dpfl/ensemble.hpp"

namespace dpfl {

// Tree document:
//   {"feature_count": F, "hyperparams": {...}, "privacy": {"epsilon": e|null, "sensitivity": s},
//    "epsilon_spent": r, "root": node}
// where node is {"type":"internal", "feature", "threshold", "impurity", "weight", "gain_raw",
// "samples", "left", "right"} or {"type":"leaf", "prediction", "weight", "impurity", "samples"}.
// Doubles are written with the shortest representation that round-trips.
nlohmann::json tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& doc);

nlohmann::json record_to_json(const TreeRecord& record);
TreeRecord record_from_json(const nlohmann::json& doc);

nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& doc);

}  // namespace dpfl
