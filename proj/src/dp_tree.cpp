#include "dpfl/dp_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpfl/errors.hpp"

namespace dpfl {

void PrivacyParams::validate() const {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw ContractViolation("PrivacyParams: sensitivity must be positive and finite");
  }
  if (dp_enabled && (!(epsilon > 0.0) || !std::isfinite(epsilon))) {
    throw ContractViolation("PrivacyParams: epsilon must be positive and finite when DP is enabled");
  }
}

void TreeHyperparams::validate() const {
  if (max_depth < 1) throw ContractViolation("TreeHyperparams: max_depth must be >= 1");
  if (min_samples_leaf < 1) throw ContractViolation("TreeHyperparams: min_samples_leaf must be >= 1");
  if (min_samples_split < 2 * min_samples_leaf) {
    throw ContractViolation("TreeHyperparams: min_samples_split must be >= 2 * min_samples_leaf");
  }
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, std::size_t feature_count, TreeHyperparams hyperparams,
                               PrivacyParams privacy, double epsilon_spent)
    : nodes_(std::move(nodes)),
      feature_count_(feature_count),
      hyperparams_(hyperparams),
      privacy_(privacy),
      epsilon_spent_(epsilon_spent) {
  if (nodes_.empty()) throw ContractViolation("RegressionTree: no nodes");
  if (feature_count_ == 0) throw ContractViolation("RegressionTree: feature_count must be >= 1");
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (node.right != TreeNode::kNoChild) throw ContractViolation("RegressionTree: leaf with a right child");
      continue;
    }
    // Pre-order layout: children come after their parent.
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
      throw ContractViolation("RegressionTree: bad child index at node " + std::to_string(i));
    }
    if (node.feature >= feature_count_) {
      throw ContractViolation("RegressionTree: split feature out of range at node " + std::to_string(i));
    }
  }
}

std::size_t RegressionTree::internal_node_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

int RegressionTree::depth() const {
  std::vector<int> depth_of(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& node = nodes_[i];
    deepest = std::max(deepest, depth_of[i]);
    if (!node.is_leaf()) {
      depth_of[static_cast<std::size_t>(node.left)] = depth_of[i] + 1;
      depth_of[static_cast<std::size_t>(node.right)] = depth_of[i] + 1;
    }
  }
  return deepest;
}

namespace {

bool all_equal(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
}

double mean_of(std::span<const double> values) {
  if (all_equal(values)) return values.front();
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct ChildStats {
  std::vector<double> left;
  std::vector<double> right;
};

ChildStats split_targets(std::span<const double> feature_column, std::span<const double> targets, double threshold) {
  ChildStats out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    (feature_column[i] <= threshold ? out.left : out.right).push_back(targets[i]);
  }
  return out;
}

}  // namespace

double node_impurity(std::span<const double> targets) {
  if (targets.empty()) throw ContractViolation("node_impurity: empty target sequence");
  if (all_equal(targets)) return 0.0;
  const double mean = mean_of(targets);
  double sum_sq = 0.0;
  for (double y : targets) sum_sq += (y - mean) * (y - mean);
  return sum_sq / static_cast<double>(targets.size());
}

double information_gain(std::span<const double> feature_column, std::span<const double> targets, double threshold) {
  if (feature_column.size() != targets.size()) {
    throw ContractViolation("information_gain: feature and target lengths differ");
  }
  if (targets.size() < 2) throw ContractViolation("information_gain: need at least two rows");
  const double parent = node_impurity(targets);
  if (parent == 0.0) throw ContractViolation("information_gain: parent node is pure");
  const ChildStats children = split_targets(feature_column, targets, threshold);
  if (children.left.empty() || children.right.empty()) {
    throw InvalidSplit("information_gain: threshold leaves a child empty");
  }
  const double n = static_cast<double>(targets.size());
  const double w_left = static_cast<double>(children.left.size()) / n;
  const double w_right = static_cast<double>(children.right.size()) / n;
  const double reduction = parent - w_left * node_impurity(children.left) - w_right * node_impurity(children.right);
  return std::clamp(reduction / parent, 0.0, 1.0);
}

std::vector<SplitCandidate> enumerate_candidates(const SampleMatrix& samples) {
  std::vector<SplitCandidate> out;
  if (samples.rows() < 2 || node_impurity(samples.targets()) == 0.0) return out;
  for (std::size_t f = 0; f < samples.feature_count(); ++f) {
    const std::vector<double> column = samples.column(f);
    std::vector<double> thresholds = column;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    // The largest unique value sends every row left.
    if (!thresholds.empty()) thresholds.pop_back();
    for (double t : thresholds) {
      out.push_back({f, t, information_gain(column, samples.targets(), t)});
    }
  }
  return out;
}

std::vector<double> exponential_weights(std::span<const SplitCandidate> candidates, const PrivacyParams& privacy) {
  if (candidates.empty()) throw ContractViolation("exponential_weights: no candidates");
  PrivacyParams checked = privacy;
  checked.dp_enabled = true;
  checked.validate();

  std::vector<double> exponents(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    exponents[i] = (privacy.epsilon * candidates[i].gain) / (2.0 * privacy.sensitivity);
  }
  const double top = *std::max_element(exponents.begin(), exponents.end());
  double total = 0.0;
  std::vector<double> probabilities(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    probabilities[i] = std::exp(exponents[i] - top);
    total += probabilities[i];
  }
  for (double& p : probabilities) p /= total;
  return probabilities;
}

std::size_t roulette_wheel_select(std::span<const double> probabilities, double u) {
  if (probabilities.empty()) throw ContractViolation("roulette_wheel_select: empty probability vector");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw ContractViolation("roulette_wheel_select: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("roulette_wheel_select: probabilities do not sum to 1");

  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (probabilities[i] > 0.0) last_positive = i;
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap above the final cumulative sum.
  return last_positive;
}

std::size_t roulette_wheel_select(std::span<const double> probabilities, RngStream& rng) {
  return roulette_wheel_select(probabilities, rng.uniform());
}

std::optional<SplitCandidate> select_split(std::span<const SplitCandidate> candidates, const PrivacyParams& privacy,
                                           RngStream& rng) {
  if (candidates.empty()) return std::nullopt;
  if (privacy.dp_enabled) {
    const std::vector<double> probabilities = exponential_weights(candidates, privacy);
    return candidates[roulette_wheel_select(probabilities, rng)];
  }
  // Candidates are ordered by (feature, threshold): the first maximum is the tie winner.
  const SplitCandidate* best = &candidates.front();
  for (const SplitCandidate& c : candidates) {
    if (c.gain > best->gain) best = &c;
  }
  return *best;
}

std::optional<SplitCandidate> best_split_with_dp(const SampleMatrix& samples, const PrivacyParams& privacy,
                                                 RngStream& rng) {
  const std::vector<SplitCandidate> candidates = enumerate_candidates(samples);
  return select_split(candidates, privacy, rng);
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const SampleMatrix& data, const TreeHyperparams& hp, const PrivacyParams& privacy, RngStream& rng)
      : data_(data), hp_(hp), privacy_(privacy), rng_(rng) {}

  std::vector<TreeNode> grow_all() {
    std::vector<std::size_t> rows(data_.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  std::vector<double> targets_of(const std::vector<std::size_t>& rows) const {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = data_.target(rows[i]);
    return out;
  }

  std::int32_t grow(const std::vector<std::size_t>& rows, int depth) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    const std::vector<double> targets = targets_of(rows);
    {
      TreeNode node;
      node.impurity = node_impurity(targets);
      node.weight = static_cast<double>(rows.size()) / static_cast<double>(data_.rows());
      node.samples = rows.size();
      nodes_.push_back(node);
    }

    std::optional<SplitCandidate> split;
    const bool splittable =
        depth < hp_.max_depth && rows.size() >= hp_.min_samples_split && nodes_.back().impurity > 0.0;
    if (splittable) split = best_split_with_dp(data_.select(rows), privacy_, rng_);

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    if (split) {
      for (std::size_t r : rows) {
        (data_.value(r, split->feature_index) <= split->threshold ? left_rows : right_rows).push_back(r);
      }
      if (left_rows.size() < hp_.min_samples_leaf || right_rows.size() < hp_.min_samples_leaf) split.reset();
    }

    if (!split) {
      nodes_[static_cast<std::size_t>(index)].prediction = mean_of(targets);
      return index;
    }

    const double n = static_cast<double>(rows.size());
    const double impurity_left = node_impurity(targets_of(left_rows));
    const double impurity_right = node_impurity(targets_of(right_rows));
    {
      TreeNode& node = nodes_[static_cast<std::size_t>(index)];
      node.feature = split->feature_index;
      node.threshold = split->threshold;
      node.gain_raw = std::max(0.0, node.impurity - static_cast<double>(left_rows.size()) / n * impurity_left -
                                        static_cast<double>(right_rows.size()) / n * impurity_right);
    }
    const std::int32_t left = grow(left_rows, depth + 1);
    const std::int32_t right = grow(right_rows, depth + 1);
    nodes_[static_cast<std::size_t>(index)].left = left;
    nodes_[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  const SampleMatrix& data_;
  const TreeHyperparams& hp_;
  const PrivacyParams& privacy_;
  RngStream& rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(const SampleMatrix& samples, const TreeHyperparams& hyperparams,
                        const PrivacyParams& privacy, RngStream& rng) {
  hyperparams.validate();
  privacy.validate();
  std::vector<TreeNode> nodes = TreeGrower(samples, hyperparams, privacy, rng).grow_all();
  const auto internal =
      static_cast<double>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
  const double spent = privacy.dp_enabled ? privacy.epsilon * internal : 0.0;
  return RegressionTree(std::move(nodes), samples.feature_count(), hyperparams, privacy, spent);
}

double predict_tree(const RegressionTree& tree, std::span<const double> row) {
  if (row.size() != tree.feature_count()) {
    throw ContractViolation("predict_tree: row has " + std::to_string(row.size()) + " values, tree expects " +
                            std::to_string(tree.feature_count()));
  }
  const auto& nodes = tree.nodes();
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& node = nodes[i];
    i = static_cast<std::size_t>(row[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes[i].prediction;
}

std::vector<double> tree_mdi(const RegressionTree& tree) {
  std::vector<double> importance(tree.feature_count(), 0.0);
  for (const TreeNode& node : tree.nodes()) {
    if (!node.is_leaf()) importance[node.feature] += node.weight * node.gain_raw;
  }
  double total = 0.0;
  for (double v : importance) total += v;
  if (total > 0.0) {
    for (double& v : importance) v /= total;
  }
  return importance;
}

}  // namespace dpfl
