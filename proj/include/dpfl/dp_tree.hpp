#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpfl/rng.hpp"
#include "dpfl/samples.hpp"

namespace dpfl {

/// Budget for the exponential mechanism used at every split.
///
/// epsilon is spent once per internal node. sensitivity is the sensitivity of
/// the split score; the score is a normalized gain in [0, 1], so 1 is the
/// natural value and the default.
struct PrivacyParams {
  double epsilon = 1.0;
  double sensitivity = 1.0;
  bool dp_enabled = false;

  static PrivacyParams disabled(double sensitivity = 1.0) { return {1.0, sensitivity, false}; }
  static PrivacyParams with_epsilon(double epsilon, double sensitivity = 1.0) { return {epsilon, sensitivity, true}; }

  void validate() const;
  bool operator==(const PrivacyParams&) const = default;
};

struct SplitCandidate {
  std::size_t feature_index = 0;
  double threshold = 0.0;  // rows with value <= threshold go left
  double gain = 0.0;       // normalized variance reduction, in [0, 1]

  bool operator==(const SplitCandidate&) const = default;
};

struct TreeHyperparams {
  int max_depth = 8;
  std::size_t min_samples_split = 4;
  std::size_t min_samples_leaf = 2;

  void validate() const;
  bool operator==(const TreeHyperparams&) const = default;
};

/// Node of a RegressionTree. Nodes live in a flat vector in depth-first
/// (pre-)order, left subtree first; leaves have no children.
struct TreeNode {
  static constexpr std::int32_t kNoChild = -1;

  std::int32_t left = kNoChild;
  std::int32_t right = kNoChild;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;   // population variance of the targets reaching the node
  double weight = 1.0;     // fraction of training rows reaching the node
  double gain_raw = 0.0;   // impurity - wL * impurity(left) - wR * impurity(right), internal only
  double prediction = 0.0; // leaf only
  std::size_t samples = 0;

  bool is_leaf() const { return left == kNoChild; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree(std::vector<TreeNode> nodes, std::size_t feature_count, TreeHyperparams hyperparams,
                 PrivacyParams privacy, double epsilon_spent);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t feature_count() const { return feature_count_; }
  const TreeHyperparams& hyperparams() const { return hyperparams_; }
  const PrivacyParams& privacy() const { return privacy_; }
  double epsilon_spent() const { return epsilon_spent_; }

  std::size_t internal_node_count() const;
  std::size_t leaf_count() const { return nodes_.size() - internal_node_count(); }
  int depth() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t feature_count_;
  TreeHyperparams hyperparams_;
  PrivacyParams privacy_;
  double epsilon_spent_;
};

// Population variance mean((y - mean(y))^2). Exactly 0 when all values are equal.
double node_impurity(std::span<const double> targets);

// Normalized variance reduction of the split (value <= threshold -> left).
// Throws InvalidSplit if a child is empty and ContractViolation if the parent
// is pure.
double information_gain(std::span<const double> feature_column, std::span<const double> targets, double threshold);

// One candidate per (feature, unique value) with two non-empty children,
// ordered by feature then threshold.
std::vector<SplitCandidate> enumerate_candidates(const SampleMatrix& samples);

// Exponential-mechanism probabilities, proportional to
// exp(epsilon * gain / (2 * sensitivity)). Max-shifted before exponentiation.
std::vector<double> exponential_weights(std::span<const SplitCandidate> candidates, const PrivacyParams& privacy);

// Inverse-CDF scan for a given uniform draw u in [0, 1).
std::size_t roulette_wheel_select(std::span<const double> probabilities, double u);
// Consumes exactly one uniform draw.
std::size_t roulette_wheel_select(std::span<const double> probabilities, RngStream& rng);

// Picks one of the candidates: sampled via the exponential mechanism when DP
// is on, otherwise the first maximum-gain candidate (no rng use).
std::optional<SplitCandidate> select_split(std::span<const SplitCandidate> candidates, const PrivacyParams& privacy,
                                           RngStream& rng);

// Split chooser used during tree growth. std::nullopt means no valid split
// (pure node or no threshold leaving both children non-empty).
std::optional<SplitCandidate> best_split_with_dp(const SampleMatrix& samples, const PrivacyParams& privacy,
                                                 RngStream& rng);

RegressionTree fit_tree(const SampleMatrix& samples, const TreeHyperparams& hyperparams,
                        const PrivacyParams& privacy, RngStream& rng);

double predict_tree(const RegressionTree& tree, std::span<const double> row);

// Mean-decrease-in-impurity per feature, normalized to sum 1 (all zeros for a
// single-leaf tree).
std::vector<double> tree_mdi(const RegressionTree& tree);

}  // namespace dpfl
