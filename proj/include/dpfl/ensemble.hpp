#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpfl/dp_tree.hpp"
#include "dpfl/rng.hpp"
#include "dpfl/samples.hpp"

namespace dpfl {

/// A tree plus its provenance. (round, client_id, index) identifies a tree
/// uniquely inside one experiment.
struct TreeRecord {
  RegressionTree tree;
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  std::uint32_t index = 0;  // position among the trees a client sent in one round
  std::optional<double> validation_score;  // set by the server filter

  bool operator==(const TreeRecord&) const = default;
};

struct TreeId {
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  std::uint32_t index = 0;

  auto operator<=>(const TreeId&) const = default;
};

inline TreeId id_of(const TreeRecord& record) { return {record.client_id, record.round, record.index}; }

/// Bagged ensemble of regression trees.
///
/// Trees are kept sorted by (round, client_id, index) so that every reduction
/// over the forest runs in the same order no matter how trees arrived.
class Forest {
 public:
  explicit Forest(std::size_t feature_count);
  Forest(std::size_t feature_count, std::vector<TreeRecord> trees);

  void add(TreeRecord record);
  // Keeps only the newest `cap` trees in canonical order.
  void truncate_to_newest(std::size_t cap);

  std::size_t feature_count() const { return feature_count_; }
  std::size_t size() const { return trees_.size(); }
  bool empty() const { return trees_.empty(); }
  const std::vector<TreeRecord>& trees() const { return trees_; }

  bool operator==(const Forest&) const = default;

 private:
  std::size_t feature_count_;
  std::vector<TreeRecord> trees_;
};

// N rows drawn uniformly with replacement.
SampleMatrix bootstrap_sample(const SampleMatrix& samples, RngStream& rng);

// Unweighted mean of the tree predictions. Throws EmptyModel for an empty forest.
double predict_forest(const Forest& forest, std::span<const double> row);

std::vector<double> predict_forest_all(const Forest& forest, const SampleMatrix& samples);

// Mean of the per-tree MDI vectors, renormalized to sum 1 when non-zero.
std::vector<double> forest_mdi(const Forest& forest);

double mse_of_model(const Forest& model, const SampleMatrix& samples);

}  // namespace dpfl
