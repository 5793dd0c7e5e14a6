#include "dpfl/ensemble.hpp"

#include <algorithm>
#include <tuple>

#include "dpfl/errors.hpp"
#include "dpfl/metrics.hpp"

namespace dpfl {

namespace {

bool canonical_less(const TreeRecord& a, const TreeRecord& b) {
  return std::tie(a.round, a.client_id, a.index) < std::tie(b.round, b.client_id, b.index);
}

}  // namespace

Forest::Forest(std::size_t feature_count) : feature_count_(feature_count) {
  if (feature_count_ == 0) throw ContractViolation("Forest: feature_count must be >= 1");
}

Forest::Forest(std::size_t feature_count, std::vector<TreeRecord> trees) : Forest(feature_count) {
  for (auto& record : trees) add(std::move(record));
}

void Forest::add(TreeRecord record) {
  if (record.tree.feature_count() != feature_count_) {
    throw ContractViolation("Forest::add: tree feature_count does not match the forest");
  }
  auto pos = std::upper_bound(trees_.begin(), trees_.end(), record, canonical_less);
  trees_.insert(pos, std::move(record));
}

void Forest::truncate_to_newest(std::size_t cap) {
  if (trees_.size() > cap) {
    trees_.erase(trees_.begin(), trees_.begin() + static_cast<std::ptrdiff_t>(trees_.size() - cap));
  }
}

SampleMatrix bootstrap_sample(const SampleMatrix& samples, RngStream& rng) {
  std::vector<std::size_t> rows(samples.rows());
  for (auto& r : rows) r = rng.uniform_index(samples.rows());
  return samples.select(rows);
}

double predict_forest(const Forest& forest, std::span<const double> row) {
  if (forest.empty()) throw EmptyModel("predict_forest: forest has no trees");
  double sum = 0.0;
  for (const auto& record : forest.trees()) sum += predict_tree(record.tree, row);
  return sum / static_cast<double>(forest.size());
}

std::vector<double> predict_forest_all(const Forest& forest, const SampleMatrix& samples) {
  std::vector<double> out(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) out[i] = predict_forest(forest, samples.row(i));
  return out;
}

std::vector<double> forest_mdi(const Forest& forest) {
  if (forest.empty()) throw EmptyModel("forest_mdi: forest has no trees");
  std::vector<double> mean(forest.feature_count(), 0.0);
  for (const auto& record : forest.trees()) {
    const std::vector<double> importance = tree_mdi(record.tree);
    for (std::size_t f = 0; f < mean.size(); ++f) mean[f] += importance[f];
  }
  double total = 0.0;
  for (double& v : mean) {
    v /= static_cast<double>(forest.size());
    total += v;
  }
  if (total > 0.0) {
    for (double& v : mean) v /= total;
  }
  return mean;
}

double mse_of_model(const Forest& model, const SampleMatrix& samples) {
  return mse(predict_forest_all(model, samples), samples.targets());
}

}  // namespace dpfl
