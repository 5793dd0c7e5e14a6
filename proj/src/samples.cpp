#include "dpfl/samples.hpp"

#include <cmath>
#include <string>

#include "dpfl/errors.hpp"

namespace dpfl {

SampleMatrix::SampleMatrix(std::vector<double> features, std::vector<double> targets, std::size_t feature_count)
    : features_(std::move(features)), targets_(std::move(targets)), feature_count_(feature_count) {
  if (feature_count_ == 0) throw ContractViolation("SampleMatrix: feature_count must be >= 1");
  if (targets_.empty()) throw ContractViolation("SampleMatrix: at least one row is required");
  if (features_.size() != targets_.size() * feature_count_) {
    throw ContractViolation("SampleMatrix: feature buffer has " + std::to_string(features_.size()) +
                            " values, expected " + std::to_string(targets_.size() * feature_count_));
  }
  for (double v : features_) {
    if (!std::isfinite(v)) throw ContractViolation("SampleMatrix: non-finite feature value");
  }
  for (double v : targets_) {
    if (!std::isfinite(v)) throw ContractViolation("SampleMatrix: non-finite target value");
  }
}

std::vector<double> SampleMatrix::column(std::size_t feature) const {
  if (feature >= feature_count_) throw ContractViolation("SampleMatrix::column: feature index out of range");
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = value(i, feature);
  return out;
}

SampleMatrix SampleMatrix::select(std::span<const std::size_t> rows) const {
  std::vector<double> features;
  std::vector<double> targets;
  features.reserve(rows.size() * feature_count_);
  targets.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= this->rows()) throw ContractViolation("SampleMatrix::select: row index out of range");
    auto src = row(r);
    features.insert(features.end(), src.begin(), src.end());
    targets.push_back(targets_[r]);
  }
  return SampleMatrix(std::move(features), std::move(targets), feature_count_);
}

}  // namespace dpfl
