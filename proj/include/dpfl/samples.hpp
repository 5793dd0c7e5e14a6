#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dpfl {

/// N x F feature matrix (row-major) paired with N targets.
///
/// Construction validates N >= 1, F >= 1, matching sizes and that every value
/// is finite; a SampleMatrix is therefore always usable for training.
class SampleMatrix {
 public:
  SampleMatrix(std::vector<double> features, std::vector<double> targets, std::size_t feature_count);

  std::size_t rows() const { return targets_.size(); }
  std::size_t feature_count() const { return feature_count_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * feature_count_, feature_count_};
  }
  double value(std::size_t i, std::size_t feature) const { return features_[i * feature_count_ + feature]; }
  double target(std::size_t i) const { return targets_[i]; }
  std::span<const double> targets() const { return targets_; }
  std::span<const double> features() const { return features_; }

  std::vector<double> column(std::size_t feature) const;

  // Rows in the given order (duplicates allowed).
  SampleMatrix select(std::span<const std::size_t> rows) const;

  bool operator==(const SampleMatrix&) const = default;

 private:
  std::vector<double> features_;
  std::vector<double> targets_;
  std::size_t feature_count_;
};

}  // namespace dpfl
