#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace dpfl {

// Mean of (p - a)^2. Throws ContractViolation on empty or mismatched input.
double mse(std::span<const double> predicted, std::span<const double> actual);

// Pearson correlation, or std::nullopt when either input is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// 1 - mse / variance(actual). Throws ContractViolation when actual is constant.
double r_squared(std::span<const double> predicted, std::span<const double> actual);

// Shannon entropy (nats) of the normalized importance vector; 0 for all-zero input.
double mdi_entropy(std::span<const double> mdi);

// Index of the largest entry (lowest index on ties).
std::size_t mdi_top_feature(std::span<const double> mdi);

struct MetricReport {
  double mse = 0.0;
  std::optional<double> pearson;
  double r_squared = 0.0;
  double mdi_entropy = 0.0;
  std::size_t mdi_top_feature = 0;
};

MetricReport evaluate(std::span<const double> predicted, std::span<const double> actual, std::span<const double> mdi);

}  // namespace dpfl
