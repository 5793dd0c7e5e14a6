#include "dpfl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, std::size_t min_len, const char* who) {
  if (a.size() != b.size()) throw ContractViolation(std::string(who) + ": length mismatch");
  if (a.size() < min_len) throw ContractViolation(std::string(who) + ": input too short");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double mse(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual, 1, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    s += d * d;
  }
  return s / static_cast<double>(predicted.size());
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2, "pearson");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  // sqrt(s*s) == s exactly in IEEE arithmetic, so r(x, x) and r(x, -x) come out
  // as exactly +-1. Split the root only when the product would overflow.
  const double prod = sxx * syy;
  const double denom = std::isfinite(prod) ? std::sqrt(prod) : std::sqrt(sxx) * std::sqrt(syy);
  return std::clamp(sxy / denom, -1.0, 1.0);
}

double r_squared(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual, 2, "r_squared");
  const double m = mean_of(actual);
  double var = 0.0;
  for (double a : actual) var += (a - m) * (a - m);
  var /= static_cast<double>(actual.size());
  if (var == 0.0) throw ContractViolation("r_squared: actual values are constant");
  return 1.0 - mse(predicted, actual) / var;
}

double mdi_entropy(std::span<const double> mdi) {
  double total = 0.0;
  for (double v : mdi) {
    if (!(v >= 0.0)) throw ContractViolation("mdi_entropy: negative importance");
    total += v;
  }
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (double v : mdi) {
    if (v > 0.0) {
      const double p = v / total;
      h -= p * std::log(p);
    }
  }
  return std::max(h, 0.0);
}

std::size_t mdi_top_feature(std::span<const double> mdi) {
  if (mdi.empty()) throw ContractViolation("mdi_top_feature: empty vector");
  return static_cast<std::size_t>(std::max_element(mdi.begin(), mdi.end()) - mdi.begin());
}

MetricReport evaluate(std::span<const double> predicted, std::span<const double> actual, std::span<const double> mdi) {
  MetricReport r;
  r.mse = mse(predicted, actual);
  r.pearson = pearson(predicted, actual);
  r.r_squared = r_squared(predicted, actual);
  r.mdi_entropy = mdi_entropy(mdi);
  r.mdi_top_feature = mdi_top_feature(mdi);
  return r;
}

}  // namespace dpfl
