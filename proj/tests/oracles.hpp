#pragma once

// Reference implementations used only by tests. They are written from the
// definitions, without calling into the library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Instance {
  std::vector<std::vector<double>> x;  // rows
  std::vector<double> y;
};

inline double sse(const std::vector<double>& v) {
  long double m = 0;
  for (double a : v) m += a;
  m /= static_cast<long double>(v.size());
  long double s = 0;
  for (double a : v) s += (a - m) * (a - m);
  return static_cast<double>(s);
}

// Normalized variance reduction from sums of squared errors.
inline double gain(const std::vector<double>& left, const std::vector<double>& right) {
  std::vector<double> all = left;
  all.insert(all.end(), right.begin(), right.end());
  const double parent = sse(all);
  return (parent - sse(left) - sse(right)) / parent;
}

inline std::vector<double> softmax(const std::vector<double>& a) {
  std::vector<long double> e(a.size());
  long double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(a[i]));
    total += e[i];
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<double>(e[i] / total);
  return out;
}

struct Split {
  std::size_t feature;
  double threshold;
  double gain;
};

// Exhaustive argmax: every (feature, distinct value) pair, strict '>' so the
// lowest feature, then lowest threshold, wins ties.
inline bool best_split(const Instance& inst, const std::vector<std::size_t>& rows, Split& out) {
  std::vector<double> ys;
  for (auto r : rows) ys.push_back(inst.y[r]);
  if (std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys.front(); })) return false;
  bool found = false;
  const std::size_t features = inst.x.front().size();
  for (std::size_t f = 0; f < features; ++f) {
    std::set<double> values;
    for (auto r : rows) values.insert(inst.x[r][f]);
    for (double t : values) {
      std::vector<double> left, right;
      for (auto r : rows) (inst.x[r][f] <= t ? left : right).push_back(inst.y[r]);
      if (left.empty() || right.empty()) continue;
      const double g = gain(left, right);
      if (!found || g > out.gain) {
        out = {f, t, g};
        found = true;
      }
    }
  }
  return found;
}

// Pre-order description of a greedy CART tree: "S f t" for splits, "L" for leaves.
inline void greedy_cart(const Instance& inst, const std::vector<std::size_t>& rows, int depth, int max_depth,
                        std::size_t min_split, std::size_t min_leaf, std::vector<std::string>& out) {
  Split s{};
  if (depth >= max_depth || rows.size() < min_split || !best_split(inst, rows, s)) {
    out.push_back("L");
    return;
  }
  std::vector<std::size_t> left, right;
  for (auto r : rows) (inst.x[r][s.feature] <= s.threshold ? left : right).push_back(r);
  if (left.size() < min_leaf || right.size() < min_leaf) {
    out.push_back("L");
    return;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "S %zu %.17g", s.feature, s.threshold);
  out.push_back(buf);
  greedy_cart(inst, left, depth + 1, max_depth, min_split, min_leaf, out);
  greedy_cart(inst, right, depth + 1, max_depth, min_split, min_leaf, out);
}

// Small self-contained generator (xorshift64*), independent of the library RNG.
struct Gen {
  std::uint64_t s;
  explicit Gen(std::uint64_t seed) : s(seed * 2654435761ULL + 88172645463325252ULL) {}
  std::uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 2685821657736338717ULL;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

inline Instance random_instance(std::uint64_t seed, std::size_t max_rows = 200, std::size_t max_features = 5) {
  Gen g(seed);
  const std::size_t n = 10 + g.below(max_rows - 9);
  const std::size_t f = 1 + g.below(max_features);
  Instance inst;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(f);
    for (std::size_t j = 0; j < f; ++j) {
      // Odd features are coarse so duplicates and shared partitions occur.
      row[j] = (j % 2 == 1) ? std::floor(g.uniform() * 6.0) : g.uniform();
    }
    inst.y.push_back(3.0 * row[0] + (f > 1 ? row[1] : 0.0) + g.uniform());
    inst.x.push_back(row);
  }
  return inst;
}

}  // namespace oracle
