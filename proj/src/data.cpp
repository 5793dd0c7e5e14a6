#include "dpfl/data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>

#include "dpfl/errors.hpp"
#include "dpfl/rng.hpp"

namespace dpfl {

SampleMatrix Dataset::samples() const { return SampleMatrix(features, targets, feature_count()); }

Dataset Dataset::select(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.target_name = target_name;
  const std::size_t f = feature_count();
  out.features.reserve(rows.size() * f);
  out.targets.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= this->rows()) throw ContractViolation("Dataset::select: row index out of range");
    out.features.insert(out.features.end(), features.begin() + static_cast<std::ptrdiff_t>(r * f),
                        features.begin() + static_cast<std::ptrdiff_t>((r + 1) * f));
    out.targets.push_back(targets[r]);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// RFC-4180 style: quoted fields may contain the delimiter and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::string(trim(field)));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::string(trim(field)));
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct DateParts {
  double hour_of_day;
  double day_of_week;
};

std::optional<DateParts> parse_timestamp(std::string_view s) {
  s = trim(s);
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  const std::string text(s);
  char sep = 0;
  int consumed = 0;
  const int n = std::sscanf(text.c_str(), "%d-%u-%u%c%u:%u%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
  if (n < 6 || (sep != ' ' && sep != 'T')) return std::nullopt;
  std::string_view rest = std::string_view(text).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    if (std::sscanf(std::string(rest).c_str(), ":%u", &sec) != 1) return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  const std::chrono::weekday wd{std::chrono::sys_days{ymd}};
  return DateParts{static_cast<double>(h) + mi / 60.0 + sec / 3600.0, static_cast<double>(wd.iso_encoding() - 1)};
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

enum class ColumnKind { kNumeric, kDate, kTarget, kDropped };

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError("load_csv: " + path.string() + " is empty");
  const std::vector<std::string> header = split_csv_line(line, options.delimiter);
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (!seen.insert(h).second) throw DataError("load_csv: duplicate column name '" + h + "'");
    }
  }

  std::vector<std::vector<std::string>> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto row = split_csv_line(line, options.delimiter);
    if (row.size() != header.size()) {
      throw DataError("load_csv: line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    cells.push_back(std::move(row));
  }
  if (cells.empty()) throw DataError("load_csv: " + path.string() + " has a header but no data rows");

  auto contains = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  std::vector<ColumnKind> kinds(header.size(), ColumnKind::kNumeric);
  bool have_target = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == options.target_column) {
      kinds[c] = ColumnKind::kTarget;
      have_target = true;
    } else if (contains(options.drop_columns, header[c])) {
      kinds[c] = ColumnKind::kDropped;
    } else if (contains(options.date_columns, header[c])) {
      kinds[c] = ColumnKind::kDate;
    } else {
      const bool any_numeric =
          std::any_of(cells.begin(), cells.end(), [&](const auto& row) { return parse_number(row[c]).has_value(); });
      if (!any_numeric) kinds[c] = ColumnKind::kDropped;
    }
  }
  if (!have_target) throw DataError("load_csv: target column '" + options.target_column + "' not found");

  Dataset ds;
  ds.target_name = options.target_column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (kinds[c] == ColumnKind::kNumeric) {
      ds.feature_names.push_back(header[c]);
    } else if (kinds[c] == ColumnKind::kDate) {
      ds.feature_names.push_back(header[c] + "_hour");
      ds.feature_names.push_back(header[c] + "_dow");
    }
  }
  if (ds.feature_names.empty()) throw DataError("load_csv: no usable feature columns");

  std::vector<double> row_values;
  for (const auto& row : cells) {
    row_values.clear();
    std::optional<double> target;
    bool ok = true;
    for (std::size_t c = 0; c < header.size() && ok; ++c) {
      switch (kinds[c]) {
        case ColumnKind::kDropped:
          break;
        case ColumnKind::kTarget:
          target = parse_number(row[c]);
          ok = target.has_value();
          break;
        case ColumnKind::kNumeric: {
          auto v = parse_number(row[c]);
          ok = v.has_value();
          if (ok) row_values.push_back(*v);
          break;
        }
        case ColumnKind::kDate: {
          auto parts = parse_timestamp(row[c]);
          ok = parts.has_value();
          if (ok) {
            row_values.push_back(parts->hour_of_day);
            row_values.push_back(parts->day_of_week);
          }
          break;
        }
      }
    }
    if (!ok) {
      ++ds.dropped_rows;
      continue;
    }
    ds.features.insert(ds.features.end(), row_values.begin(), row_values.end());
    ds.targets.push_back(*target);
  }
  if (ds.targets.empty()) {
    throw DataError("load_csv: all " + std::to_string(cells.size()) + " data rows were dropped as unparseable");
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_csv: cannot open " + path.string() + " for writing");
  for (const auto& name : ds.feature_names) out << name << ',';
  out << ds.target_name << '\n';
  const std::size_t f = ds.feature_count();
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < f; ++c) out << format_double(ds.features[r * f + c]) << ',';
    out << format_double(ds.targets[r]) << '\n';
  }
  if (!out) throw DataError("write_csv: write to " + path.string() + " failed");
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  RngStream rng(seed);
  // Fisher-Yates; std::shuffle's draw pattern is implementation-defined.
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  return idx;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ContractViolation("train_test_split: train_fraction must be in (0, 1)");
  }
  const std::vector<std::size_t> idx = shuffled_indices(ds.rows(), seed);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(ds.rows()) * train_fraction));
  const std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return {ds.select(train), ds.select(test)};
}

std::vector<Dataset> partition_clients(const Dataset& train, const PartitionPlan& plan) {
  if (plan.num_clients == 0) throw ContractViolation("partition_clients: num_clients must be positive");
  if (plan.num_clients > train.rows()) {
    throw ContractViolation("partition_clients: " + std::to_string(plan.num_clients) + " clients but only " +
                            std::to_string(train.rows()) + " training rows");
  }
  std::vector<Dataset> out;
  out.reserve(plan.num_clients);
  if (plan.mode == PartitionMode::kDisjointChunks) {
    const std::vector<std::size_t> idx = shuffled_indices(train.rows(), plan.general_seed);
    const std::size_t base = train.rows() / plan.num_clients;
    const std::size_t extra = train.rows() % plan.num_clients;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < plan.num_clients; ++c) {
      const std::size_t len = base + (c < extra ? 1 : 0);
      out.push_back(train.select({idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                  idx.begin() + static_cast<std::ptrdiff_t>(begin + len)}));
      begin += len;
    }
  } else {
    const std::size_t per_client = train.rows() / plan.num_clients;
    for (std::size_t c = 0; c < plan.num_clients; ++c) {
      RngStream rng(plan.general_seed + plan.first_client_id + c);
      std::vector<std::size_t> rows(per_client);
      for (auto& r : rows) r = rng.uniform_index(train.rows());
      out.push_back(train.select(rows));
    }
  }
  return out;
}

Dataset synth_dataset(const SynthParams& params) {
  if (params.features < 2) throw ContractViolation("synth_dataset: need at least 2 features");
  if (params.rows < 1) throw ContractViolation("synth_dataset: need at least 1 row");
  if (!(params.dominant_feature_weight >= 1.0)) {
    throw ContractViolation("synth_dataset: dominant_feature_weight must be >= 1");
  }
  if (!(params.noise_sd >= 0.0)) throw ContractViolation("synth_dataset: noise_sd must be >= 0");
  if (!(params.correlation >= 0.0 && params.correlation < 1.0)) {
    throw ContractViolation("synth_dataset: correlation must be in [0, 1)");
  }

  const double w0 = params.dominant_feature_weight;
  RngStream rng(params.seed);
  Dataset ds;
  ds.target_name = "y";
  for (std::size_t f = 0; f < params.features; ++f) ds.feature_names.push_back("x" + std::to_string(f));
  ds.features.reserve(params.rows * params.features);
  ds.targets.reserve(params.rows);

  for (std::size_t r = 0; r < params.rows; ++r) {
    const std::size_t offset = ds.features.size();
    if (params.correlation == 0.0) {
      for (std::size_t f = 0; f < params.features; ++f) ds.features.push_back(rng.uniform());
    } else {
      const double rho = params.correlation;
      const double latent = rng.normal();
      ds.features.push_back(normal_cdf(latent));
      for (std::size_t f = 1; f < params.features; ++f) {
        ds.features.push_back(normal_cdf(rho * latent + std::sqrt(1.0 - rho * rho) * rng.normal()));
      }
    }
    const double* x = ds.features.data() + offset;
    double y = w0 * x[0];
    if (params.minor_terms) {
      for (std::size_t f = 1; f < params.features; ++f) y += w0 / static_cast<double>(5 + f) * x[f];
    }
    if (params.step_terms) {
      y += x[1] > 0.5 ? w0 / 5.0 : 0.0;
      if (params.features > 2) y += x[2] > 0.3 ? w0 / 8.0 : 0.0;
    }
    if (params.noise_sd > 0.0) y += params.noise_sd * rng.normal();
    ds.targets.push_back(y);
  }
  return ds;
}

}  // namespace dpfl
