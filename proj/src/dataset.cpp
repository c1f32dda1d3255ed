#include "iotguard/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "iotguard/errors.hpp"
#include "iotguard/numfmt.hpp"
#include "iotguard/rng.hpp"

namespace iotguard {

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::continuous: return "continuous";
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::binary: return "binary";
  }
  return "continuous";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "continuous") return FeatureKind::continuous;
  if (s == "categorical") return FeatureKind::categorical;
  if (s == "binary") return FeatureKind::binary;
  throw ParseError("unknown feature kind: " + s);
}

int DatasetSchema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

DatasetSchema kdd_schema() {
  using K = FeatureKind;
  DatasetSchema s;
  s.columns = {
      {"duration", K::continuous},
      {"protocol_type", K::categorical},
      {"service", K::categorical},
      {"flag", K::categorical},
      {"src_bytes", K::continuous},
      {"dst_bytes", K::continuous},
      {"land", K::binary},
      {"wrong_fragment", K::continuous},
      {"urgent", K::continuous},
      {"hot", K::continuous},
      {"num_failed_logins", K::continuous},
      {"logged_in", K::binary},
      {"num_compromised", K::continuous},
      {"root_shell", K::continuous},
      {"su_attempted", K::continuous},
      {"num_root", K::continuous},
      {"num_file_creations", K::continuous},
      {"num_shells", K::continuous},
      {"num_access_files", K::continuous},
      {"num_outbound_cmds", K::continuous},
      {"is_host_login", K::binary},
      {"is_guest_login", K::binary},
      {"count", K::continuous},
      {"srv_count", K::continuous},
      {"serror_rate", K::continuous},
      {"srv_serror_rate", K::continuous},
      {"rerror_rate", K::continuous},
      {"srv_rerror_rate", K::continuous},
      {"same_srv_rate", K::continuous},
      {"diff_srv_rate", K::continuous},
      {"srv_diff_host_rate", K::continuous},
      {"dst_host_count", K::continuous},
      {"dst_host_srv_count", K::continuous},
      {"dst_host_same_srv_rate", K::continuous},
      {"dst_host_diff_srv_rate", K::continuous},
      {"dst_host_same_src_port_rate", K::continuous},
      {"dst_host_srv_diff_host_rate", K::continuous},
      {"dst_host_serror_rate", K::continuous},
      {"dst_host_srv_serror_rate", K::continuous},
      {"dst_host_rerror_rate", K::continuous},
      {"dst_host_srv_rerror_rate", K::continuous},
  };
  return s;
}

DatasetSchema schema_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("schema file " + path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw ParseError("schema file must be a JSON array of {name, kind}");
  DatasetSchema s;
  for (const auto& item : j) {
    s.columns.push_back({item.at("name").get<std::string>(),
                         feature_kind_from_string(item.at("kind").get<std::string>())});
  }
  for (std::size_t i = 0; i < s.columns.size(); ++i) {
    for (std::size_t k = i + 1; k < s.columns.size(); ++k) {
      if (s.columns[i].name == s.columns[k].name) {
        throw ParseError("schema file: duplicate column name " + s.columns[i].name);
      }
    }
  }
  return s;
}

namespace {

std::string strip_trailing_period(const std::string& s) {
  if (!s.empty() && s.back() == '.') return s.substr(0, s.size() - 1);
  return s;
}

double parse_numeric_field(const std::string& field, std::int64_t line_no,
                           const std::string& column) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  double value = 0.0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric value '" + field +
                     "' in continuous column " + column);
  }
  return value;
}

}  // namespace

LabeledDataset load_kddcup(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path.string());
  return load_kddcup(in, schema, path.string());
}

LabeledDataset load_kddcup(std::istream& in, const DatasetSchema& schema,
                           const std::string& source_name) {
  const std::size_t n_cols = schema.columns.size();
  const std::size_t n_fields = n_cols + 1;

  // Working vocabularies: seeded from the schema, extended in encounter order.
  std::vector<std::vector<std::string>> vocab(n_cols);
  std::vector<std::map<std::string, std::int64_t>> vocab_index(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (schema.columns[c].kind != FeatureKind::categorical) continue;
    auto it = schema.vocabularies.find(schema.columns[c].name);
    if (it == schema.vocabularies.end()) continue;
    for (const auto& cat : it->second) {
      if (vocab_index[c].emplace(cat, static_cast<std::int64_t>(vocab[c].size())).second) {
        vocab[c].push_back(cat);
      }
    }
  }

  std::vector<double> cells;
  std::vector<int> labels;
  std::vector<std::string> raw_labels;

  std::string line;
  std::int64_t line_no = 0;
  std::vector<std::string> fields;
  fields.reserve(n_fields);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != n_fields) {
      throw ParseError(source_name + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n_fields) + " fields, got " + std::to_string(fields.size()));
    }

    for (std::size_t c = 0; c < n_cols; ++c) {
      if (schema.columns[c].kind == FeatureKind::categorical) {
        auto [it, inserted] =
            vocab_index[c].emplace(fields[c], static_cast<std::int64_t>(vocab[c].size()));
        if (inserted) vocab[c].push_back(fields[c]);
        cells.push_back(static_cast<double>(it->second));
      } else {
        cells.push_back(parse_numeric_field(fields[c], line_no, schema.columns[c].name));
      }
    }

    const std::string& raw = fields[n_cols];
    raw_labels.push_back(raw);
    labels.push_back(strip_trailing_period(raw) == "normal" ? 0 : 1);
  }

  // Canonicalize: sort each vocabulary and remap the stored indices.
  std::vector<std::vector<std::int64_t>> remap(n_cols);
  LabeledDataset ds;
  ds.schema = schema;
  ds.schema.vocabularies.clear();
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (schema.columns[c].kind != FeatureKind::categorical) continue;
    std::vector<std::string> sorted = vocab[c];
    std::sort(sorted.begin(), sorted.end());
    remap[c].resize(vocab[c].size());
    for (std::size_t i = 0; i < vocab[c].size(); ++i) {
      const auto pos = std::lower_bound(sorted.begin(), sorted.end(), vocab[c][i]);
      remap[c][i] = pos - sorted.begin();
    }
    ds.schema.vocabularies[schema.columns[c].name] = std::move(sorted);
  }

  const std::int64_t n_rows = static_cast<std::int64_t>(labels.size());
  ds.rows.resize(n_rows, static_cast<Eigen::Index>(n_cols));
  for (std::int64_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v = cells[static_cast<std::size_t>(r) * n_cols + c];
      if (schema.columns[c].kind == FeatureKind::categorical) {
        v = static_cast<double>(remap[c][static_cast<std::size_t>(v)]);
      }
      ds.rows(r, static_cast<Eigen::Index>(c)) = v;
    }
  }
  ds.labels = std::move(labels);
  ds.raw_labels = std::move(raw_labels);
  return ds;
}

std::string to_kdd_csv(const LabeledDataset& ds) {
  std::string out;
  const std::size_t n_cols = ds.schema.columns.size();
  for (std::int64_t r = 0; r < ds.row_count(); ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double v = ds.rows(r, static_cast<Eigen::Index>(c));
      if (ds.schema.columns[c].kind == FeatureKind::categorical) {
        const auto& vocab = ds.schema.vocabularies.at(ds.schema.columns[c].name);
        out += vocab.at(static_cast<std::size_t>(v));
      } else {
        out += format_csv(v);
      }
      out += ',';
    }
    out += ds.raw_labels[static_cast<std::size_t>(r)];
    out += '\n';
  }
  return out;
}

void save_kdd_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset file: " + path.string());
  out << to_kdd_csv(ds);
}

LabeledDataset select_rows(const LabeledDataset& ds, const std::vector<std::int64_t>& ids) {
  LabeledDataset out;
  out.schema = ds.schema;
  out.rows.resize(static_cast<Eigen::Index>(ids.size()), ds.rows.cols());
  out.labels.reserve(ids.size());
  out.raw_labels.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = ds.rows.row(ids[i]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(ids[i])]);
    out.raw_labels.push_back(ds.raw_labels[static_cast<std::size_t>(ids[i])]);
  }
  return out;
}

namespace {

// Largest-remainder apportionment of n_class rows over the fractions.
std::vector<std::int64_t> apportion(std::int64_t n, const std::vector<double>& fractions) {
  std::vector<std::int64_t> counts(fractions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    assigned += counts[i];
    remainders.push_back({exact - std::floor(exact), i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::int64_t k = 0; k < n - assigned; ++k) {
    counts[remainders[static_cast<std::size_t>(k) % remainders.size()].second] += 1;
  }
  return counts;
}

std::vector<std::vector<std::int64_t>> rows_by_class(const LabeledDataset& ds) {
  std::vector<std::vector<std::int64_t>> by_class(2);
  for (std::int64_t r = 0; r < ds.row_count(); ++r) {
    by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(r)])].push_back(r);
  }
  return by_class;
}

}  // namespace

DatasetSplits stratified_split(const LabeledDataset& ds, const SplitFractions& fractions,
                               std::uint64_t seed) {
  const std::vector<double> f = {fractions.train, fractions.val, fractions.test};
  double sum = 0.0;
  for (double v : f) {
    if (v <= 0.0) throw ConfigError("split fractions must be positive");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");

  Rng rng(seed);
  std::vector<std::vector<std::int64_t>> splits(3);
  for (auto& class_rows : rows_by_class(ds)) {
    if (class_rows.empty()) continue;
    if (static_cast<std::size_t>(class_rows.size()) < f.size()) {
      throw ConfigError("class with " + std::to_string(class_rows.size()) +
                        " rows cannot be split three ways");
    }
    rng.shuffle(class_rows);
    const auto counts = apportion(static_cast<std::int64_t>(class_rows.size()), f);
    std::size_t offset = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::int64_t k = 0; k < counts[s]; ++k) {
        splits[s].push_back(class_rows[offset++]);
      }
    }
  }
  for (auto& ids : splits) std::sort(ids.begin(), ids.end());
  return {select_rows(ds, splits[0]), select_rows(ds, splits[1]), select_rows(ds, splits[2])};
}

LabeledDataset subsample(const LabeledDataset& ds, std::int64_t n, std::uint64_t seed) {
  if (n > ds.row_count()) {
    throw ConfigError("subsample of " + std::to_string(n) + " rows exceeds dataset size " +
                      std::to_string(ds.row_count()));
  }
  if (n < 0) throw ConfigError("subsample size must be non-negative");
  if (n == 0) return select_rows(ds, {});

  auto by_class = rows_by_class(ds);
  std::vector<double> class_fractions;
  for (const auto& rows : by_class) {
    class_fractions.push_back(static_cast<double>(rows.size()) /
                              static_cast<double>(ds.row_count()));
  }
  const auto counts = apportion(n, class_fractions);

  Rng rng(seed);
  std::vector<std::int64_t> keep;
  for (std::size_t cls = 0; cls < by_class.size(); ++cls) {
    auto& rows = by_class[cls];
    rng.shuffle(rows);
    for (std::int64_t k = 0; k < counts[cls]; ++k) keep.push_back(rows[static_cast<std::size_t>(k)]);
  }
  std::sort(keep.begin(), keep.end());
  return select_rows(ds, keep);
}

}  // namespace iotguard
