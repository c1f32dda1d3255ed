#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

namespace iotguard {

enum class FeatureKind { continuous, categorical, binary };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct SchemaColumn {
  std::string name;
  FeatureKind kind;
};

struct DatasetSchema {
  std::vector<SchemaColumn> columns;
  // Categorical column name -> categories, unique and sorted lexicographically.
  std::unordered_map<std::string, std::vector<std::string>> vocabularies;

  int column_index(const std::string& name) const;  // -1 if absent
};

// The canonical 41-column KDDCup99 connection-record schema.
DatasetSchema kdd_schema();

// Schema override file: JSON array of {"name": ..., "kind": ...} objects.
DatasetSchema schema_from_json_file(const std::filesystem::path& path);

// Parsed records. Continuous/binary cells hold the raw value, categorical
// cells hold the index into the schema vocabulary. Immutable by convention
// once built; safe to share across threads.
struct LabeledDataset {
  DatasetSchema schema;
  Eigen::MatrixXd rows;                 // row-major table, one column per feature
  std::vector<int> labels;              // 0 = normal, 1 = attack
  std::vector<std::string> raw_labels;  // original label text, as read

  std::int64_t row_count() const { return rows.rows(); }
};

// Streaming CSV load: 42 comma-separated fields per line (41 features + label),
// no header. Unseen categories extend the vocabulary; vocabularies are sorted
// and indices remapped once the whole file is read, so encodings are stable
// across runs. Label text is binarized after stripping one trailing period.
LabeledDataset load_kddcup(const std::filesystem::path& path, const DatasetSchema& schema);
LabeledDataset load_kddcup(std::istream& in, const DatasetSchema& schema,
                           const std::string& source_name = "<stream>");

void save_kdd_csv(const LabeledDataset& ds, const std::filesystem::path& path);
std::string to_kdd_csv(const LabeledDataset& ds);

// Per-class proportional split; permutation is a pure function of the seed.
struct SplitFractions {
  double train;
  double val;
  double test;
};

struct DatasetSplits {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

DatasetSplits stratified_split(const LabeledDataset& ds, const SplitFractions& fractions,
                               std::uint64_t seed);

// Label-stratified subsample of n rows, deterministic in the seed.
LabeledDataset subsample(const LabeledDataset& ds, std::int64_t n, std::uint64_t seed);

// Row selection helper shared by split/subsample and the pipelines.
LabeledDataset select_rows(const LabeledDataset& ds, const std::vector<std::int64_t>& ids);

}  // namespace iotguard
