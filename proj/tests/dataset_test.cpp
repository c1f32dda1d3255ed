#include "iotguard/dataset.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "iotguard/errors.hpp"
#include "iotguard/synthetic.hpp"

using namespace iotguard;

namespace {

// 42-field line: four leading fields as given, remaining numerics zero.
std::string kdd_line(const std::string& duration, const std::string& protocol,
                     const std::string& service, const std::string& flag,
                     const std::string& src_bytes, const std::string& dst_bytes,
                     const std::string& label) {
  std::string line = duration + "," + protocol + "," + service + "," + flag + "," + src_bytes +
                     "," + dst_bytes;
  for (int i = 0; i < 35; ++i) line += ",0";
  return line + "," + label;
}

LabeledDataset load_lines(const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  std::istringstream in(text);
  return load_kddcup(in, kdd_schema(), "<test>");
}

LabeledDataset two_class_dataset(int normals, int attacks) {
  std::vector<std::string> lines;
  int row = 0;
  for (int i = 0; i < normals; ++i) {
    lines.push_back(kdd_line("0", "tcp", "http", "SF", std::to_string(row++), "1", "normal."));
  }
  for (int i = 0; i < attacks; ++i) {
    lines.push_back(kdd_line("0", "icmp", "ecr_i", "SF", std::to_string(row++), "0", "smurf."));
  }
  return load_lines(lines);
}

}  // namespace

TEST(Schema, BuiltinKddHas41Columns) {
  const DatasetSchema s = kdd_schema();
  ASSERT_EQ(s.columns.size(), 41u);
  EXPECT_EQ(s.columns[0].name, "duration");
  EXPECT_EQ(s.columns[1].name, "protocol_type");
  EXPECT_EQ(s.columns[4].name, "src_bytes");
  EXPECT_EQ(s.columns[40].name, "dst_host_srv_rerror_rate");
  std::set<std::string> names;
  int categorical = 0;
  for (const auto& c : s.columns) {
    names.insert(c.name);
    if (c.kind == FeatureKind::categorical) ++categorical;
  }
  EXPECT_EQ(names.size(), 41u);
  EXPECT_EQ(categorical, 3);
}

TEST(Schema, OverrideFileRoundTrip) {
  const auto path = std::filesystem::path(::testing::TempDir()) / "schema_override.json";
  std::ofstream(path) << R"([{"name":"a","kind":"continuous"},
                             {"name":"b","kind":"categorical"},
                             {"name":"c","kind":"binary"}])";
  const DatasetSchema s = schema_from_json_file(path);
  ASSERT_EQ(s.columns.size(), 3u);
  EXPECT_EQ(s.columns[1].kind, FeatureKind::categorical);
  EXPECT_EQ(s.columns[2].kind, FeatureKind::binary);
}

TEST(Schema, OverrideRejectsDuplicates) {
  const auto path = std::filesystem::path(::testing::TempDir()) / "schema_dup.json";
  std::ofstream(path) << R"([{"name":"a","kind":"continuous"},{"name":"a","kind":"binary"}])";
  EXPECT_THROW(schema_from_json_file(path), ParseError);
}

TEST(LoadKddcup, ParsesNormalLine) {
  const auto ds = load_lines({kdd_line("0", "tcp", "http", "SF", "181", "5450", "normal.")});
  ASSERT_EQ(ds.row_count(), 1);
  EXPECT_EQ(ds.labels[0], 0);
  EXPECT_EQ(ds.raw_labels[0], "normal.");
  EXPECT_DOUBLE_EQ(ds.rows(0, 4), 181.0);
  EXPECT_DOUBLE_EQ(ds.rows(0, 5), 5450.0);
  const auto& vocab = ds.schema.vocabularies.at("protocol_type");
  EXPECT_EQ(vocab[static_cast<std::size_t>(ds.rows(0, 1))], "tcp");
}

TEST(LoadKddcup, AnyNonNormalLabelIsAttack) {
  const auto ds = load_lines({kdd_line("0", "tcp", "http", "SF", "1", "1", "smurf."),
                              kdd_line("0", "tcp", "http", "SF", "1", "1", "normal")});
  EXPECT_EQ(ds.labels[0], 1);
  EXPECT_EQ(ds.labels[1], 0);  // trailing period optional
}

TEST(LoadKddcup, WrongFieldCountNamesLine) {
  try {
    load_lines({kdd_line("0", "tcp", "http", "SF", "1", "1", "normal."),
                "0,tcp,http,SF,1"});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadKddcup, NonNumericContinuousFieldFails) {
  EXPECT_THROW(load_lines({kdd_line("0", "tcp", "http", "SF", "abc", "1", "normal.")}),
               ParseError);
}

TEST(LoadKddcup, VocabulariesSortedAndIndicesRemapped) {
  const auto ds = load_lines({
      kdd_line("0", "udp", "http", "SF", "1", "1", "normal."),
      kdd_line("0", "tcp", "http", "SF", "1", "1", "normal."),
      kdd_line("0", "icmp", "http", "SF", "1", "1", "normal."),
  });
  const auto& vocab = ds.schema.vocabularies.at("protocol_type");
  EXPECT_EQ(vocab, (std::vector<std::string>{"icmp", "tcp", "udp"}));
  EXPECT_DOUBLE_EQ(ds.rows(0, 1), 2.0);  // udp
  EXPECT_DOUBLE_EQ(ds.rows(1, 1), 1.0);  // tcp
  EXPECT_DOUBLE_EQ(ds.rows(2, 1), 0.0);  // icmp
}

TEST(LoadKddcup, BinarizationIsTotal) {
  const auto ds = generate_kdd_traffic({500, 3, 0.3});
  std::int64_t zeros = 0, ones = 0;
  for (int l : ds.labels) (l == 0 ? zeros : ones)++;
  EXPECT_EQ(zeros + ones, ds.row_count());
  EXPECT_GT(zeros, 0);
  EXPECT_GT(ones, 0);
}

TEST(LoadKddcup, CsvRoundTripIsIdentity) {
  const auto ds = generate_kdd_traffic({400, 11, 0.25});
  std::istringstream in(to_kdd_csv(ds));
  const auto back = load_kddcup(in, kdd_schema(), "<roundtrip>");
  ASSERT_EQ(back.row_count(), ds.row_count());
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.raw_labels, ds.raw_labels);
  EXPECT_EQ(back.schema.vocabularies, ds.schema.vocabularies);
  EXPECT_TRUE(back.rows.isApprox(ds.rows, 0.0));  // exact
}

TEST(StratifiedSplit, ExactProportionsOnDivisibleInput) {
  const auto ds = two_class_dataset(50, 50);
  const auto splits = stratified_split(ds, {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(splits.train.row_count(), 80);
  EXPECT_EQ(splits.val.row_count(), 10);
  EXPECT_EQ(splits.test.row_count(), 10);
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    std::int64_t normals = 0;
    for (int l : part->labels) normals += l == 0 ? 1 : 0;
    EXPECT_EQ(normals * 2, part->row_count());  // 50/50 preserved
  }
}

TEST(StratifiedSplit, DeterministicInSeed) {
  const auto ds = two_class_dataset(30, 20);
  const auto a = stratified_split(ds, {0.6, 0.2, 0.2}, 11);
  const auto b = stratified_split(ds, {0.6, 0.2, 0.2}, 11);
  EXPECT_TRUE(a.train.rows.isApprox(b.train.rows, 0.0));
  EXPECT_TRUE(a.val.rows.isApprox(b.val.rows, 0.0));
  EXPECT_TRUE(a.test.rows.isApprox(b.test.rows, 0.0));
}

TEST(StratifiedSplit, RejectsBadFractions) {
  const auto ds = two_class_dataset(10, 10);
  EXPECT_THROW(stratified_split(ds, {0.5, 0.5, 0.5}, 1), ConfigError);
  EXPECT_THROW(stratified_split(ds, {-0.2, 0.6, 0.6}, 1), ConfigError);
}

TEST(StratifiedSplit, RejectsClassSmallerThanSplitCount) {
  const auto ds = two_class_dataset(10, 2);
  EXPECT_THROW(stratified_split(ds, {0.8, 0.1, 0.1}, 1), ConfigError);
}

TEST(StratifiedSplit, DisjointAndExhaustive) {
  // src_bytes doubles as a unique row id.
  const auto ds = two_class_dataset(37, 23);
  const auto splits = stratified_split(ds, {0.5, 0.25, 0.25}, 3);
  std::multiset<double> seen;
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (std::int64_t r = 0; r < part->row_count(); ++r) seen.insert(part->rows(r, 4));
  }
  ASSERT_EQ(static_cast<std::int64_t>(seen.size()), ds.row_count());
  for (std::int64_t r = 0; r < ds.row_count(); ++r) {
    EXPECT_EQ(seen.count(ds.rows(r, 4)), 1u);
  }
}

TEST(Subsample, FullSizeKeepsEveryRow) {
  const auto ds = two_class_dataset(12, 8);
  const auto sub = subsample(ds, 20, 5);
  EXPECT_EQ(sub.row_count(), 20);
  std::multiset<double> a, b;
  for (std::int64_t r = 0; r < 20; ++r) {
    a.insert(ds.rows(r, 4));
    b.insert(sub.rows(r, 4));
  }
  EXPECT_EQ(a, b);
}

TEST(Subsample, ZeroRowsPreservesSchema) {
  const auto ds = two_class_dataset(5, 5);
  const auto sub = subsample(ds, 0, 5);
  EXPECT_EQ(sub.row_count(), 0);
  EXPECT_EQ(sub.schema.columns.size(), 41u);
  EXPECT_EQ(sub.schema.vocabularies, ds.schema.vocabularies);
}

TEST(Subsample, StratifiedWithinOneRow) {
  const auto ds = two_class_dataset(6000, 4000);
  const auto sub = subsample(ds, 1000, 9);
  std::int64_t normals = 0;
  for (int l : sub.labels) normals += l == 0 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(normals), 600.0, 1.0);
  EXPECT_EQ(sub.row_count(), 1000);
}

TEST(Subsample, RejectsOversizedRequest) {
  const auto ds = two_class_dataset(5, 5);
  EXPECT_THROW(subsample(ds, 11, 1), ConfigError);
}

TEST(Subsample, DeterministicInSeed) {
  const auto ds = two_class_dataset(50, 50);
  const auto a = subsample(ds, 30, 21);
  const auto b = subsample(ds, 30, 21);
  EXPECT_TRUE(a.rows.isApprox(b.rows, 0.0));
  EXPECT_EQ(a.labels, b.labels);
}
