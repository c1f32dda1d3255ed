#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "iotguard/dataset.hpp"
#include "iotguard/transforms.hpp"

namespace iotguard {

struct ColumnStats {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  double variance = 0.0;
  double sparsity = 0.0;  // fraction of exactly-zero entries
  std::int64_t cardinality = 0;
  // (other column, Pearson r) with |r| > 0.5, descending by |r|.
  std::vector<std::pair<std::string, double>> top_correlations;
};

struct FeatureStats {
  std::vector<ColumnStats> columns;
  std::int64_t rows = 0;
};

struct AdvisorThresholds {
  double low_variance_cutoff = 1e-6;
  double high_correlation_cutoff = 0.95;
  double sparsity_cutoff = 0.9;
};

// Population variance, zero-fraction sparsity, distinct-value cardinality, and
// Pearson correlations over continuous column pairs (r is 0 when either
// column is constant). Computed on the training split only.
FeatureStats compute_feature_stats(const FeatureMatrix& m, const std::vector<FeatureKind>& kinds);
FeatureStats compute_feature_stats(const LabeledDataset& ds);

// Deterministic plan: drop low-variance columns, merge-average transitive
// groups of highly correlated continuous columns, binarize sparse continuous
// columns, one-hot categoricals, then min-max everything still continuous.
PreprocessPlan heuristic_advise(const FeatureStats& stats, const AdvisorThresholds& t);

// Stats table + step vocabulary + the JSON schema the reply must follow.
std::string build_advisor_prompt(const FeatureStats& stats);

// Extracts the first fenced JSON block, validates it against the plan schema
// and the known columns, and stamps provenance = llm.
PreprocessPlan parse_advisor_response(const std::string& text,
                                      const std::vector<std::string>& known_columns,
                                      const std::vector<std::string>& categorical_columns = {});

nlohmann::json stats_to_json(const FeatureStats& stats);

}  // namespace iotguard
