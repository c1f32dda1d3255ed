#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <unordered_map>
#include <vector>

#include "iotguard/dataset.hpp"

namespace iotguard {

// Numeric feature table. Columns that still hold categorical vocabulary
// indices keep their category list in categorical_vocab until a one_hot step
// expands them.
struct FeatureMatrix {
  std::vector<std::string> column_names;
  Eigen::MatrixXd values;  // rows x cols
  std::unordered_map<std::string, std::vector<std::string>> categorical_vocab;

  std::int64_t row_count() const { return values.rows(); }
  std::int64_t col_count() const { return values.cols(); }
  int column_index(const std::string& name) const;       // -1 if absent
  int require_column(const std::string& name) const;     // throws ParseError
};

FeatureMatrix to_feature_matrix(const LabeledDataset& ds);

struct MinMaxScaler {
  std::vector<std::string> columns;
  std::vector<double> min;
  std::vector<double> max;
};

MinMaxScaler fit_minmax(const FeatureMatrix& m, const std::vector<std::string>& columns);

// v' = (v - min) / (max - min); constant columns map to 0; out-of-range values
// clip to [0, 1]. Columns not covered by the scaler pass through.
FeatureMatrix apply_minmax(const FeatureMatrix& m, const MinMaxScaler& s);

struct OneHotEncoder {
  // (categorical column, fitted vocabulary), in schema column order.
  std::vector<std::pair<std::string, std::vector<std::string>>> columns;
};

OneHotEncoder fit_onehot(const LabeledDataset& ds);

// Expands each categorical column in place into "<col>_<category>" indicator
// columns. Categories missing from the fitted vocabulary encode as all-zero
// slices; when unknown_categories is non-null the count is accumulated there.
FeatureMatrix apply_onehot(const LabeledDataset& ds, const OneHotEncoder& enc,
                           std::int64_t* unknown_categories = nullptr);

struct TransformStep {
  enum class Op { drop, binarize, merge_average, one_hot, min_max };
  Op op;
  std::string column;                // drop, binarize, one_hot
  double threshold = 0.0;            // binarize
  std::vector<std::string> columns;  // merge_average, min_max
  std::string new_name;              // merge_average
};

TransformStep drop_step(std::string column);
TransformStep binarize_step(std::string column, double threshold = 0.0);
TransformStep merge_average_step(std::vector<std::string> columns, std::string new_name);
TransformStep one_hot_step(std::string column);
TransformStep min_max_step(std::vector<std::string> columns);

struct PreprocessPlan {
  enum class Provenance { heuristic, llm, manual };
  std::vector<TransformStep> steps;
  Provenance provenance = Provenance::manual;
};

nlohmann::json plan_to_json(const PreprocessPlan& plan);
PreprocessPlan plan_from_json(const nlohmann::json& j);

// Simulates the column evolution without touching data; throws ParseError
// naming the step index and column on the first dangling reference.
void validate_plan(const PreprocessPlan& plan, std::vector<std::string> columns,
                   const std::vector<std::string>& categorical_columns = {});

// A plan whose stateful steps (min_max ranges, one_hot vocabularies) were
// captured from a training matrix, replayable on any compatible matrix.
struct FittedStep {
  TransformStep step;
  MinMaxScaler scaler;                  // min_max only
  std::vector<std::string> vocabulary;  // one_hot only
};

struct FittedPlan {
  std::vector<FittedStep> steps;
  PreprocessPlan::Provenance provenance = PreprocessPlan::Provenance::manual;
};

FittedPlan fit_plan(const PreprocessPlan& plan, const FeatureMatrix& train);
FeatureMatrix apply_fitted_plan(const FittedPlan& plan, const FeatureMatrix& m,
                                std::int64_t* unknown_categories = nullptr);

// Fit-and-apply on the same matrix: the declarative semantics used by the
// per-step contracts and tests.
FeatureMatrix apply_plan(const FeatureMatrix& m, const PreprocessPlan& plan);

nlohmann::json fitted_plan_to_json(const FittedPlan& plan);
FittedPlan fitted_plan_from_json(const nlohmann::json& j);

}  // namespace iotguard
