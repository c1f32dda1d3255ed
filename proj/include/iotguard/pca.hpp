#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "iotguard/transforms.hpp"

namespace iotguard {

struct PcaModel {
  Eigen::VectorXd mean;                // per input column
  Eigen::MatrixXd components;          // k x n, orthonormal rows, descending eigenvalue order
  Eigen::VectorXd explained_variance;  // top-k eigenvalues
  Eigen::VectorXd explained_ratio;     // eigenvalue / total variance over all columns
  std::vector<std::string> input_columns;

  int component_count() const { return static_cast<int>(components.rows()); }
};

// Covariance + symmetric eigendecomposition of mean-centered data. Component
// signs are fixed so each row's largest-magnitude entry is positive, making
// fits reproducible across runs and platforms.
PcaModel fit_pca(const FeatureMatrix& m, int k);

// (m - mean) * components^T; output columns named pc1..pck.
FeatureMatrix transform_pca(const FeatureMatrix& m, const PcaModel& p);

// projected * components + mean, back in the original column space.
FeatureMatrix inverse_transform_pca(const FeatureMatrix& projected, const PcaModel& p);

// Smallest k whose cumulative explained ratio reaches the target; expects a
// model fit with k = cols.
int select_components(const PcaModel& p, double target);

nlohmann::json pca_to_json(const PcaModel& p);
PcaModel pca_from_json(const nlohmann::json& j);

}  // namespace iotguard
