#include "iotguard/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "iotguard/errors.hpp"

namespace iotguard {

PcaModel fit_pca(const FeatureMatrix& m, int k) {
  const Eigen::Index rows = m.row_count();
  const Eigen::Index cols = m.col_count();
  if (rows < 2) throw NumericError("fit_pca: need at least 2 rows");
  if (k < 1 || k > std::min<Eigen::Index>(rows - 1, cols)) {
    throw NumericError("fit_pca: k=" + std::to_string(k) + " out of range for " +
                       std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
  if (!m.values.allFinite()) throw NumericError("fit_pca: non-finite input");

  PcaModel p;
  p.input_columns = m.column_names;
  p.mean = m.values.colwise().mean();

  const Eigen::MatrixXd centered = m.values.rowwise() - p.mean.transpose();
  const Eigen::MatrixXd covariance =
      (centered.transpose() * centered) / static_cast<double>(rows - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw NumericError("fit_pca: eigensolver failed");

  // Solver returns ascending eigenvalues; take the top k in descending order.
  const Eigen::VectorXd eigenvalues = solver.eigenvalues();
  const Eigen::MatrixXd eigenvectors = solver.eigenvectors();
  const double total_variance = std::max(eigenvalues.sum(), 0.0);

  p.components.resize(k, cols);
  p.explained_variance.resize(k);
  p.explained_ratio.resize(k);
  for (int i = 0; i < k; ++i) {
    const Eigen::Index src = cols - 1 - i;
    Eigen::VectorXd component = eigenvectors.col(src);
    Eigen::Index max_idx = 0;
    component.cwiseAbs().maxCoeff(&max_idx);
    if (component(max_idx) < 0.0) component = -component;
    p.components.row(i) = component.transpose();
    p.explained_variance(i) = std::max(eigenvalues(src), 0.0);
    p.explained_ratio(i) =
        total_variance > 0.0 ? p.explained_variance(i) / total_variance : 0.0;
  }
  return p;
}

FeatureMatrix transform_pca(const FeatureMatrix& m, const PcaModel& p) {
  if (m.col_count() != p.mean.size()) {
    throw NumericError("transform_pca: matrix has " + std::to_string(m.col_count()) +
                       " columns, model was fit on " + std::to_string(p.mean.size()));
  }
  FeatureMatrix out;
  out.values = (m.values.rowwise() - p.mean.transpose()) * p.components.transpose();
  for (int i = 1; i <= p.component_count(); ++i) {
    out.column_names.push_back("pc" + std::to_string(i));
  }
  return out;
}

FeatureMatrix inverse_transform_pca(const FeatureMatrix& projected, const PcaModel& p) {
  if (projected.col_count() != p.component_count()) {
    throw NumericError("inverse_transform_pca: dimension mismatch");
  }
  FeatureMatrix out;
  out.column_names = p.input_columns;
  out.values = (projected.values * p.components).rowwise() + p.mean.transpose();
  return out;
}

int select_components(const PcaModel& p, double target) {
  if (target <= 0.0 || target > 1.0) throw ConfigError("variance target must be in (0, 1]");
  double cumulative = 0.0;
  for (int i = 0; i < p.component_count(); ++i) {
    cumulative += p.explained_ratio(i);
    if (cumulative >= target - 1e-12) return i + 1;
  }
  return p.component_count();
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.emplace_back(m.row(r).begin(), m.row(r).end());
  }
  return rows;
}

}  // namespace

nlohmann::json pca_to_json(const PcaModel& p) {
  nlohmann::json j;
  j["mean"] = to_vec(p.mean);
  j["components"] = to_rows(p.components);
  j["explained_variance"] = to_vec(p.explained_variance);
  j["explained_ratio"] = to_vec(p.explained_ratio);
  j["input_columns"] = p.input_columns;
  return j;
}

PcaModel pca_from_json(const nlohmann::json& j) {
  PcaModel p;
  try {
    const auto mean = j.at("mean").get<std::vector<double>>();
    p.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    const auto rows = j.at("components").get<std::vector<std::vector<double>>>();
    p.components.resize(static_cast<Eigen::Index>(rows.size()), p.mean.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != p.mean.size()) {
        throw ParseError("pca model: ragged component matrix");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        p.components(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    const auto ev = j.at("explained_variance").get<std::vector<double>>();
    p.explained_variance =
        Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
    const auto er = j.at("explained_ratio").get<std::vector<double>>();
    p.explained_ratio =
        Eigen::Map<const Eigen::VectorXd>(er.data(), static_cast<Eigen::Index>(er.size()));
    p.input_columns = j.value("input_columns", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed pca model: ") + e.what());
  }
  return p;
}

}  // namespace iotguard
