#include "iotguard/pca.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "iotguard/errors.hpp"
#include "iotguard/rng.hpp"

using namespace iotguard;

namespace {

FeatureMatrix matrix(std::vector<std::string> names, const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  m.column_names = std::move(names);
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.column_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

FeatureMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  FeatureMatrix m;
  for (Eigen::Index c = 0; c < cols; ++c) m.column_names.push_back("c" + std::to_string(c));
  m.values.resize(rows, cols);
  Rng rng(seed);
  // mixed scales so the spectrum is not flat
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double scale = rng.uniform(0.5, 4.0);
    for (Eigen::Index r = 0; r < rows; ++r) m.values(r, c) = rng.normal(0.0, scale);
  }
  return m;
}

double frobenius(const Eigen::MatrixXd& a) { return std::sqrt(a.array().square().sum()); }

}  // namespace

TEST(FitPca, RecoversTheLineDirection) {
  // points on y = x: single dominant direction (1/sqrt2, 1/sqrt2)
  const auto m = matrix({"x", "y"}, {{1, 1}, {2, 2}, {3, 3}});
  const PcaModel p = fit_pca(m, 1);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(p.components(0, 0), s, 1e-12);
  EXPECT_NEAR(p.components(0, 1), s, 1e-12);
  EXPECT_NEAR(p.explained_ratio(0), 1.0, 1e-12);
  EXPECT_NEAR(p.mean(0), 2.0, 1e-12);
}

TEST(FitPca, AxisAlignedVarianceRatios) {
  // column variances 16/3 and 4/3: ratios 0.8 / 0.2
  const auto m = matrix({"x", "y"}, {{-2, -1}, {-2, 1}, {2, -1}, {2, 1}});
  const PcaModel p = fit_pca(m, 2);
  EXPECT_NEAR(p.explained_ratio(0), 0.8, 1e-12);
  EXPECT_NEAR(p.explained_ratio(1), 0.2, 1e-12);
  EXPECT_NEAR(p.explained_variance(0), 16.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.explained_variance(1), 4.0 / 3.0, 1e-12);
}

TEST(FitPca, SignConventionIsDeterministic) {
  const auto m = random_matrix(40, 6, 3);
  const PcaModel p = fit_pca(m, 6);
  for (int k = 0; k < 6; ++k) {
    Eigen::Index imax = 0;
    p.components.row(k).cwiseAbs().maxCoeff(&imax);
    EXPECT_GT(p.components(k, imax), 0.0);
  }
}

TEST(FitPca, RejectsBadInput) {
  const auto m = matrix({"x", "y"}, {{1, 2}, {3, 4}, {5, 6}});
  EXPECT_THROW(fit_pca(m, 0), NumericError);
  EXPECT_THROW(fit_pca(m, 3), NumericError);  // k > min(rows-1, cols)
  auto bad = m;
  bad.values(1, 1) = std::nan("");
  EXPECT_THROW(fit_pca(bad, 1), NumericError);
  const auto one_row = matrix({"x", "y"}, {{1, 2}});
  EXPECT_THROW(fit_pca(one_row, 1), NumericError);
}

TEST(TransformPca, CentersAndProjects) {
  const auto m = matrix({"x", "y"}, {{1, 1}, {2, 2}, {3, 3}});
  const PcaModel p = fit_pca(m, 1);

  const auto mean_row = matrix({"x", "y"}, {{2, 2}});
  EXPECT_NEAR(transform_pca(mean_row, p).values(0, 0), 0.0, 1e-12);

  const auto point = matrix({"x", "y"}, {{3, 3}});
  EXPECT_NEAR(transform_pca(point, p).values(0, 0), std::sqrt(2.0), 1e-12);

  const auto out = transform_pca(m, p);
  EXPECT_EQ(out.column_names, (std::vector<std::string>{"pc1"}));
}

TEST(TransformPca, RejectsDimensionMismatch) {
  const auto m = matrix({"x", "y"}, {{1, 1}, {2, 2}, {3, 3}});
  const PcaModel p = fit_pca(m, 1);
  EXPECT_THROW(transform_pca(matrix({"x"}, {{1}}), p), NumericError);
}

TEST(PcaProperties, ComponentsOrthonormal) {
  const auto m = random_matrix(50, 10, 11);
  const PcaModel p = fit_pca(m, 10);
  const Eigen::MatrixXd gram = p.components * p.components.transpose();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(PcaProperties, FullRankRatiosSumToOne) {
  const auto m = random_matrix(50, 10, 13);
  const PcaModel p = fit_pca(m, 10);
  EXPECT_NEAR(p.explained_ratio.sum(), 1.0, 1e-8);
  for (int i = 1; i < 10; ++i) {
    EXPECT_LE(p.explained_variance(i), p.explained_variance(i - 1) + 1e-12);
  }
}

TEST(PcaProperties, ReconstructionErrorNonIncreasingInK) {
  const auto m = random_matrix(50, 10, 17);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 10; ++k) {
    const PcaModel p = fit_pca(m, k);
    const auto recon = inverse_transform_pca(transform_pca(m, p), p);
    const double err = frobenius(m.values - recon.values);
    EXPECT_LE(err, prev + 1e-9);
    prev = err;
  }
  EXPECT_NEAR(prev, 0.0, 1e-8);  // full rank reconstructs exactly
}

TEST(PcaProperties, FitInvariantToRowOrder) {
  const auto m = random_matrix(30, 5, 19);
  auto permuted = m;
  Rng rng(23);
  std::vector<Eigen::Index> order(30);
  for (Eigen::Index i = 0; i < 30; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  for (Eigen::Index i = 0; i < 30; ++i) {
    permuted.values.row(i) = m.values.row(order[static_cast<std::size_t>(i)]);
  }
  const PcaModel a = fit_pca(m, 5);
  const PcaModel b = fit_pca(permuted, 5);
  EXPECT_TRUE(a.components.isApprox(b.components, 1e-9));
  EXPECT_TRUE(a.explained_variance.isApprox(b.explained_variance, 1e-9));
}

TEST(SelectComponents, SmallestKReachingTarget) {
  PcaModel p;
  p.explained_ratio.resize(2);
  p.explained_ratio << 0.8, 0.2;
  p.components.resize(2, 2);
  EXPECT_EQ(select_components(p, 0.8), 1);

  PcaModel q;
  q.explained_ratio.resize(3);
  q.explained_ratio << 0.5, 0.3, 0.2;
  q.components.resize(3, 3);
  EXPECT_EQ(select_components(q, 0.95), 3);
  EXPECT_EQ(select_components(q, 1.0), 3);
  EXPECT_THROW(select_components(q, 0.0), ConfigError);
}

TEST(PcaJson, RoundTripPreservesTransform) {
  const auto m = random_matrix(25, 6, 29);
  const PcaModel p = fit_pca(m, 4);
  const PcaModel back = pca_from_json(pca_to_json(p));
  EXPECT_TRUE(back.components.isApprox(p.components, 0.0));
  EXPECT_TRUE(back.mean.isApprox(p.mean, 0.0));
  const auto a = transform_pca(m, p);
  const auto b = transform_pca(m, back);
  EXPECT_TRUE(a.values.isApprox(b.values, 0.0));
}
