// End-to-end acceptance suite. Each test prints one line with the measured
// values so a run log doubles as a results summary.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>

#include "iotguard/advisor.hpp"
#include "iotguard/autoencoder.hpp"
#include "iotguard/dataset.hpp"
#include "iotguard/detection.hpp"
#include "iotguard/errors.hpp"
#include "iotguard/explainer.hpp"
#include "iotguard/gateway.hpp"
#include "iotguard/pca.hpp"
#include "iotguard/pipeline.hpp"
#include "iotguard/rng.hpp"
#include "iotguard/synthetic.hpp"
#include "iotguard/transforms.hpp"

using namespace iotguard;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double loss_on(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
  FeatureMatrix m;
  for (Eigen::Index c = 0; c < batch.cols(); ++c) m.column_names.push_back("c" + std::to_string(c));
  m.values = batch;
  return reconstruction_errors(model, m).mean();
}

// The experiment configuration used by criteria 3, 4 and 6: a 60k-row
// generated traffic file, stratified 20k subsample, 70/15/15 split.
RunConfig experiment_config(const std::filesystem::path& dir) {
  RunConfig cfg;
  cfg.dataset = dir / "traffic.csv";
  if (!std::filesystem::exists(cfg.dataset)) {
    write_text_file(cfg.dataset, generate_kdd_csv({60000, 1, 0.2}));
  }
  cfg.output_dir = dir / "out";
  cfg.seed = 42;
  cfg.split = {0.7, 0.15, 0.15};
  cfg.split_seed = 42;
  cfg.subsample_rows = 20000;
  cfg.subsample_seed = 42;
  cfg.train.epochs = 120;
  cfg.train.batch_size = 256;
  cfg.train.learning_rate = 3e-3;
  cfg.train.hidden_widths = {48};
  cfg.train.latent_dim = 16;
  cfg.train.seed = 42;
  cfg.threshold = {ThresholdSpec::Method::percentile, 95.0};
  return cfg;
}

// Traditional preprocessing of a dataset: one-hot encode categoricals, then
// Min-Max scale the remaining raw columns.
FeatureMatrix encode_and_scale(const LabeledDataset& ds) {
  const FeatureMatrix encoded = apply_onehot(ds, fit_onehot(ds));
  std::vector<std::string> numeric;
  for (const auto& c : ds.schema.columns) {
    if (c.kind != FeatureKind::categorical) numeric.push_back(c.name);
  }
  return apply_minmax(encoded, fit_minmax(encoded, numeric));
}

}  // namespace

TEST(Acceptance, Criterion1GradientCheck) {
  Stopwatch timer;
  Rng rng(2026);
  int models_checked = 0;
  double worst = 0.0;
  const double eps = 1e-5;

  for (int trial = 0; trial < 24; ++trial) {
    const int n = 2 + static_cast<int>(rng.bounded(5));  // n <= 6
    const int m = 1 + static_cast<int>(rng.bounded(
                          static_cast<std::uint64_t>(std::min(3, n - 1))));  // m <= 3
    const int h = m + static_cast<int>(rng.bounded(3));
    auto model = init_model(n, {h}, m, 5000 + trial);

    const int rows = 1 + static_cast<int>(rng.bounded(4));
    Eigen::MatrixXd batch(rows, n);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < n; ++c) batch(r, c) = rng.uniform();
    }
    const GradientSet analytic = gradients(model, batch);

    for (std::size_t layer = 0; layer < model.layer_count(); ++layer) {
      const DenseLayer& grad =
          layer < analytic.encoder_layers.size()
              ? analytic.encoder_layers[layer]
              : analytic.decoder_layers[layer - analytic.encoder_layers.size()];
      for (Eigen::Index i = 0; i < grad.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < grad.weights.cols(); ++j) {
          double& cell = model.layer(layer).weights(i, j);
          const double saved = cell;
          cell = saved + eps;
          const double up = loss_on(model, batch);
          cell = saved - eps;
          const double down = loss_on(model, batch);
          cell = saved;
          const double numeric = (up - down) / (2.0 * eps);
          const double denom = std::max({std::fabs(grad.weights(i, j)), std::fabs(numeric), 1e-4});
          const double rel = std::fabs(grad.weights(i, j) - numeric) / denom;
          worst = std::max(worst, rel);
          ASSERT_LT(rel, 1e-4);
        }
        double& cell = model.layer(layer).bias(i);
        const double saved = cell;
        cell = saved + eps;
        const double up = loss_on(model, batch);
        cell = saved - eps;
        const double down = loss_on(model, batch);
        cell = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double denom = std::max({std::fabs(grad.bias(i)), std::fabs(numeric), 1e-4});
        const double rel = std::fabs(grad.bias(i) - numeric) / denom;
        worst = std::max(worst, rel);
        ASSERT_LT(rel, 1e-4);
      }
    }
    ++models_checked;
  }
  const double elapsed = timer.seconds();
  ASSERT_GE(models_checked, 20);
  ASSERT_LT(elapsed, 10.0);
  std::printf("[criterion 1] PASS gradient check: %d models, worst relative error %.3g, %.2fs\n",
              models_checked, worst, elapsed);
}

TEST(Acceptance, Criterion2PcaProperties) {
  Stopwatch timer;
  Rng rng(7);
  double worst_gram = 0.0, worst_ratio_sum = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    FeatureMatrix m;
    for (int c = 0; c < 10; ++c) m.column_names.push_back("c" + std::to_string(c));
    m.values.resize(50, 10);
    for (Eigen::Index r = 0; r < 50; ++r) {
      for (Eigen::Index c = 0; c < 10; ++c) {
        m.values(r, c) = rng.normal(0.0, 0.5 + static_cast<double>(c));
      }
    }

    const PcaModel full = fit_pca(m, 10);
    const double gram_err =
        (full.components * full.components.transpose() - Eigen::MatrixXd::Identity(10, 10))
            .cwiseAbs()
            .maxCoeff();
    worst_gram = std::max(worst_gram, gram_err);
    ASSERT_LT(gram_err, 1e-8);

    const double ratio_err = std::fabs(full.explained_ratio.sum() - 1.0);
    worst_ratio_sum = std::max(worst_ratio_sum, ratio_err);
    ASSERT_LT(ratio_err, 1e-8);

    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 10; ++k) {
      const PcaModel p = fit_pca(m, k);
      const auto recon = inverse_transform_pca(transform_pca(m, p), p);
      const double err = std::sqrt((m.values - recon.values).array().square().sum());
      ASSERT_LE(err, prev + 1e-9);
      prev = err;
    }
  }
  const double elapsed = timer.seconds();
  ASSERT_LT(elapsed, 5.0);
  std::printf(
      "[criterion 2] PASS pca properties: worst orthonormality %.3g, worst ratio-sum error %.3g, "
      "%.2fs\n",
      worst_gram, worst_ratio_sum, elapsed);
}

TEST(Acceptance, Criterion3PcaVarianceAtTwentyFiveComponents) {
  Stopwatch timer;
  const auto dir = fresh_dir("acceptance_c3");
  const auto cfg = experiment_config(dir);

  LabeledDataset ds = load_kddcup(cfg.dataset, kdd_schema());
  ds = subsample(ds, 20000, cfg.subsample_seed);
  ASSERT_EQ(ds.row_count(), 20000);

  const FeatureMatrix scaled = encode_and_scale(ds);
  const PcaModel p = fit_pca(scaled, 25);
  const double cumulative = p.explained_ratio.sum();
  const double elapsed = timer.seconds();
  ASSERT_GE(cumulative, 0.90);
  ASSERT_LT(elapsed, 60.0);
  std::printf(
      "[criterion 3] PASS cumulative explained ratio at k=25: %.4f (>= 0.90) over %lld encoded "
      "columns, %.2fs\n",
      cumulative, static_cast<long long>(scaled.col_count()), elapsed);
}

TEST(Acceptance, Criterion4EndToEndComparison) {
  Stopwatch timer;
  const auto dir = fresh_dir("acceptance_c4");
  const auto cfg = experiment_config(dir);

  cmd_compare(cfg);
  const auto compare =
      nlohmann::json::parse(read_text_file(cfg.output_dir / "compare.json"));
  const double advisor_f1 = compare["advisor"]["macro_f1"].get<double>();
  const double pca_f1 = compare["pca"]["macro_f1"].get<double>();
  const double elapsed = timer.seconds();

  ASSERT_GE(advisor_f1, 0.90);
  ASSERT_GE(advisor_f1 - pca_f1, 0.15);
  ASSERT_LT(elapsed, 300.0);
  std::printf(
      "[criterion 4] PASS end-to-end comparison: advisor macro F1 %.4f vs pca %.4f (gap %.4f), "
      "%.1fs\n",
      advisor_f1, pca_f1, advisor_f1 - pca_f1, elapsed);
}

TEST(Acceptance, Criterion5MetricOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.bounded(64);
    std::vector<int> pred(n), truth(n);
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.bounded(2));
      truth[i] = static_cast<int>(rng.bounded(2));
      if (truth[i] == 1 && pred[i] == 1) ++tp;
      if (truth[i] == 0 && pred[i] == 1) ++fp;
      if (truth[i] == 0 && pred[i] == 0) ++tn;
      if (truth[i] == 1 && pred[i] == 0) ++fn;
    }
    const auto r = evaluate(pred, truth);
    ASSERT_EQ(r.tp, tp);
    ASSERT_EQ(r.fp, fp);
    ASSERT_EQ(r.tn, tn);
    ASSERT_EQ(r.fn, fn);
    const auto safe = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    const double pa = safe(tp, tp + fp), ra = safe(tp, tp + fn);
    const double pn = safe(tn, tn + fn), rn = safe(tn, tn + fp);
    const auto f1 = [](double p, double r2) { return p + r2 > 0 ? 2 * p * r2 / (p + r2) : 0.0; };
    ASSERT_DOUBLE_EQ(r.accuracy, safe(tp + tn, static_cast<double>(n)));
    ASSERT_DOUBLE_EQ(r.false_positive_rate, safe(fp, fp + tn));
    ASSERT_DOUBLE_EQ(r.precision_attack, pa);
    ASSERT_DOUBLE_EQ(r.recall_attack, ra);
    ASSERT_DOUBLE_EQ(r.precision_normal, pn);
    ASSERT_DOUBLE_EQ(r.recall_normal, rn);
    ASSERT_DOUBLE_EQ(r.f1_attack, f1(pa, ra));
    ASSERT_DOUBLE_EQ(r.f1_normal, f1(pn, rn));
    ASSERT_DOUBLE_EQ(r.macro_precision, (pa + pn) / 2);
    ASSERT_DOUBLE_EQ(r.macro_recall, (ra + rn) / 2);
    ASSERT_DOUBLE_EQ(r.macro_f1, (f1(pa, ra) + f1(pn, rn)) / 2);
  }
  std::printf("[criterion 5] PASS metric oracle: exact match on 1000 random vectors\n");
}

TEST(Acceptance, Criterion6CompareDeterminism) {
  const auto dir = fresh_dir("acceptance_c6");
  // desk-scale config keeps the double run quick; determinism is scale-free
  RunConfig cfg;
  cfg.dataset = dir / "traffic.csv";
  write_text_file(cfg.dataset, generate_kdd_csv({4000, 5, 0.2}));
  cfg.seed = 11;
  cfg.split = {0.7, 0.15, 0.15};
  cfg.split_seed = 11;
  cfg.train.epochs = 15;
  cfg.train.batch_size = 128;
  cfg.train.learning_rate = 3e-3;
  cfg.train.hidden_widths = {24};
  cfg.train.latent_dim = 8;
  cfg.train.seed = 11;

  cfg.output_dir = dir / "out";
  const std::vector<std::string> artifacts = {
      "pca/report.json",   "advisor/report.json",   "pca/model.json", "advisor/model.json",
      "pca/histogram.csv", "advisor/histogram.csv", "compare.json",   "manifest.json"};

  cmd_compare(cfg);
  std::map<std::string, std::string> first_run;
  for (const auto& a : artifacts) first_run[a] = read_text_file(cfg.output_dir / a);

  cmd_compare(cfg);  // identical config + seed, same output directory
  for (const auto& a : artifacts) {
    ASSERT_EQ(first_run.at(a), read_text_file(cfg.output_dir / a)) << a;
  }
  std::printf("[criterion 6] PASS determinism: reports, models, histograms and manifest "
              "byte-identical across identical compare runs\n");
}

TEST(Acceptance, Criterion7ExplanationGoldens) {
  AnomalyCase stealth;
  stealth.row_id = 0;
  stealth.reconstruction_error = 0.0001;
  stealth.salient_features = {{"src_bytes", 1.4883707192251517e-06, 0.4},
                              {"dst_bytes", 0.0, 0.3},
                              {"protocol_type_tcp", 0.0, 0.2},
                              {"flag_REJ", 0.0, 0.1}};
  AnomalyCase probing;
  probing.row_id = 1;
  probing.reconstruction_error = 0.0008;
  probing.salient_features = {{"src_bytes", 3.9661041452220616e-07, 0.4},
                              {"dst_bytes", 6.013033152373364e-05, 0.3},
                              {"protocol_type_tcp", 1.0, 0.2},
                              {"flag_REJ", 0.0, 0.1}};

  const auto stealth_report = offline_explain(stealth);
  ASSERT_NE(stealth_report.insight.find("stealth reconnaissance"), std::string::npos);
  const auto probing_report = offline_explain(probing);
  ASSERT_NE(probing_report.insight.find("port scanning or probing"), std::string::npos);

  const std::string prompt = build_explanation_prompt(stealth);
  for (const char* required :
       {"src_bytes=1.4883707192251517e-06", "dst_bytes=0.0", "protocol_type_tcp=0.0",
        "flag_REJ=0.0", "0.0001"}) {
    ASSERT_NE(prompt.find(required), std::string::npos) << required;
  }
  for (const char* golden : {"fig5_prompt.txt", "fig6_prompt.txt"}) {
    const auto path = std::filesystem::path(IOTGUARD_TEST_DIR) / "golden" / golden;
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
  }
  ASSERT_EQ(prompt, read_text_file(std::filesystem::path(IOTGUARD_TEST_DIR) / "golden" /
                                   "fig5_prompt.txt"));
  ASSERT_EQ(build_explanation_prompt(probing),
            read_text_file(std::filesystem::path(IOTGUARD_TEST_DIR) / "golden" /
                           "fig6_prompt.txt"));
  std::printf("[criterion 7] PASS explanation goldens: rule insights and prompt bytes match\n");
}

TEST(Acceptance, Criterion8GatewayBehaviour) {
  struct CountingTransport : ChatTransport {
    std::vector<TransportReply> script;
    std::size_t next = 0;
    int posts = 0;
    TransportReply post(const std::string&) override {
      ++posts;
      return script[std::min(next++, script.size() - 1)];
    }
  };
  const auto ok = [](const std::string& text) {
    nlohmann::json j;
    j["choices"] = {{{"message", {{"content", text}}}, {"finish_reason", "stop"}}};
    return j.dump();
  };

  GatewayConfig cfg;
  cfg.max_retries = 3;
  cfg.backoff_base_ms = 0.0;

  // fixture replay, twice, bit-identical
  const auto dir = fresh_dir("acceptance_c8");
  ChatRequest req;
  req.model = "m";
  req.messages = {{"user", "advise me"}};
  write_fixture(dir, req, "fixture reply bytes");
  auto fixture = load_fixture_transport(dir);
  const auto first = send_chat(req, cfg, *fixture);
  const auto second = send_chat(req, cfg, *fixture);
  ASSERT_EQ(first.content, "fixture reply bytes");
  ASSERT_EQ(first.content, second.content);

  // 429, 429, 200 -> success after exactly 2 retries
  CountingTransport retry;
  retry.script = {{429, ""}, {429, ""}, {200, ok("done")}};
  const auto resp = send_chat(req, cfg, retry);
  ASSERT_EQ(resp.content, "done");
  ASSERT_EQ(retry.posts, 3);

  // 401 -> configuration error with zero retries
  CountingTransport denied;
  denied.script = {{401, "bad key"}};
  ASSERT_THROW(send_chat(req, cfg, denied), ConfigError);
  ASSERT_EQ(denied.posts, 1);

  std::printf(
      "[criterion 8] PASS gateway behaviour: fixture replay stable, 2-retry recovery, zero-retry "
      "auth failure, no network used\n");
}
