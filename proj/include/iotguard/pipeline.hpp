#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "iotguard/advisor.hpp"
#include "iotguard/autoencoder.hpp"
#include "iotguard/dataset.hpp"
#include "iotguard/detection.hpp"
#include "iotguard/explainer.hpp"
#include "iotguard/gateway.hpp"
#include "iotguard/pca.hpp"
#include "iotguard/transforms.hpp"

namespace iotguard {

enum class PipelineKind { pca, advisor_heuristic, advisor_llm };

const char* to_string(PipelineKind kind);

struct PcaConfig {
  int components = 25;
  double target_variance = 0.0;  // > 0 selects k by cumulative explained ratio
};

struct ExplainConfig {
  int top_k = 4;
  std::int64_t limit = 10;
  bool use_llm = false;
};

struct RunConfig {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> schema_file;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 42;

  SplitFractions split{0.7, 0.15, 0.15};
  std::uint64_t split_seed = 42;
  std::int64_t subsample_rows = 0;  // 0 disables
  std::uint64_t subsample_seed = 42;

  PipelineKind pipeline = PipelineKind::advisor_heuristic;
  PcaConfig pca;
  AdvisorThresholds advisor;
  TrainConfig train;
  ThresholdSpec threshold;
  ExplainConfig explain;
  GatewayConfig gateway;
};

// JSON config with ${ENV} interpolation applied to gateway fields only.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

struct PreparedData {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

// load -> optional stratified subsample -> stratified split.
PreparedData prepare_data(const RunConfig& cfg);

// Fitted preprocessing state for one pipeline, applicable to any split.
struct FittedPipeline {
  PipelineKind kind = PipelineKind::pca;
  std::string provenance;  // "pca" | "heuristic" | "llm"
  // traditional path
  OneHotEncoder encoder;
  MinMaxScaler scaler;
  PcaModel pca;
  // advisor path
  PreprocessPlan plan;
  FittedPlan fitted_plan;
};

// Fits preprocessing on the training split. For the llm pipeline a transport
// is built from cfg.gateway; parse/transport failures fall back to the
// heuristic plan and the failure text is reported through llm_error.
FittedPipeline fit_pipeline(const RunConfig& cfg, const LabeledDataset& train, PipelineKind kind,
                            std::string* llm_error = nullptr);

FeatureMatrix apply_pipeline(const FittedPipeline& p, const LabeledDataset& ds,
                             std::int64_t* unknown_categories = nullptr);

nlohmann::json fitted_pipeline_to_json(const FittedPipeline& p);
FittedPipeline fitted_pipeline_from_json(const nlohmann::json& j);

struct TrainedArtifacts {
  FittedPipeline pipeline;
  AutoencoderModel model;
  TrainTrace trace;
  ThresholdModel threshold;
  std::string llm_error;  // non-empty when the llm advisor fell back
};

// Fit preprocessing, train the autoencoder on normal-labeled training rows,
// calibrate the threshold on the validation split's errors.
TrainedArtifacts train_pipeline(const RunConfig& cfg, const PreparedData& data, PipelineKind kind);

struct EvalResult {
  EvaluationReport report;
  ErrorHistogram histogram;
  std::vector<double> errors;
  std::vector<int> predictions;
};

EvalResult evaluate_pipeline(const TrainedArtifacts& artifacts, const LabeledDataset& test);

// --- CLI commands; each writes its artifacts plus manifest.json under the
// --- output directory and returns the manifest.
nlohmann::json cmd_stats(const RunConfig& cfg);
nlohmann::json cmd_plan(const RunConfig& cfg);
nlohmann::json cmd_train(const RunConfig& cfg);
nlohmann::json cmd_evaluate(const RunConfig& cfg);
nlohmann::json cmd_compare(const RunConfig& cfg);
nlohmann::json cmd_explain(const RunConfig& cfg);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace iotguard
