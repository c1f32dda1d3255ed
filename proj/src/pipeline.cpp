#include "iotguard/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "iotguard/errors.hpp"
#include "iotguard/hash.hpp"

namespace iotguard {

const char* to_string(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::pca: return "pca";
    case PipelineKind::advisor_heuristic: return "advisor-heuristic";
    case PipelineKind::advisor_llm: return "advisor-llm";
  }
  return "pca";
}

namespace {

PipelineKind pipeline_from_string(const std::string& s) {
  if (s == "pca") return PipelineKind::pca;
  if (s == "advisor-heuristic" || s == "advisor") return PipelineKind::advisor_heuristic;
  if (s == "advisor-llm") return PipelineKind::advisor_llm;
  throw ConfigError("unknown pipeline: " + s + " (expected pca|advisor-heuristic|advisor-llm)");
}

// ${VAR} -> environment value (empty when unset); gateway fields only.
std::string interpolate_env(const std::string& input) {
  std::string out;
  std::size_t pos = 0;
  while (pos < input.size()) {
    const std::size_t open = input.find("${", pos);
    if (open == std::string::npos) {
      out += input.substr(pos);
      break;
    }
    const std::size_t close = input.find('}', open + 2);
    if (close == std::string::npos) {
      out += input.substr(pos);
      break;
    }
    out += input.substr(pos, open - pos);
    const std::string var = input.substr(open + 2, close - open - 2);
    if (const char* value = std::getenv(var.c_str())) out += value;
    pos = close + 1;
  }
  return out;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    if (!j.contains("dataset")) throw ConfigError("config is missing required field: dataset");
    cfg.dataset = j.at("dataset").get<std::string>();
    if (j.contains("schema")) cfg.schema_file = j.at("schema").get<std::string>();
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.seed = j.value("seed", std::uint64_t{42});

    if (j.contains("split")) {
      const auto& s = j.at("split");
      cfg.split.train = s.value("train", 0.7);
      cfg.split.val = s.value("val", 0.15);
      cfg.split.test = s.value("test", 0.15);
      cfg.split_seed = s.value("seed", cfg.seed);
    } else {
      cfg.split_seed = cfg.seed;
    }
    if (j.contains("subsample")) {
      const auto& s = j.at("subsample");
      cfg.subsample_rows = s.value("rows", std::int64_t{0});
      cfg.subsample_seed = s.value("seed", cfg.seed);
    } else {
      cfg.subsample_seed = cfg.seed;
    }

    cfg.pipeline = pipeline_from_string(j.value("pipeline", std::string("advisor-heuristic")));
    if (j.contains("pca")) {
      const auto& p = j.at("pca");
      cfg.pca.components = p.value("components", 25);
      cfg.pca.target_variance = p.value("target_variance", 0.0);
    }
    if (j.contains("advisor")) {
      const auto& a = j.at("advisor");
      cfg.advisor.low_variance_cutoff = a.value("low_variance_cutoff", 1e-6);
      cfg.advisor.high_correlation_cutoff = a.value("high_correlation_cutoff", 0.95);
      cfg.advisor.sparsity_cutoff = a.value("sparsity_cutoff", 0.9);
      if (cfg.advisor.low_variance_cutoff < 0.0 ||
          cfg.advisor.high_correlation_cutoff > 1.0 || cfg.advisor.sparsity_cutoff < 0.0 ||
          cfg.advisor.sparsity_cutoff > 1.0) {
        throw ConfigError("advisor cutoffs out of range");
      }
      // feature stats only track correlations with |r| > 0.5
      if (cfg.advisor.high_correlation_cutoff < 0.5) {
        throw ConfigError("advisor.high_correlation_cutoff must be at least 0.5");
      }
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      cfg.train.epochs = t.value("epochs", 20);
      cfg.train.batch_size = t.value("batch_size", 256);
      cfg.train.learning_rate = t.value("learning_rate", 1e-3);
      cfg.train.seed = t.value("seed", cfg.seed);
      const std::string opt = t.value("optimizer", std::string("adam"));
      if (opt == "adam") {
        cfg.train.optimizer = TrainConfig::Optimizer::adam;
      } else if (opt == "sgd") {
        cfg.train.optimizer = TrainConfig::Optimizer::sgd;
      } else {
        throw ConfigError("unknown optimizer: " + opt);
      }
      cfg.train.adam_beta1 = t.value("adam_beta1", 0.9);
      cfg.train.adam_beta2 = t.value("adam_beta2", 0.999);
      cfg.train.adam_epsilon = t.value("adam_epsilon", 1e-8);
      cfg.train.hidden_widths = t.value("hidden_widths", std::vector<int>{32});
      cfg.train.latent_dim = t.value("latent_dim", 16);
      cfg.train.validation_fraction = t.value("validation_fraction", 0.1);
    } else {
      cfg.train.seed = cfg.seed;
    }
    if (j.contains("threshold")) {
      const auto& t = j.at("threshold");
      const std::string method = t.value("method", std::string("percentile"));
      if (method == "percentile") {
        cfg.threshold.method = ThresholdSpec::Method::percentile;
        cfg.threshold.value = t.value("value", 95.0);
      } else if (method == "fixed") {
        cfg.threshold.method = ThresholdSpec::Method::fixed;
        cfg.threshold.value = t.value("value", 0.01);
      } else {
        throw ConfigError("unknown threshold method: " + method);
      }
    }
    if (j.contains("explain")) {
      const auto& e = j.at("explain");
      cfg.explain.top_k = e.value("top_k", 4);
      cfg.explain.limit = e.value("limit", std::int64_t{10});
      cfg.explain.use_llm = e.value("use_llm", false);
    }
    cfg.gateway.model.clear();
    if (j.contains("gateway")) {
      const auto& g = j.at("gateway");
      cfg.gateway.base_url = interpolate_env(g.value("base_url", std::string()));
      cfg.gateway.api_key = interpolate_env(g.value("api_key", std::string()));
      cfg.gateway.model = interpolate_env(g.value("model", std::string()));
      cfg.gateway.timeout_ms = g.value("timeout_ms", 30000);
      cfg.gateway.max_retries = g.value("max_retries", 3);
      cfg.gateway.backoff_base_ms = g.value("backoff_base_ms", 250.0);
      cfg.gateway.fixtures_dir = interpolate_env(g.value("fixtures_dir", std::string()));
    }
    // Fields the config leaves empty come from the standard environment.
    auto env_or = [](const char* var, const std::string& fallback) {
      const char* v = std::getenv(var);
      return v && *v ? std::string(v) : fallback;
    };
    if (cfg.gateway.base_url.empty()) cfg.gateway.base_url = env_or("LLM_API_URL", "");
    if (cfg.gateway.api_key.empty()) cfg.gateway.api_key = env_or("LLM_API_KEY", "");
    if (cfg.gateway.model.empty()) cfg.gateway.model = env_or("LLM_MODEL", "gpt-4");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig cfg = run_config_from_json(j);

  // Paths resolve relative to the config file so runs do not depend on CWD.
  const auto base = path.parent_path();
  auto resolve = [&](const std::filesystem::path& p) {
    return p.is_absolute() || base.empty() ? p : (base / p).lexically_normal();
  };
  cfg.dataset = resolve(cfg.dataset);
  if (cfg.schema_file) cfg.schema_file = resolve(*cfg.schema_file);
  cfg.output_dir = resolve(cfg.output_dir);
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["dataset"] = cfg.dataset.string();
  if (cfg.schema_file) j["schema"] = cfg.schema_file->string();
  j["output_dir"] = cfg.output_dir.string();
  j["seed"] = cfg.seed;
  j["split"] = {{"train", cfg.split.train},
                {"val", cfg.split.val},
                {"test", cfg.split.test},
                {"seed", cfg.split_seed}};
  j["subsample"] = {{"rows", cfg.subsample_rows}, {"seed", cfg.subsample_seed}};
  j["pipeline"] = to_string(cfg.pipeline);
  j["pca"] = {{"components", cfg.pca.components}, {"target_variance", cfg.pca.target_variance}};
  j["advisor"] = {{"low_variance_cutoff", cfg.advisor.low_variance_cutoff},
                  {"high_correlation_cutoff", cfg.advisor.high_correlation_cutoff},
                  {"sparsity_cutoff", cfg.advisor.sparsity_cutoff}};
  j["train"] = {
      {"epochs", cfg.train.epochs},
      {"batch_size", cfg.train.batch_size},
      {"learning_rate", cfg.train.learning_rate},
      {"seed", cfg.train.seed},
      {"optimizer", cfg.train.optimizer == TrainConfig::Optimizer::adam ? "adam" : "sgd"},
      {"adam_beta1", cfg.train.adam_beta1},
      {"adam_beta2", cfg.train.adam_beta2},
      {"adam_epsilon", cfg.train.adam_epsilon},
      {"hidden_widths", cfg.train.hidden_widths},
      {"latent_dim", cfg.train.latent_dim},
      {"validation_fraction", cfg.train.validation_fraction}};
  j["threshold"] = {
      {"method", cfg.threshold.method == ThresholdSpec::Method::percentile ? "percentile" : "fixed"},
      {"value", cfg.threshold.value}};
  j["explain"] = {{"top_k", cfg.explain.top_k},
                  {"limit", cfg.explain.limit},
                  {"use_llm", cfg.explain.use_llm}};
  // api_key deliberately omitted: secrets never feed the manifest hash.
  j["gateway"] = {{"base_url", cfg.gateway.base_url},
                  {"model", cfg.gateway.model},
                  {"timeout_ms", cfg.gateway.timeout_ms},
                  {"max_retries", cfg.gateway.max_retries},
                  {"fixtures_dir", cfg.gateway.fixtures_dir}};
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  return fnv1a64_hex(run_config_to_json(cfg).dump());
}

PreparedData prepare_data(const RunConfig& cfg) {
  if (!std::filesystem::exists(cfg.dataset)) {
    throw ConfigError("dataset file does not exist: " + cfg.dataset.string());
  }
  const DatasetSchema schema =
      cfg.schema_file ? schema_from_json_file(*cfg.schema_file) : kdd_schema();
  LabeledDataset ds = load_kddcup(cfg.dataset, schema);
  if (cfg.subsample_rows > 0) {
    ds = subsample(ds, cfg.subsample_rows, cfg.subsample_seed);
  }
  DatasetSplits splits = stratified_split(ds, cfg.split, cfg.split_seed);
  return {std::move(splits.train), std::move(splits.val), std::move(splits.test)};
}

namespace {

std::vector<std::string> non_categorical_columns(const DatasetSchema& schema) {
  std::vector<std::string> out;
  for (const auto& c : schema.columns) {
    if (c.kind != FeatureKind::categorical) out.push_back(c.name);
  }
  return out;
}

PcaModel truncate_pca(const PcaModel& full, int k) {
  PcaModel p;
  p.mean = full.mean;
  p.components = full.components.topRows(k);
  p.explained_variance = full.explained_variance.head(k);
  p.explained_ratio = full.explained_ratio.head(k);
  p.input_columns = full.input_columns;
  return p;
}

}  // namespace

FittedPipeline fit_pipeline(const RunConfig& cfg, const LabeledDataset& train, PipelineKind kind,
                            std::string* llm_error) {
  FittedPipeline p;
  p.kind = kind;

  if (kind == PipelineKind::pca) {
    p.provenance = "pca";
    p.encoder = fit_onehot(train);
    FeatureMatrix encoded = apply_onehot(train, p.encoder);
    p.scaler = fit_minmax(encoded, non_categorical_columns(train.schema));
    const FeatureMatrix scaled = apply_minmax(encoded, p.scaler);

    if (cfg.pca.target_variance > 0.0) {
      const int k_max = static_cast<int>(
          std::min<Eigen::Index>(scaled.row_count() - 1, scaled.col_count()));
      const PcaModel full = fit_pca(scaled, k_max);
      p.pca = truncate_pca(full, select_components(full, cfg.pca.target_variance));
    } else {
      p.pca = fit_pca(scaled, cfg.pca.components);
    }
    return p;
  }

  const FeatureStats stats = compute_feature_stats(train);
  if (kind == PipelineKind::advisor_llm) {
    try {
      auto transport = make_transport(cfg.gateway);
      ChatRequest req;
      req.model = cfg.gateway.model;
      req.temperature = 0.0;
      req.messages.push_back({"user", build_advisor_prompt(stats)});
      const ChatResponse resp = send_chat(req, cfg.gateway, *transport);

      std::vector<std::string> columns;
      std::vector<std::string> categorical;
      for (const auto& c : train.schema.columns) {
        columns.push_back(c.name);
        if (c.kind == FeatureKind::categorical) categorical.push_back(c.name);
      }
      p.plan = parse_advisor_response(resp.content, columns, categorical);
      p.provenance = "llm";
    } catch (const ConfigError&) {
      throw;  // missing endpoint configuration is not recoverable
    } catch (const std::exception& e) {
      if (llm_error) *llm_error = e.what();
      p.plan = heuristic_advise(stats, cfg.advisor);
      p.provenance = "heuristic";
    }
  } else {
    p.plan = heuristic_advise(stats, cfg.advisor);
    p.provenance = "heuristic";
  }
  p.fitted_plan = fit_plan(p.plan, to_feature_matrix(train));
  return p;
}

FeatureMatrix apply_pipeline(const FittedPipeline& p, const LabeledDataset& ds,
                             std::int64_t* unknown_categories) {
  if (p.kind == PipelineKind::pca) {
    const FeatureMatrix encoded = apply_onehot(ds, p.encoder, unknown_categories);
    return transform_pca(apply_minmax(encoded, p.scaler), p.pca);
  }
  return apply_fitted_plan(p.fitted_plan, to_feature_matrix(ds), unknown_categories);
}

nlohmann::json fitted_pipeline_to_json(const FittedPipeline& p) {
  nlohmann::json j;
  j["kind"] = p.kind == PipelineKind::pca ? "pca" : "advisor";
  j["provenance"] = p.provenance;
  if (p.kind == PipelineKind::pca) {
    j["encoder"] = nlohmann::json::array();
    for (const auto& [column, vocabulary] : p.encoder.columns) {
      j["encoder"].push_back({{"column", column}, {"vocabulary", vocabulary}});
    }
    j["scaler"] = {{"columns", p.scaler.columns}, {"min", p.scaler.min}, {"max", p.scaler.max}};
    j["pca"] = pca_to_json(p.pca);
  } else {
    j["plan"] = plan_to_json(p.plan);
    j["fitted_plan"] = fitted_plan_to_json(p.fitted_plan);
  }
  return j;
}

FittedPipeline fitted_pipeline_from_json(const nlohmann::json& j) {
  FittedPipeline p;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    p.provenance = j.at("provenance").get<std::string>();
    if (kind == "pca") {
      p.kind = PipelineKind::pca;
      for (const auto& e : j.at("encoder")) {
        p.encoder.columns.push_back({e.at("column").get<std::string>(),
                                     e.at("vocabulary").get<std::vector<std::string>>()});
      }
      const auto& s = j.at("scaler");
      p.scaler.columns = s.at("columns").get<std::vector<std::string>>();
      p.scaler.min = s.at("min").get<std::vector<double>>();
      p.scaler.max = s.at("max").get<std::vector<double>>();
      p.pca = pca_from_json(j.at("pca"));
    } else if (kind == "advisor") {
      p.kind = p.provenance == "llm" ? PipelineKind::advisor_llm
                                     : PipelineKind::advisor_heuristic;
      p.plan = plan_from_json(j.at("plan"));
      p.fitted_plan = fitted_plan_from_json(j.at("fitted_plan"));
    } else {
      throw ParseError("unknown fitted pipeline kind: " + kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed fitted pipeline: ") + e.what());
  }
  return p;
}

TrainedArtifacts train_pipeline(const RunConfig& cfg, const PreparedData& data,
                                PipelineKind kind) {
  TrainedArtifacts out;
  out.pipeline = fit_pipeline(cfg, data.train, kind, &out.llm_error);

  const FeatureMatrix transformed = apply_pipeline(out.pipeline, data.train);
  std::vector<std::int64_t> normal_rows;
  for (std::int64_t r = 0; r < data.train.row_count(); ++r) {
    if (data.train.labels[static_cast<std::size_t>(r)] == 0) normal_rows.push_back(r);
  }
  if (normal_rows.empty()) {
    throw ConfigError("training split has no normal-labeled rows to fit the autoencoder");
  }
  FeatureMatrix normals;
  normals.column_names = transformed.column_names;
  normals.values.resize(static_cast<Eigen::Index>(normal_rows.size()), transformed.col_count());
  for (std::size_t i = 0; i < normal_rows.size(); ++i) {
    normals.values.row(static_cast<Eigen::Index>(i)) = transformed.values.row(normal_rows[i]);
  }

  AutoencoderModel model =
      init_model(static_cast<int>(normals.col_count()), cfg.train.hidden_widths,
                 cfg.train.latent_dim, cfg.train.seed);
  auto [trained, trace] = train(std::move(model), normals, cfg.train);
  out.model = std::move(trained);
  out.trace = std::move(trace);

  const FeatureMatrix val = apply_pipeline(out.pipeline, data.val);
  const Eigen::VectorXd val_errors = reconstruction_errors(out.model, val);
  out.threshold = calibrate_threshold(
      std::vector<double>(val_errors.data(), val_errors.data() + val_errors.size()),
      data.val.labels, cfg.threshold);
  return out;
}

EvalResult evaluate_pipeline(const TrainedArtifacts& artifacts, const LabeledDataset& test) {
  std::int64_t unknown = 0;
  const FeatureMatrix matrix = apply_pipeline(artifacts.pipeline, test, &unknown);
  const Eigen::VectorXd errors = reconstruction_errors(artifacts.model, matrix);

  EvalResult result;
  result.errors.assign(errors.data(), errors.data() + errors.size());
  result.predictions = classify(result.errors, artifacts.threshold);
  result.report = evaluate(result.predictions, test.labels);
  if (unknown > 0) {
    result.report.warnings.push_back("unseen categories encoded as all-zero: " +
                                     std::to_string(unknown));
  }
  result.histogram = export_error_histogram(result.errors, test.labels);
  return result;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_artifact(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("missing artifact " + path.string() + "; run `iotguard train` first");
  }
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("artifact " + path.string() + " is not valid JSON: " + e.what());
  }
}

nlohmann::json base_manifest(const RunConfig& cfg, const std::string& command) {
  nlohmann::json m;
  m["command"] = command;
  m["config_hash"] = config_hash(cfg);
  m["seed"] = cfg.seed;
  m["pipeline"] = to_string(cfg.pipeline);
  m["artifacts"] = nlohmann::json::array();
  return m;
}

void finish_manifest(const RunConfig& cfg, nlohmann::json& manifest,
                     std::vector<std::string> artifacts) {
  std::sort(artifacts.begin(), artifacts.end());
  for (const auto& a : artifacts) manifest["artifacts"].push_back(a);
  manifest["artifacts"].push_back("manifest.json");
  write_json_file(cfg.output_dir / "manifest.json", manifest);
}

nlohmann::json macro_summary(const EvaluationReport& r) {
  return {{"accuracy", r.accuracy},
          {"false_positive_rate", r.false_positive_rate},
          {"macro_precision", r.macro_precision},
          {"macro_recall", r.macro_recall},
          {"macro_f1", r.macro_f1}};
}

// Shared by cmd_train/cmd_compare: writes one pipeline's training artifacts
// under dir and returns the artifact names.
nlohmann::json train_config_to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"seed", t.seed},
          {"optimizer", t.optimizer == TrainConfig::Optimizer::adam ? "adam" : "sgd"},
          {"hidden_widths", t.hidden_widths},
          {"latent_dim", t.latent_dim},
          {"validation_fraction", t.validation_fraction}};
}

std::vector<std::string> write_training_artifacts(const std::filesystem::path& dir,
                                                  const TrainedArtifacts& artifacts,
                                                  const TrainConfig& train_cfg) {
  std::vector<std::string> names;
  write_json_file(dir / "preprocess.json", fitted_pipeline_to_json(artifacts.pipeline));
  names.push_back("preprocess.json");
  nlohmann::json model = model_to_json(artifacts.model);
  model["train_config"] = train_config_to_json(train_cfg);
  write_json_file(dir / "model.json", model);
  names.push_back("model.json");
  write_text_file(dir / "trace.csv", trace_to_csv(artifacts.trace));
  names.push_back("trace.csv");
  write_json_file(dir / "threshold.json", threshold_to_json(artifacts.threshold));
  names.push_back("threshold.json");
  if (artifacts.pipeline.kind == PipelineKind::pca) {
    write_json_file(dir / "pca.json", pca_to_json(artifacts.pipeline.pca));
    names.push_back("pca.json");
  } else {
    write_json_file(dir / "plan.json", plan_to_json(artifacts.pipeline.plan));
    names.push_back("plan.json");
  }
  return names;
}

std::vector<std::string> write_eval_artifacts(const std::filesystem::path& dir,
                                              const EvalResult& result) {
  write_json_file(dir / "report.json", report_to_json(result.report));
  write_text_file(dir / "histogram.csv", histogram_to_csv(result.histogram));
  return {"report.json", "histogram.csv"};
}

TrainedArtifacts load_training_artifacts(const std::filesystem::path& dir) {
  TrainedArtifacts artifacts;
  artifacts.pipeline = fitted_pipeline_from_json(read_json_artifact(dir / "preprocess.json"));
  artifacts.model = model_from_json(read_json_artifact(dir / "model.json"));
  artifacts.threshold = threshold_from_json(read_json_artifact(dir / "threshold.json"));
  return artifacts;
}

}  // namespace

nlohmann::json cmd_stats(const RunConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  const FeatureStats stats = compute_feature_stats(data.train);
  write_json_file(cfg.output_dir / "stats.json", stats_to_json(stats));

  nlohmann::json manifest = base_manifest(cfg, "stats");
  manifest["provenance"] = to_string(cfg.pipeline);
  finish_manifest(cfg, manifest, {"stats.json"});
  return manifest;
}

nlohmann::json cmd_plan(const RunConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  // `plan` is an advisor command; a pca run config still emits the heuristic plan.
  const PipelineKind kind = cfg.pipeline == PipelineKind::advisor_llm
                                ? PipelineKind::advisor_llm
                                : PipelineKind::advisor_heuristic;
  std::string llm_error;
  const FittedPipeline pipeline = fit_pipeline(cfg, data.train, kind, &llm_error);
  write_json_file(cfg.output_dir / "plan.json", plan_to_json(pipeline.plan));
  std::vector<std::string> artifacts = {"plan.json"};
  if (kind == PipelineKind::advisor_llm) {
    write_text_file(cfg.output_dir / "prompt.txt",
                    build_advisor_prompt(compute_feature_stats(data.train)));
    artifacts.push_back("prompt.txt");
  }

  nlohmann::json manifest = base_manifest(cfg, "plan");
  manifest["provenance"] = pipeline.provenance;
  if (!llm_error.empty()) manifest["llm_fallback"] = llm_error;
  finish_manifest(cfg, manifest, std::move(artifacts));
  return manifest;
}

nlohmann::json cmd_train(const RunConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  const TrainedArtifacts artifacts = train_pipeline(cfg, data, cfg.pipeline);
  std::vector<std::string> names = write_training_artifacts(cfg.output_dir, artifacts, cfg.train);

  nlohmann::json manifest = base_manifest(cfg, "train");
  manifest["provenance"] = artifacts.pipeline.provenance;
  if (!artifacts.llm_error.empty()) manifest["llm_fallback"] = artifacts.llm_error;
  finish_manifest(cfg, manifest, std::move(names));
  return manifest;
}

nlohmann::json cmd_evaluate(const RunConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  const TrainedArtifacts artifacts = load_training_artifacts(cfg.output_dir);
  const EvalResult result = evaluate_pipeline(artifacts, data.test);
  std::vector<std::string> names = write_eval_artifacts(cfg.output_dir, result);

  nlohmann::json manifest = base_manifest(cfg, "evaluate");
  manifest["provenance"] = artifacts.pipeline.provenance;
  manifest["summary"] = macro_summary(result.report);
  finish_manifest(cfg, manifest, std::move(names));
  return manifest;
}

nlohmann::json cmd_compare(const RunConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  const PipelineKind advisor_kind = cfg.pipeline == PipelineKind::advisor_llm
                                        ? PipelineKind::advisor_llm
                                        : PipelineKind::advisor_heuristic;

  std::vector<std::string> artifacts;
  nlohmann::json compare;

  const TrainedArtifacts pca_trained = train_pipeline(cfg, data, PipelineKind::pca);
  const EvalResult pca_result = evaluate_pipeline(pca_trained, data.test);
  for (const auto& n : write_training_artifacts(cfg.output_dir / "pca", pca_trained, cfg.train)) {
    artifacts.push_back("pca/" + n);
  }
  for (const auto& n : write_eval_artifacts(cfg.output_dir / "pca", pca_result)) {
    artifacts.push_back("pca/" + n);
  }

  const TrainedArtifacts adv_trained = train_pipeline(cfg, data, advisor_kind);
  const EvalResult adv_result = evaluate_pipeline(adv_trained, data.test);
  for (const auto& n : write_training_artifacts(cfg.output_dir / "advisor", adv_trained, cfg.train)) {
    artifacts.push_back("advisor/" + n);
  }
  for (const auto& n : write_eval_artifacts(cfg.output_dir / "advisor", adv_result)) {
    artifacts.push_back("advisor/" + n);
  }

  compare["pca"] = macro_summary(pca_result.report);
  compare["advisor"] = macro_summary(adv_result.report);
  compare["provenance"] = {{"pca", pca_trained.pipeline.provenance},
                           {"advisor", adv_trained.pipeline.provenance}};
  compare["delta"] = {
      {"macro_f1", adv_result.report.macro_f1 - pca_result.report.macro_f1},
      {"macro_precision", adv_result.report.macro_precision - pca_result.report.macro_precision},
      {"macro_recall", adv_result.report.macro_recall - pca_result.report.macro_recall},
      {"accuracy", adv_result.report.accuracy - pca_result.report.accuracy}};
  write_json_file(cfg.output_dir / "compare.json", compare);
  artifacts.push_back("compare.json");

  nlohmann::json manifest = base_manifest(cfg, "compare");
  manifest["provenance"] = compare["provenance"];
  if (!adv_trained.llm_error.empty()) manifest["llm_fallback"] = adv_trained.llm_error;
  manifest["delta_macro_f1"] = compare["delta"]["macro_f1"];
  finish_manifest(cfg, manifest, std::move(artifacts));
  return manifest;
}

nlohmann::json cmd_explain(const RunConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  const TrainedArtifacts artifacts = load_training_artifacts(cfg.output_dir);

  std::int64_t unknown = 0;
  const FeatureMatrix matrix = apply_pipeline(artifacts.pipeline, data.test, &unknown);
  const Eigen::VectorXd errors = reconstruction_errors(artifacts.model, matrix);
  const std::vector<double> error_vec(errors.data(), errors.data() + errors.size());
  const std::vector<int> predictions = classify(error_vec, artifacts.threshold);

  std::vector<std::int64_t> flagged;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == 1) flagged.push_back(static_cast<std::int64_t>(i));
  }
  std::stable_sort(flagged.begin(), flagged.end(), [&](std::int64_t a, std::int64_t b) {
    if (error_vec[static_cast<std::size_t>(a)] != error_vec[static_cast<std::size_t>(b)]) {
      return error_vec[static_cast<std::size_t>(a)] > error_vec[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  if (cfg.explain.limit >= 0 &&
      static_cast<std::int64_t>(flagged.size()) > cfg.explain.limit) {
    flagged.resize(static_cast<std::size_t>(cfg.explain.limit));
  }

  std::unique_ptr<ChatTransport> transport;
  if (cfg.explain.use_llm) transport = make_transport(cfg.gateway);

  std::vector<ExplanationReport> reports;
  for (std::int64_t row : flagged) {
    const Eigen::VectorXd x = matrix.values.row(row).transpose();
    const auto [z, x_hat] = forward(artifacts.model, x);
    const AnomalyCase anomaly =
        extract_case(row, matrix.column_names, x, x_hat,
                     error_vec[static_cast<std::size_t>(row)], cfg.explain.top_k);
    reports.push_back(transport ? llm_explain(anomaly, cfg.gateway, *transport)
                                : offline_explain(anomaly));
  }

  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) out.push_back(explanation_to_json(r));
  write_json_file(cfg.output_dir / "explanations.json", out);
  write_text_file(cfg.output_dir / "explanations.md", explanations_to_markdown(reports));

  nlohmann::json manifest = base_manifest(cfg, "explain");
  manifest["provenance"] = artifacts.pipeline.provenance;
  manifest["explained"] = reports.size();
  manifest["source"] = cfg.explain.use_llm ? "llm" : "offline-template";
  finish_manifest(cfg, manifest, {"explanations.json", "explanations.md"});
  return manifest;
}

}  // namespace iotguard
