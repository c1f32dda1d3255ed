#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "iotguard/gateway.hpp"

namespace iotguard {

struct SalientFeature {
  std::string name;
  double value = 0.0;
  double squared_residual = 0.0;
};

struct AnomalyCase {
  std::int64_t row_id = 0;
  double reconstruction_error = 0.0;
  // Sorted by squared residual, descending; ties keep column order.
  std::vector<SalientFeature> salient_features;
};

// Top-k columns by squared residual (x - x_hat)^2, always augmented with
// src_bytes, dst_bytes, protocol_type_* and flag_REJ when those columns exist.
AnomalyCase extract_case(std::int64_t row_id, const std::vector<std::string>& columns,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat, double error,
                         int top_k = 4);

// States the reconstruction error, each salient feature as name=value, the
// prediction, and asks for a probable cause plus numbered follow-up steps.
// Pure function of the case; goldens pin the exact bytes.
std::string build_explanation_prompt(const AnomalyCase& anomaly);

struct ExplanationReport {
  AnomalyCase anomaly;
  std::string insight;
  std::vector<std::string> analysis_steps;
  enum class Source { llm, offline_template } source = Source::offline_template;
};

// Deterministic rule-based explanation; total over every case.
ExplanationReport offline_explain(const AnomalyCase& anomaly);

// Sends the explanation prompt through the gateway and embeds the verbatim
// reply; numbered lines become the analysis steps.
ExplanationReport llm_explain(const AnomalyCase& anomaly, const GatewayConfig& cfg,
                              ChatTransport& transport);

nlohmann::json explanation_to_json(const ExplanationReport& report);
std::string explanations_to_markdown(const std::vector<ExplanationReport>& reports);

}  // namespace iotguard
