#include "iotguard/explainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "iotguard/errors.hpp"
#include "iotguard/numfmt.hpp"

namespace iotguard {

AnomalyCase extract_case(std::int64_t row_id, const std::vector<std::string>& columns,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat, double error,
                         int top_k) {
  if (x.size() != x_hat.size() ||
      static_cast<std::size_t>(x.size()) != columns.size()) {
    throw NumericError("extract_case: column/vector length mismatch");
  }
  const Eigen::VectorXd residuals = (x - x_hat).array().square().matrix();

  std::vector<std::size_t> order(columns.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = residuals(static_cast<Eigen::Index>(a));
    const double rb = residuals(static_cast<Eigen::Index>(b));
    if (ra != rb) return ra > rb;
    return a < b;
  });

  std::vector<bool> picked(columns.size(), false);
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(std::max(top_k, 0)),
                                                 columns.size());
  for (std::size_t i = 0; i < take; ++i) picked[order[i]] = true;

  // The paper's exemplar features are always part of the case when present.
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::string& name = columns[c];
    if (name == "src_bytes" || name == "dst_bytes" || name == "flag_REJ" ||
        name.rfind("protocol_type_", 0) == 0) {
      picked[c] = true;
    }
  }

  AnomalyCase out;
  out.row_id = row_id;
  out.reconstruction_error = error;
  for (std::size_t i : order) {
    if (!picked[i]) continue;
    out.salient_features.push_back(
        {columns[i], x(static_cast<Eigen::Index>(i)), residuals(static_cast<Eigen::Index>(i))});
  }
  return out;
}

std::string build_explanation_prompt(const AnomalyCase& anomaly) {
  std::string p;
  p += "You are a network security analyst reviewing an anomaly flagged by an autoencoder\n";
  p += "intrusion detector on preprocessed connection records.\n\n";
  p += "Reconstruction Error: " + format_double(anomaly.reconstruction_error) + "\n\n";
  p += "Features:\n";
  for (const auto& f : anomaly.salient_features) {
    p += "- " + f.name + "=" + format_double(f.value) + "\n";
  }
  p += "\nPrediction: Attack\n\n";
  p += "Respond with:\n";
  p += "(a) Generated Insight: the anomaly's probable cause and its implications.\n";
  p += "(b) Steps for Further Analysis: a numbered list of concrete follow-up checks.\n";
  return p;
}

namespace {

std::optional<double> feature_value(const AnomalyCase& anomaly, const std::string& name) {
  for (const auto& f : anomaly.salient_features) {
    if (f.name == name) return f.value;
  }
  return std::nullopt;
}

constexpr double kNearZero = 1e-3;   // scaled feature barely above zero
constexpr double kSmallValue = 1e-2; // scaled feature still near the bottom of its range

}  // namespace

ExplanationReport offline_explain(const AnomalyCase& anomaly) {
  ExplanationReport report;
  report.anomaly = anomaly;
  report.source = ExplanationReport::Source::offline_template;

  const auto src = feature_value(anomaly, "src_bytes");
  const auto dst = feature_value(anomaly, "dst_bytes");
  const auto tcp = feature_value(anomaly, "protocol_type_tcp");
  const auto rej = feature_value(anomaly, "flag_REJ");

  const bool src_tiny = src && *src < kNearZero;
  const bool rej_active = rej && *rej >= 0.5;
  const bool tcp_active = tcp && *tcp >= 0.5;
  const bool dst_zero = dst && *dst < 1e-12;
  const bool dst_small_nonzero = dst && *dst >= 1e-12 && *dst < kSmallValue;

  if (src_tiny && rej_active) {
    report.insight =
        "The connection carried almost no payload (src_bytes near zero) and was rejected "
        "(flag_REJ=1.0). This combination is consistent with a failed network scanning attempt "
        "probing a closed or filtered port.";
    report.analysis_steps = {
        "Firewall Logs: review rejected connections from this source around the same time.",
        "Port Analysis: identify which ports the rejected attempts targeted.",
        "Source IP Tracking: look for repeated rejected attempts from the same IP.",
    };
  } else if (src_tiny && dst_zero && !tcp_active) {
    report.insight =
        "The anomaly suggests minimal source bytes (src_bytes) and zero destination bytes "
        "(dst_bytes), with the TCP protocol inactive. This behavior might indicate low-volume "
        "traffic anomalies or stealth reconnaissance attempts where connections do not exchange "
        "meaningful data.";
    report.analysis_steps = {
        "Network Logs: verify the source IP and check for repeated connection attempts.",
        "Port Analysis: determine if specific ports are targeted.",
        "Threshold Adjustment: reassess detection thresholds for anomalies with near-zero "
        "payloads.",
    };
  } else if (src_tiny && dst_small_nonzero && tcp_active && !rej_active) {
    report.insight =
        "The anomaly indicates a very small src_bytes value and slightly higher dst_bytes while "
        "the TCP protocol is active, with no rejections. This could indicate port scanning or "
        "probing behavior where minimal traffic is sent to test open ports or system responses.";
    report.analysis_steps = {
        "Traffic Context: analyze surrounding traffic for sequential port scans.",
        "Protocol Analysis: verify whether the TCP handshake completes or drops midway.",
        "Source IP Tracking: look for repeated connections from the same IP.",
    };
  } else {
    const SalientFeature& top = anomaly.salient_features.empty()
                                    ? SalientFeature{"reconstruction_error",
                                                     anomaly.reconstruction_error, 0.0}
                                    : anomaly.salient_features.front();
    report.insight = "The reconstruction error is dominated by " + top.name + " (value " +
                     format_double(top.value) +
                     "), which deviates strongly from the traffic profile the model learned as "
                     "normal.";
    report.analysis_steps = {
        "Record Review: inspect the raw connection record behind this row.",
        "Baseline Comparison: compare " + top.name + " against its training distribution.",
        "Correlated Features: check features that normally move together with " + top.name + ".",
    };
  }
  return report;
}

ExplanationReport llm_explain(const AnomalyCase& anomaly, const GatewayConfig& cfg,
                              ChatTransport& transport) {
  ChatRequest req;
  req.model = cfg.model;
  req.temperature = 0.0;
  req.messages.push_back({"user", build_explanation_prompt(anomaly)});
  const ChatResponse resp = send_chat(req, cfg, transport);

  ExplanationReport report;
  report.anomaly = anomaly;
  report.source = ExplanationReport::Source::llm;
  report.insight = resp.content;

  std::istringstream lines(resp.content);
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) continue;
    if (std::isdigit(static_cast<unsigned char>(line[i]))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      if (j < line.size() && (line[j] == '.' || line[j] == ')')) {
        const std::string step = line.substr(j + 1);
        const std::size_t k = step.find_first_not_of(" \t");
        if (k != std::string::npos) report.analysis_steps.push_back(step.substr(k));
      }
    }
  }
  if (report.analysis_steps.empty()) {
    report.analysis_steps.push_back("Review the generated insight above.");
  }
  return report;
}

nlohmann::json explanation_to_json(const ExplanationReport& report) {
  nlohmann::json j;
  j["row_id"] = report.anomaly.row_id;
  j["reconstruction_error"] = report.anomaly.reconstruction_error;
  j["prediction"] = "attack";
  j["salient_features"] = nlohmann::json::array();
  for (const auto& f : report.anomaly.salient_features) {
    j["salient_features"].push_back(
        {{"name", f.name}, {"value", f.value}, {"squared_residual", f.squared_residual}});
  }
  j["insight"] = report.insight;
  j["analysis_steps"] = report.analysis_steps;
  j["source"] = report.source == ExplanationReport::Source::llm ? "llm" : "offline-template";
  return j;
}

std::string explanations_to_markdown(const std::vector<ExplanationReport>& reports) {
  std::string md = "# Anomaly explanations\n";
  for (const auto& r : reports) {
    md += "\n## Anomaly " + std::to_string(r.anomaly.row_id) + "\n\n";
    md += "**Reconstruction Error:** " + format_double(r.anomaly.reconstruction_error) + "\n\n";
    md += "**Features:**\n";
    for (const auto& f : r.anomaly.salient_features) {
      md += "- `" + f.name + "=" + format_double(f.value) + "`\n";
    }
    md += "\n**Prediction:** Attack\n\n";
    md += "**Generated Insight:** " + r.insight + "\n\n";
    md += "**Steps for Further Analysis:**\n";
    for (std::size_t i = 0; i < r.analysis_steps.size(); ++i) {
      md += std::to_string(i + 1) + ". " + r.analysis_steps[i] + "\n";
    }
    md += "\n*(source: ";
    md += r.source == ExplanationReport::Source::llm ? "llm" : "offline-template";
    md += ")*\n";
  }
  return md;
}

}  // namespace iotguard
