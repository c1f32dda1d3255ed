#include "iotguard/detection.hpp"

#include <algorithm>
#include <cmath>

#include "iotguard/errors.hpp"
#include "iotguard/numfmt.hpp"

namespace iotguard {

ThresholdModel calibrate_threshold(const std::vector<double>& errors,
                                   const std::vector<int>& labels, const ThresholdSpec& spec) {
  ThresholdModel t;
  t.spec = spec;
  if (spec.method == ThresholdSpec::Method::fixed) {
    t.threshold = spec.value;
    return t;
  }

  if (errors.size() != labels.size()) {
    throw NumericError("calibrate_threshold: errors/labels length mismatch");
  }
  if (spec.value < 0.0 || spec.value > 100.0) {
    throw ConfigError("percentile must be in [0, 100]");
  }
  std::vector<double> normal;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (labels[i] == 0) normal.push_back(errors[i]);
  }
  if (normal.empty()) {
    throw NumericError("calibrate_threshold: no normal-labeled rows in calibration set");
  }
  std::sort(normal.begin(), normal.end());

  // Linear interpolation between closest ranks.
  const double rank = spec.value / 100.0 * static_cast<double>(normal.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, normal.size() - 1);
  const double frac = rank - std::floor(rank);
  t.threshold = normal[lo] + frac * (normal[hi] - normal[lo]);
  t.calibration_size = static_cast<std::int64_t>(normal.size());
  return t;
}

std::vector<int> classify(const std::vector<double>& errors, const ThresholdModel& t) {
  std::vector<int> labels(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    labels[i] = errors[i] > t.threshold ? 1 : 0;
  }
  return labels;
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace

EvaluationReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw NumericError("evaluate: prediction/truth length mismatch");
  EvaluationReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] == 1) {
      if (pred[i] == 1) ++r.tp; else ++r.fn;
    } else {
      if (pred[i] == 1) ++r.fp; else ++r.tn;
    }
  }
  const double total = static_cast<double>(r.tp + r.fp + r.tn + r.fn);
  r.accuracy = ratio(static_cast<double>(r.tp + r.tn), total);
  r.false_positive_rate = ratio(static_cast<double>(r.fp), static_cast<double>(r.fp + r.tn));

  r.precision_attack = ratio(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fp));
  r.recall_attack = ratio(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fn));
  r.f1_attack = f1(r.precision_attack, r.recall_attack);

  r.precision_normal = ratio(static_cast<double>(r.tn), static_cast<double>(r.tn + r.fn));
  r.recall_normal = ratio(static_cast<double>(r.tn), static_cast<double>(r.tn + r.fp));
  r.f1_normal = f1(r.precision_normal, r.recall_normal);

  r.macro_precision = (r.precision_normal + r.precision_attack) / 2.0;
  r.macro_recall = (r.recall_normal + r.recall_attack) / 2.0;
  r.macro_f1 = (r.f1_normal + r.f1_attack) / 2.0;
  return r;
}

ErrorHistogram export_error_histogram(const std::vector<double>& errors,
                                      const std::vector<int>& truth, int bin_count) {
  if (errors.empty()) throw NumericError("export_error_histogram: empty input");
  if (errors.size() != truth.size()) {
    throw NumericError("export_error_histogram: errors/truth length mismatch");
  }
  if (bin_count < 1) throw ConfigError("bin_count must be >= 1");

  const double max_error = *std::max_element(errors.begin(), errors.end());
  const double width = max_error / static_cast<double>(bin_count);

  ErrorHistogram h;
  h.bins.resize(static_cast<std::size_t>(bin_count));
  for (int b = 0; b < bin_count; ++b) {
    h.bins[static_cast<std::size_t>(b)].lo = width * static_cast<double>(b);
    h.bins[static_cast<std::size_t>(b)].hi = width * static_cast<double>(b + 1);
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>(errors[i] / width)
                                : static_cast<std::size_t>(bin_count - 1);
    b = std::min(b, static_cast<std::size_t>(bin_count - 1));
    if (truth[i] == 1) {
      ++h.bins[b].count_attack;
    } else {
      ++h.bins[b].count_normal;
    }
  }
  return h;
}

nlohmann::json report_to_json(const EvaluationReport& r) {
  nlohmann::json j;
  j["confusion"] = {{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}};
  j["accuracy"] = r.accuracy;
  j["false_positive_rate"] = r.false_positive_rate;
  j["normal"] = {{"precision", r.precision_normal},
                 {"recall", r.recall_normal},
                 {"f1", r.f1_normal}};
  j["attack"] = {{"precision", r.precision_attack},
                 {"recall", r.recall_attack},
                 {"f1", r.f1_attack}};
  j["macro"] = {{"precision", r.macro_precision},
                {"recall", r.macro_recall},
                {"f1", r.macro_f1}};
  j["warnings"] = r.warnings;
  return j;
}

nlohmann::json threshold_to_json(const ThresholdModel& t) {
  nlohmann::json j;
  j["threshold"] = t.threshold;
  j["method"] = t.spec.method == ThresholdSpec::Method::percentile ? "percentile" : "fixed";
  j["value"] = t.spec.value;
  j["calibration_size"] = t.calibration_size;
  return j;
}

ThresholdModel threshold_from_json(const nlohmann::json& j) {
  ThresholdModel t;
  try {
    t.threshold = j.at("threshold").get<double>();
    const std::string method = j.at("method").get<std::string>();
    if (method == "percentile") {
      t.spec.method = ThresholdSpec::Method::percentile;
    } else if (method == "fixed") {
      t.spec.method = ThresholdSpec::Method::fixed;
    } else {
      throw ParseError("unknown threshold method: " + method);
    }
    t.spec.value = j.at("value").get<double>();
    t.calibration_size = j.value("calibration_size", std::int64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed threshold model: ") + e.what());
  }
  return t;
}

std::string histogram_to_csv(const ErrorHistogram& h) {
  std::string out = "bin_lo,bin_hi,count_normal,count_attack\n";
  for (const auto& b : h.bins) {
    out += format_csv(b.lo);
    out += ',';
    out += format_csv(b.hi);
    out += ',';
    out += std::to_string(b.count_normal);
    out += ',';
    out += std::to_string(b.count_attack);
    out += '\n';
  }
  return out;
}

}  // namespace iotguard
