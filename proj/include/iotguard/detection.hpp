#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace iotguard {

struct ThresholdSpec {
  enum class Method { percentile, fixed } method = Method::percentile;
  double value = 95.0;  // percentile q, or the fixed threshold
};

struct ThresholdModel {
  double threshold = 0.0;
  ThresholdSpec spec;
  std::int64_t calibration_size = 0;  // normal rows used for calibration
};

// percentile(q): linearly interpolated q-th percentile of the errors over
// normal-labeled rows; fixed(v): v, labels ignored.
ThresholdModel calibrate_threshold(const std::vector<double>& errors,
                                   const std::vector<int>& labels, const ThresholdSpec& spec);

// error > threshold -> attack (1); ties stay normal.
std::vector<int> classify(const std::vector<double>& errors, const ThresholdModel& t);

// Attack is the positive class: FPR is true-normal traffic wrongly flagged.
struct EvaluationReport {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double false_positive_rate = 0.0;
  double precision_normal = 0.0, recall_normal = 0.0, f1_normal = 0.0;
  double precision_attack = 0.0, recall_attack = 0.0, f1_attack = 0.0;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  std::vector<std::string> warnings;
};

EvaluationReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth);

struct ErrorHistogram {
  struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t count_normal = 0;
    std::int64_t count_attack = 0;
  };
  std::vector<Bin> bins;
};

// Equal-width bins over [0, max error], split by true label; the max value
// lands in the last bin.
ErrorHistogram export_error_histogram(const std::vector<double>& errors,
                                      const std::vector<int>& truth, int bin_count = 50);

nlohmann::json report_to_json(const EvaluationReport& r);
nlohmann::json threshold_to_json(const ThresholdModel& t);
ThresholdModel threshold_from_json(const nlohmann::json& j);
std::string histogram_to_csv(const ErrorHistogram& h);

}  // namespace iotguard
