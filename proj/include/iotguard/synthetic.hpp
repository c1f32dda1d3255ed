#pragma once

#include <cstdint>
#include <string>

#include "iotguard/dataset.hpp"

namespace iotguard {

// Deterministic KDDCup99-format traffic generator for desk-scale experiments:
// 41-column connection records with benign traffic spread over the usual
// service profiles (web, mail, file, dns, interactive, icmp) and an anomaly
// minority dominated by slow reconnaissance probes of long-tail services,
// plus classic neptune/smurf floods. Byte columns carry the dataset's
// characteristic extreme outliers and the derived counters its usual
// redundancy.
struct SyntheticConfig {
  std::int64_t rows = 60000;
  std::uint64_t seed = 1;
  double attack_fraction = 0.2;
};

std::string generate_kdd_csv(const SyntheticConfig& cfg);
LabeledDataset generate_kdd_traffic(const SyntheticConfig& cfg);

}  // namespace iotguard
