#include "iotguard/advisor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "iotguard/errors.hpp"
#include "iotguard/numfmt.hpp"

namespace iotguard {

FeatureStats compute_feature_stats(const FeatureMatrix& m, const std::vector<FeatureKind>& kinds) {
  const Eigen::Index rows = m.row_count();
  const Eigen::Index cols = m.col_count();
  if (rows < 2) throw NumericError("compute_feature_stats: need at least 2 rows");
  if (static_cast<Eigen::Index>(kinds.size()) != cols) {
    throw NumericError("compute_feature_stats: kinds/columns length mismatch");
  }

  FeatureStats stats;
  stats.rows = rows;

  Eigen::VectorXd mean = m.values.colwise().mean();
  Eigen::VectorXd variance(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    variance(c) = (m.values.col(c).array() - mean(c)).square().sum() / static_cast<double>(rows);
  }

  for (Eigen::Index c = 0; c < cols; ++c) {
    ColumnStats cs;
    cs.name = m.column_names[static_cast<std::size_t>(c)];
    cs.kind = kinds[static_cast<std::size_t>(c)];
    cs.variance = variance(c);
    std::int64_t zeros = 0;
    std::set<double> distinct;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double v = m.values(r, c);
      if (v == 0.0) ++zeros;
      distinct.insert(v);
    }
    cs.sparsity = static_cast<double>(zeros) / static_cast<double>(rows);
    cs.cardinality = static_cast<std::int64_t>(distinct.size());
    stats.columns.push_back(std::move(cs));
  }

  // Pearson r over continuous column pairs; constant columns correlate 0.
  std::vector<Eigen::Index> continuous;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (kinds[static_cast<std::size_t>(c)] == FeatureKind::continuous) continuous.push_back(c);
  }
  for (std::size_t a = 0; a < continuous.size(); ++a) {
    for (std::size_t b = a + 1; b < continuous.size(); ++b) {
      const Eigen::Index ca = continuous[a];
      const Eigen::Index cb = continuous[b];
      double r = 0.0;
      if (variance(ca) > 0.0 && variance(cb) > 0.0) {
        const double cov =
            ((m.values.col(ca).array() - mean(ca)) * (m.values.col(cb).array() - mean(cb))).sum() /
            static_cast<double>(rows);
        r = cov / std::sqrt(variance(ca) * variance(cb));
        r = std::clamp(r, -1.0, 1.0);
      }
      if (std::fabs(r) > 0.5) {
        stats.columns[static_cast<std::size_t>(ca)].top_correlations.push_back(
            {m.column_names[static_cast<std::size_t>(cb)], r});
        stats.columns[static_cast<std::size_t>(cb)].top_correlations.push_back(
            {m.column_names[static_cast<std::size_t>(ca)], r});
      }
    }
  }
  for (auto& cs : stats.columns) {
    std::stable_sort(cs.top_correlations.begin(), cs.top_correlations.end(),
                     [](const auto& x, const auto& y) {
                       if (std::fabs(x.second) != std::fabs(y.second)) {
                         return std::fabs(x.second) > std::fabs(y.second);
                       }
                       return x.first < y.first;
                     });
  }
  return stats;
}

FeatureStats compute_feature_stats(const LabeledDataset& ds) {
  std::vector<FeatureKind> kinds;
  for (const auto& c : ds.schema.columns) kinds.push_back(c.kind);
  return compute_feature_stats(to_feature_matrix(ds), kinds);
}

namespace {

// Union-find over column indices for correlation grouping.
struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::string merge_name(const std::vector<std::string>& sorted_columns) {
  std::string name = "avg(";
  for (std::size_t i = 0; i < sorted_columns.size(); ++i) {
    if (i) name += ',';
    name += sorted_columns[i];
  }
  name += ')';
  return name;
}

}  // namespace

PreprocessPlan heuristic_advise(const FeatureStats& stats, const AdvisorThresholds& t) {
  PreprocessPlan plan;
  plan.provenance = PreprocessPlan::Provenance::heuristic;

  std::map<std::string, std::size_t> index_by_name;
  for (std::size_t i = 0; i < stats.columns.size(); ++i) {
    index_by_name[stats.columns[i].name] = i;
  }

  std::set<std::string> dropped;
  for (const auto& [name, idx] : index_by_name) {
    if (stats.columns[idx].variance < t.low_variance_cutoff) {
      plan.steps.push_back(drop_step(name));
      dropped.insert(name);
    }
  }

  auto survives = [&](const ColumnStats& cs) { return !dropped.count(cs.name); };

  // Transitive closure of the r > cutoff graph over surviving continuous columns.
  DisjointSet groups(stats.columns.size());
  for (std::size_t i = 0; i < stats.columns.size(); ++i) {
    const ColumnStats& cs = stats.columns[i];
    if (cs.kind != FeatureKind::continuous || !survives(cs)) continue;
    for (const auto& [other, r] : cs.top_correlations) {
      if (r <= t.high_correlation_cutoff) continue;
      const auto it = index_by_name.find(other);
      if (it == index_by_name.end()) continue;
      const ColumnStats& os = stats.columns[it->second];
      if (os.kind != FeatureKind::continuous || !survives(os)) continue;
      groups.unite(i, it->second);
    }
  }
  std::map<std::size_t, std::vector<std::string>> members;
  for (std::size_t i = 0; i < stats.columns.size(); ++i) {
    const ColumnStats& cs = stats.columns[i];
    if (cs.kind != FeatureKind::continuous || !survives(cs)) continue;
    members[groups.find(i)].push_back(cs.name);
  }
  std::set<std::string> merged;
  std::vector<TransformStep> merge_steps;
  std::vector<std::string> merged_outputs;
  for (auto& [root, columns] : members) {
    if (columns.size() < 2) continue;
    std::sort(columns.begin(), columns.end());
    for (const auto& c : columns) merged.insert(c);
    const std::string name = merge_name(columns);
    merged_outputs.push_back(name);
    merge_steps.push_back(merge_average_step(columns, name));
  }
  std::stable_sort(merge_steps.begin(), merge_steps.end(),
                   [](const TransformStep& a, const TransformStep& b) {
                     return a.columns.front() < b.columns.front();
                   });
  for (auto& s : merge_steps) plan.steps.push_back(std::move(s));

  std::set<std::string> binarized;
  for (const auto& [name, idx] : index_by_name) {
    const ColumnStats& cs = stats.columns[idx];
    if (cs.kind != FeatureKind::continuous || !survives(cs) || merged.count(name)) continue;
    if (cs.sparsity > t.sparsity_cutoff) {
      plan.steps.push_back(binarize_step(name, 0.0));
      binarized.insert(name);
    }
  }

  for (const auto& [name, idx] : index_by_name) {
    const ColumnStats& cs = stats.columns[idx];
    if (cs.kind == FeatureKind::categorical && survives(cs)) {
      plan.steps.push_back(one_hot_step(name));
    }
  }

  std::vector<std::string> scale_columns;
  for (const auto& [name, idx] : index_by_name) {
    const ColumnStats& cs = stats.columns[idx];
    if (cs.kind != FeatureKind::continuous || !survives(cs)) continue;
    if (merged.count(name) || binarized.count(name)) continue;
    scale_columns.push_back(name);
  }
  for (const auto& name : merged_outputs) scale_columns.push_back(name);
  std::sort(scale_columns.begin(), scale_columns.end());
  if (!scale_columns.empty()) plan.steps.push_back(min_max_step(scale_columns));

  return plan;
}

std::string build_advisor_prompt(const FeatureStats& stats) {
  std::string p;
  p += "You advise on tabular preprocessing for autoencoder-based network anomaly detection.\n";
  p += "Training-split feature statistics (" + std::to_string(stats.rows) + " rows):\n\n";
  p += "name | kind | variance | sparsity | cardinality | top_correlation\n";
  for (const auto& cs : stats.columns) {
    p += cs.name;
    p += " | ";
    p += to_string(cs.kind);
    p += " | ";
    p += format_double(cs.variance);
    p += " | ";
    p += format_double(cs.sparsity);
    p += " | ";
    p += std::to_string(cs.cardinality);
    p += " | ";
    if (cs.top_correlations.empty()) {
      p += "none";
    } else {
      p += cs.top_correlations.front().first + " (r=" +
           format_double(cs.top_correlations.front().second) + ")";
    }
    p += '\n';
  }
  p +=
      "\nPropose a preprocessing plan that drops uninformative columns, merges redundant ones,\n"
      "binarizes sparse counters, encodes categoricals, and scales what remains.\n"
      "Allowed ops, applied in the order you list them:\n"
      "  drop, binarize, merge_average, one_hot, min_max\n"
      "Plan JSON schema:\n"
      "{\"steps\": [\n"
      "  {\"op\": \"drop\", \"column\": \"c\"},\n"
      "  {\"op\": \"binarize\", \"column\": \"c\", \"threshold\": 0.0},\n"
      "  {\"op\": \"merge_average\", \"columns\": [\"a\", \"b\"], \"new_name\": \"avg(a,b)\"},\n"
      "  {\"op\": \"one_hot\", \"column\": \"c\"},\n"
      "  {\"op\": \"min_max\", \"columns\": [\"a\", \"b\"]}\n"
      "], \"provenance\": \"llm\"}\n"
      "Reply with exactly one fenced JSON code block matching that schema and nothing else.\n";
  return p;
}

PreprocessPlan parse_advisor_response(const std::string& text,
                                      const std::vector<std::string>& known_columns,
                                      const std::vector<std::string>& categorical_columns) {
  const std::size_t fence = text.find("```");
  if (fence == std::string::npos) {
    throw ParseError("advisor response contains no fenced JSON block");
  }
  std::size_t body = text.find('\n', fence);
  if (body == std::string::npos) throw ParseError("advisor response fence is unterminated");
  ++body;
  const std::size_t close = text.find("```", body);
  if (close == std::string::npos) throw ParseError("advisor response fence is unterminated");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.substr(body, close - body));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("advisor response is not valid JSON: ") + e.what());
  }
  PreprocessPlan plan = plan_from_json(j);
  plan.provenance = PreprocessPlan::Provenance::llm;
  validate_plan(plan, known_columns, categorical_columns);
  return plan;
}

nlohmann::json stats_to_json(const FeatureStats& stats) {
  nlohmann::json j;
  j["rows"] = stats.rows;
  j["columns"] = nlohmann::json::array();
  for (const auto& cs : stats.columns) {
    nlohmann::json cj;
    cj["name"] = cs.name;
    cj["kind"] = to_string(cs.kind);
    cj["variance"] = cs.variance;
    cj["sparsity"] = cs.sparsity;
    cj["cardinality"] = cs.cardinality;
    cj["top_correlations"] = nlohmann::json::array();
    for (const auto& [other, r] : cs.top_correlations) {
      cj["top_correlations"].push_back({{"column", other}, {"r", r}});
    }
    j["columns"].push_back(cj);
  }
  return j;
}

}  // namespace iotguard
