#include "iotguard/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "iotguard/errors.hpp"

namespace iotguard {

int FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int FeatureMatrix::require_column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw ParseError("unknown column: " + name);
  return idx;
}

FeatureMatrix to_feature_matrix(const LabeledDataset& ds) {
  FeatureMatrix m;
  m.values = ds.rows;
  for (const auto& col : ds.schema.columns) {
    m.column_names.push_back(col.name);
    if (col.kind == FeatureKind::categorical) {
      m.categorical_vocab[col.name] = ds.schema.vocabularies.at(col.name);
    }
  }
  return m;
}

MinMaxScaler fit_minmax(const FeatureMatrix& m, const std::vector<std::string>& columns) {
  if (m.row_count() == 0) throw ParseError("fit_minmax: empty matrix");
  MinMaxScaler s;
  for (const auto& name : columns) {
    const int c = m.require_column(name);
    s.columns.push_back(name);
    s.min.push_back(m.values.col(c).minCoeff());
    s.max.push_back(m.values.col(c).maxCoeff());
  }
  return s;
}

namespace {

void scale_column(Eigen::Ref<Eigen::VectorXd> col, double lo, double hi) {
  if (hi <= lo) {
    col.setZero();
    return;
  }
  const double range = hi - lo;
  for (Eigen::Index r = 0; r < col.size(); ++r) {
    col(r) = std::clamp((col(r) - lo) / range, 0.0, 1.0);
  }
}

}  // namespace

FeatureMatrix apply_minmax(const FeatureMatrix& m, const MinMaxScaler& s) {
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < s.columns.size(); ++i) {
    const int c = out.require_column(s.columns[i]);
    scale_column(out.values.col(c), s.min[i], s.max[i]);
  }
  return out;
}

OneHotEncoder fit_onehot(const LabeledDataset& ds) {
  OneHotEncoder enc;
  for (const auto& col : ds.schema.columns) {
    if (col.kind != FeatureKind::categorical) continue;
    enc.columns.push_back({col.name, ds.schema.vocabularies.at(col.name)});
  }
  return enc;
}

FeatureMatrix apply_onehot(const LabeledDataset& ds, const OneHotEncoder& enc,
                           std::int64_t* unknown_categories) {
  FeatureMatrix m = to_feature_matrix(ds);
  PreprocessPlan plan;
  for (const auto& [name, vocab] : enc.columns) plan.steps.push_back(one_hot_step(name));
  FittedPlan fitted;
  fitted.provenance = PreprocessPlan::Provenance::manual;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    FittedStep fs;
    fs.step = plan.steps[i];
    fs.vocabulary = enc.columns[i].second;
    fitted.steps.push_back(std::move(fs));
  }
  return apply_fitted_plan(fitted, m, unknown_categories);
}

TransformStep drop_step(std::string column) {
  TransformStep s;
  s.op = TransformStep::Op::drop;
  s.column = std::move(column);
  return s;
}

TransformStep binarize_step(std::string column, double threshold) {
  TransformStep s;
  s.op = TransformStep::Op::binarize;
  s.column = std::move(column);
  s.threshold = threshold;
  return s;
}

TransformStep merge_average_step(std::vector<std::string> columns, std::string new_name) {
  TransformStep s;
  s.op = TransformStep::Op::merge_average;
  s.columns = std::move(columns);
  s.new_name = std::move(new_name);
  return s;
}

TransformStep one_hot_step(std::string column) {
  TransformStep s;
  s.op = TransformStep::Op::one_hot;
  s.column = std::move(column);
  return s;
}

TransformStep min_max_step(std::vector<std::string> columns) {
  TransformStep s;
  s.op = TransformStep::Op::min_max;
  s.columns = std::move(columns);
  return s;
}

namespace {

const char* op_name(TransformStep::Op op) {
  switch (op) {
    case TransformStep::Op::drop: return "drop";
    case TransformStep::Op::binarize: return "binarize";
    case TransformStep::Op::merge_average: return "merge_average";
    case TransformStep::Op::one_hot: return "one_hot";
    case TransformStep::Op::min_max: return "min_max";
  }
  return "?";
}

// Column-oriented working form; plan steps splice columns in and out.
struct Working {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> cols;
  std::unordered_map<std::string, std::vector<std::string>> vocab;

  int index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

Working to_working(const FeatureMatrix& m) {
  Working w;
  w.names = m.column_names;
  w.vocab = m.categorical_vocab;
  w.cols.reserve(static_cast<std::size_t>(m.col_count()));
  for (Eigen::Index c = 0; c < m.col_count(); ++c) w.cols.push_back(m.values.col(c));
  return w;
}

FeatureMatrix from_working(const Working& w) {
  FeatureMatrix m;
  m.column_names = w.names;
  m.categorical_vocab = w.vocab;
  const Eigen::Index rows = w.cols.empty() ? 0 : w.cols.front().size();
  m.values.resize(rows, static_cast<Eigen::Index>(w.cols.size()));
  for (std::size_t c = 0; c < w.cols.size(); ++c) {
    m.values.col(static_cast<Eigen::Index>(c)) = w.cols[c];
  }
  return m;
}

[[noreturn]] void step_error(std::size_t step_index, const TransformStep& step,
                             const std::string& detail) {
  throw ParseError("step " + std::to_string(step_index) + " (" + op_name(step.op) + "): " + detail);
}

int require_working_column(const Working& w, std::size_t step_index, const TransformStep& step,
                           const std::string& name) {
  const int idx = w.index(name);
  if (idx < 0) step_error(step_index, step, "unknown column '" + name + "'");
  return idx;
}

// fitting=true captures scaler ranges / vocabularies from the current state;
// fitting=false replays the captured ones.
void apply_step(Working& w, FittedStep& fs, std::size_t step_index, bool fitting,
                std::int64_t* unknown_categories) {
  const TransformStep& step = fs.step;
  switch (step.op) {
    case TransformStep::Op::drop: {
      const int idx = require_working_column(w, step_index, step, step.column);
      w.names.erase(w.names.begin() + idx);
      w.cols.erase(w.cols.begin() + idx);
      w.vocab.erase(step.column);
      break;
    }
    case TransformStep::Op::binarize: {
      const int idx = require_working_column(w, step_index, step, step.column);
      Eigen::VectorXd& col = w.cols[static_cast<std::size_t>(idx)];
      for (Eigen::Index r = 0; r < col.size(); ++r) {
        col(r) = col(r) > step.threshold ? 1.0 : 0.0;
      }
      w.vocab.erase(step.column);
      break;
    }
    case TransformStep::Op::merge_average: {
      if (step.columns.empty()) step_error(step_index, step, "empty column list");
      std::vector<int> idxs;
      for (const auto& name : step.columns) {
        idxs.push_back(require_working_column(w, step_index, step, name));
      }
      Eigen::VectorXd merged = Eigen::VectorXd::Zero(w.cols.front().size());
      for (int idx : idxs) merged += w.cols[static_cast<std::size_t>(idx)];
      merged /= static_cast<double>(idxs.size());

      const int anchor = *std::min_element(idxs.begin(), idxs.end());
      std::sort(idxs.rbegin(), idxs.rend());
      for (int idx : idxs) {
        w.vocab.erase(w.names[static_cast<std::size_t>(idx)]);
        w.names.erase(w.names.begin() + idx);
        w.cols.erase(w.cols.begin() + idx);
      }
      w.names.insert(w.names.begin() + anchor, step.new_name);
      w.cols.insert(w.cols.begin() + anchor, std::move(merged));
      break;
    }
    case TransformStep::Op::one_hot: {
      const int idx = require_working_column(w, step_index, step, step.column);
      const auto current_vocab = w.vocab.find(step.column);
      if (current_vocab == w.vocab.end()) {
        step_error(step_index, step, "column '" + step.column + "' has no vocabulary");
      }
      if (fitting) fs.vocabulary = current_vocab->second;

      std::unordered_map<std::string, std::size_t> fitted_index;
      for (std::size_t i = 0; i < fs.vocabulary.size(); ++i) fitted_index[fs.vocabulary[i]] = i;

      const Eigen::VectorXd source = w.cols[static_cast<std::size_t>(idx)];
      std::vector<Eigen::VectorXd> slices(fs.vocabulary.size(),
                                          Eigen::VectorXd::Zero(source.size()));
      for (Eigen::Index r = 0; r < source.size(); ++r) {
        const auto raw = static_cast<std::size_t>(source(r));
        if (raw >= current_vocab->second.size()) {
          if (unknown_categories) ++*unknown_categories;
          continue;
        }
        const auto hit = fitted_index.find(current_vocab->second[raw]);
        if (hit == fitted_index.end()) {
          if (unknown_categories) ++*unknown_categories;
          continue;
        }
        slices[hit->second](r) = 1.0;
      }

      w.names.erase(w.names.begin() + idx);
      w.cols.erase(w.cols.begin() + idx);
      w.vocab.erase(step.column);
      for (std::size_t i = 0; i < fs.vocabulary.size(); ++i) {
        w.names.insert(w.names.begin() + idx + static_cast<int>(i),
                       step.column + "_" + fs.vocabulary[i]);
        w.cols.insert(w.cols.begin() + idx + static_cast<int>(i), std::move(slices[i]));
      }
      break;
    }
    case TransformStep::Op::min_max: {
      if (fitting) {
        fs.scaler.columns.clear();
        fs.scaler.min.clear();
        fs.scaler.max.clear();
        for (const auto& name : step.columns) {
          const int idx = require_working_column(w, step_index, step, name);
          fs.scaler.columns.push_back(name);
          fs.scaler.min.push_back(w.cols[static_cast<std::size_t>(idx)].minCoeff());
          fs.scaler.max.push_back(w.cols[static_cast<std::size_t>(idx)].maxCoeff());
        }
      }
      for (std::size_t i = 0; i < fs.scaler.columns.size(); ++i) {
        const int idx = require_working_column(w, step_index, step, fs.scaler.columns[i]);
        scale_column(w.cols[static_cast<std::size_t>(idx)], fs.scaler.min[i], fs.scaler.max[i]);
      }
      break;
    }
  }
}

void check_unique_names(const std::vector<std::string>& names) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ParseError("duplicate output column name: " + n);
  }
}

}  // namespace

FittedPlan fit_plan(const PreprocessPlan& plan, const FeatureMatrix& train) {
  Working w = to_working(train);
  FittedPlan fitted;
  fitted.provenance = plan.provenance;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    FittedStep fs;
    fs.step = plan.steps[i];
    apply_step(w, fs, i, /*fitting=*/true, nullptr);
    fitted.steps.push_back(std::move(fs));
  }
  check_unique_names(w.names);
  return fitted;
}

FeatureMatrix apply_fitted_plan(const FittedPlan& plan, const FeatureMatrix& m,
                                std::int64_t* unknown_categories) {
  Working w = to_working(m);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    FittedStep fs = plan.steps[i];
    apply_step(w, fs, i, /*fitting=*/false, unknown_categories);
  }
  check_unique_names(w.names);
  return from_working(w);
}

FeatureMatrix apply_plan(const FeatureMatrix& m, const PreprocessPlan& plan) {
  return apply_fitted_plan(fit_plan(plan, m), m, nullptr);
}

void validate_plan(const PreprocessPlan& plan, std::vector<std::string> columns,
                   const std::vector<std::string>& categorical_columns) {
  std::set<std::string> live(columns.begin(), columns.end());
  std::set<std::string> categorical(categorical_columns.begin(), categorical_columns.end());
  std::vector<std::string> prefixes;  // one_hot outputs are valid under "<col>_"

  auto known = [&](const std::string& name) {
    if (live.count(name)) return true;
    for (const auto& p : prefixes) {
      if (name.size() > p.size() && name.compare(0, p.size(), p) == 0) return true;
    }
    return false;
  };
  auto require = [&](std::size_t i, const TransformStep& s, const std::string& name) {
    if (!known(name)) {
      throw ParseError("step " + std::to_string(i) + " (" + op_name(s.op) + "): unknown column '" +
                       name + "'");
    }
  };

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const TransformStep& s = plan.steps[i];
    switch (s.op) {
      case TransformStep::Op::drop:
        require(i, s, s.column);
        live.erase(s.column);
        break;
      case TransformStep::Op::binarize:
        require(i, s, s.column);
        break;
      case TransformStep::Op::merge_average:
        if (s.columns.empty()) {
          throw ParseError("step " + std::to_string(i) + " (merge_average): empty column list");
        }
        for (const auto& c : s.columns) {
          require(i, s, c);
          live.erase(c);
        }
        live.insert(s.new_name);
        break;
      case TransformStep::Op::one_hot:
        require(i, s, s.column);
        if (!categorical.empty() && !categorical.count(s.column)) {
          throw ParseError("step " + std::to_string(i) + " (one_hot): column '" + s.column +
                           "' is not categorical");
        }
        live.erase(s.column);
        prefixes.push_back(s.column + "_");
        break;
      case TransformStep::Op::min_max:
        for (const auto& c : s.columns) require(i, s, c);
        break;
    }
  }
}

namespace {

const std::unordered_map<std::string, TransformStep::Op>& op_table() {
  static const std::unordered_map<std::string, TransformStep::Op> table = {
      {"drop", TransformStep::Op::drop},
      {"binarize", TransformStep::Op::binarize},
      {"merge_average", TransformStep::Op::merge_average},
      {"one_hot", TransformStep::Op::one_hot},
      {"min_max", TransformStep::Op::min_max},
  };
  return table;
}

const char* provenance_name(PreprocessPlan::Provenance p) {
  switch (p) {
    case PreprocessPlan::Provenance::heuristic: return "heuristic";
    case PreprocessPlan::Provenance::llm: return "llm";
    case PreprocessPlan::Provenance::manual: return "manual";
  }
  return "manual";
}

PreprocessPlan::Provenance provenance_from_string(const std::string& s) {
  if (s == "heuristic") return PreprocessPlan::Provenance::heuristic;
  if (s == "llm") return PreprocessPlan::Provenance::llm;
  if (s == "manual") return PreprocessPlan::Provenance::manual;
  throw ParseError("unknown plan provenance: " + s);
}

nlohmann::json step_to_json(const TransformStep& s) {
  nlohmann::json j;
  j["op"] = op_name(s.op);
  switch (s.op) {
    case TransformStep::Op::drop:
    case TransformStep::Op::one_hot:
      j["column"] = s.column;
      break;
    case TransformStep::Op::binarize:
      j["column"] = s.column;
      j["threshold"] = s.threshold;
      break;
    case TransformStep::Op::merge_average:
      j["columns"] = s.columns;
      j["new_name"] = s.new_name;
      break;
    case TransformStep::Op::min_max:
      j["columns"] = s.columns;
      break;
  }
  return j;
}

TransformStep step_from_json(const nlohmann::json& j) {
  TransformStep s;
  const std::string op = j.at("op").get<std::string>();
  const auto it = op_table().find(op);
  if (it == op_table().end()) throw ParseError("unknown plan op: " + op);
  s.op = it->second;
  switch (s.op) {
    case TransformStep::Op::drop:
    case TransformStep::Op::one_hot:
      s.column = j.at("column").get<std::string>();
      break;
    case TransformStep::Op::binarize:
      s.column = j.at("column").get<std::string>();
      s.threshold = j.value("threshold", 0.0);
      break;
    case TransformStep::Op::merge_average:
      s.columns = j.at("columns").get<std::vector<std::string>>();
      s.new_name = j.at("new_name").get<std::string>();
      break;
    case TransformStep::Op::min_max:
      s.columns = j.at("columns").get<std::vector<std::string>>();
      break;
  }
  return s;
}

}  // namespace

nlohmann::json plan_to_json(const PreprocessPlan& plan) {
  nlohmann::json j;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : plan.steps) j["steps"].push_back(step_to_json(s));
  j["provenance"] = provenance_name(plan.provenance);
  return j;
}

PreprocessPlan plan_from_json(const nlohmann::json& j) {
  PreprocessPlan plan;
  try {
    for (const auto& sj : j.at("steps")) plan.steps.push_back(step_from_json(sj));
    plan.provenance = provenance_from_string(j.value("provenance", "manual"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed preprocess plan: ") + e.what());
  }
  return plan;
}

nlohmann::json fitted_plan_to_json(const FittedPlan& plan) {
  nlohmann::json j;
  j["steps"] = nlohmann::json::array();
  for (const auto& fs : plan.steps) {
    nlohmann::json sj = step_to_json(fs.step);
    if (fs.step.op == TransformStep::Op::min_max) {
      sj["min"] = fs.scaler.min;
      sj["max"] = fs.scaler.max;
    } else if (fs.step.op == TransformStep::Op::one_hot) {
      sj["vocabulary"] = fs.vocabulary;
    }
    j["steps"].push_back(sj);
  }
  j["provenance"] = provenance_name(plan.provenance);
  return j;
}

FittedPlan fitted_plan_from_json(const nlohmann::json& j) {
  FittedPlan plan;
  try {
    for (const auto& sj : j.at("steps")) {
      FittedStep fs;
      fs.step = step_from_json(sj);
      if (fs.step.op == TransformStep::Op::min_max) {
        fs.scaler.columns = fs.step.columns;
        fs.scaler.min = sj.at("min").get<std::vector<double>>();
        fs.scaler.max = sj.at("max").get<std::vector<double>>();
      } else if (fs.step.op == TransformStep::Op::one_hot) {
        fs.vocabulary = sj.at("vocabulary").get<std::vector<std::string>>();
      }
      plan.steps.push_back(std::move(fs));
    }
    plan.provenance = provenance_from_string(j.value("provenance", "manual"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed fitted plan: ") + e.what());
  }
  return plan;
}

}  // namespace iotguard
