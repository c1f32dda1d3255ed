#include "iotguard/cli.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include "iotguard/errors.hpp"
#include "iotguard/pipeline.hpp"

namespace iotguard {

namespace {

constexpr const char* kUsage =
    "usage: iotguard <stats|plan|train|evaluate|compare|explain> --config <path>\n"
    "               [--seed N] [--out DIR] [--advisor heuristic|llm]\n"
    "\n"
    "  stats      write feature statistics for the training split\n"
    "  plan       write the advisor's preprocessing plan\n"
    "  train      fit the configured pipeline and train the autoencoder\n"
    "  evaluate   score the test split against the trained artifacts\n"
    "  compare    run the pca and advisor pipelines on identical splits\n"
    "  explain    write explanation reports for flagged test rows\n";

int dispatch(const std::string& command, const RunConfig& cfg) {
  nlohmann::json manifest;
  if (command == "stats") {
    manifest = cmd_stats(cfg);
  } else if (command == "plan") {
    manifest = cmd_plan(cfg);
  } else if (command == "train") {
    manifest = cmd_train(cfg);
  } else if (command == "evaluate") {
    manifest = cmd_evaluate(cfg);
  } else if (command == "compare") {
    manifest = cmd_compare(cfg);
  } else if (command == "explain") {
    manifest = cmd_explain(cfg);
  }

  if (manifest.contains("summary")) {
    std::printf("macro F1 %.4f, accuracy %.4f, FPR %.4f\n",
                manifest["summary"]["macro_f1"].get<double>(),
                manifest["summary"]["accuracy"].get<double>(),
                manifest["summary"]["false_positive_rate"].get<double>());
  }
  if (manifest.contains("delta_macro_f1")) {
    std::printf("delta macro F1 (advisor - pca): %+.4f\n",
                manifest["delta_macro_f1"].get<double>());
  }
  if (manifest.contains("llm_fallback")) {
    std::printf("note: llm advisor fell back to heuristic (%s)\n",
                manifest["llm_fallback"].get<std::string>().c_str());
  }
  std::printf("%s: artifacts written to %s\n", command.c_str(), cfg.output_dir.string().c_str());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::fprintf(args.empty() ? stderr : stdout, "%s", kUsage);
    return args.empty() ? 1 : 0;
  }

  const std::string command = args[0];
  const bool known_command = command == "stats" || command == "plan" || command == "train" ||
                             command == "evaluate" || command == "compare" ||
                             command == "explain";
  if (!known_command) {
    std::fprintf(stderr, "unknown command: %s\n%s", command.c_str(), kUsage);
    return 1;
  }
  std::string config_path;
  std::string out_override;
  std::string advisor_override;
  std::string seed_override;

  for (std::size_t i = 1; i < args.size(); ++i) {
    auto next = [&](const char* flag) -> std::string {
      if (i + 1 >= args.size()) {
        throw ConfigError(std::string(flag) + " requires a value");
      }
      return args[++i];
    };
    if (args[i] == "--config" || args[i] == "-c") {
      config_path = next("--config");
    } else if (args[i] == "--out" || args[i] == "-o") {
      out_override = next("--out");
    } else if (args[i] == "--seed") {
      seed_override = next("--seed");
    } else if (args[i] == "--advisor") {
      advisor_override = next("--advisor");
    } else {
      std::fprintf(stderr, "unknown option: %s\n%s", args[i].c_str(), kUsage);
      return 1;
    }
  }

  try {
    if (config_path.empty()) throw ConfigError("--config is required");
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (!seed_override.empty()) {
      std::uint64_t seed = 0;
      try {
        seed = std::stoull(seed_override);
      } catch (const std::exception&) {
        throw ConfigError("--seed must be an unsigned integer, got: " + seed_override);
      }
      cfg.seed = seed;
      cfg.split_seed = seed;
      cfg.subsample_seed = seed;
      cfg.train.seed = seed;
    }
    if (!advisor_override.empty()) {
      if (advisor_override == "heuristic") {
        cfg.pipeline = PipelineKind::advisor_heuristic;
      } else if (advisor_override == "llm") {
        cfg.pipeline = PipelineKind::advisor_llm;
      } else {
        throw ConfigError("--advisor must be heuristic or llm, got: " + advisor_override);
      }
    }
    return dispatch(command, cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const TransportError& e) {
    std::fprintf(stderr, "transport error: %s\n", e.what());
    return 4;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace iotguard
