// Writes a deterministic KDDCup99-format CSV for desk-scale experiments.

#include <cstdio>
#include <string>

#include "iotguard/errors.hpp"
#include "iotguard/pipeline.hpp"
#include "iotguard/synthetic.hpp"

namespace {

constexpr const char* kUsage =
    "usage: iotguard-datagen --out FILE [--rows N] [--seed S] [--attack-fraction F]\n";

}  // namespace

int main(int argc, char** argv) {
  iotguard::SyntheticConfig cfg;
  std::string out_path;

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "%s requires a value\n%s", arg.c_str(), kUsage);
        std::exit(1);
      }
      return argv[++i];
    };
    try {
      if (arg == "--out" || arg == "-o") {
        out_path = next();
      } else if (arg == "--rows") {
        cfg.rows = std::stoll(next());
      } else if (arg == "--seed") {
        cfg.seed = std::stoull(next());
      } else if (arg == "--attack-fraction") {
        cfg.attack_fraction = std::stod(next());
      } else if (arg == "--help" || arg == "-h") {
        std::printf("%s", kUsage);
        return 0;
      } else {
        std::fprintf(stderr, "unknown option: %s\n%s", arg.c_str(), kUsage);
        return 1;
      }
    } catch (const std::exception&) {
      std::fprintf(stderr, "invalid value for %s\n", arg.c_str());
      return 1;
    }
  }
  if (out_path.empty()) {
    std::fprintf(stderr, "%s", kUsage);
    return 1;
  }

  try {
    iotguard::write_text_file(out_path, iotguard::generate_kdd_csv(cfg));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::printf("wrote %lld rows to %s\n", static_cast<long long>(cfg.rows), out_path.c_str());
  return 0;
}
