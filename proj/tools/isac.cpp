// Command-line front end: simulate, track, e2e, report.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 format
// error. ISAC_LOG_LEVEL (trace, debug, info, warn, error, off) sets verbosity.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "isac/config.hpp"
#include "isac/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("isac");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("ISAC_LOG_LEVEL")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept "off" when asked for.
    if (level != spdlog::level::off || std::string_view(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring unknown ISAC_LOG_LEVEL '{}'", env);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  setup_logging();

  CLI::App app{"OFDM sensing simulator and detection/tracking pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, tensors_path, truth_path, in_dir;

  auto* simulate = app.add_subcommand("simulate", "simulate a beam-sweep run and write tensors.ratn and truth.csv");
  simulate->add_option("--config", config_path, "configuration file")->required();
  simulate->add_option("--out", out_dir, "output directory")->required();

  auto* track = app.add_subcommand("track", "run detection and tracking over a tensor file or stdin");
  track->add_option("--tensors", tensors_path, "tensor file, or - for stdin")->required();
  track->add_option("--config", config_path, "configuration file")->required();
  track->add_option("--out", out_dir, "output directory")->required();
  track->add_option("--truth", truth_path, "truth.csv (default: truth.csv next to the tensor file)");

  auto* e2e = app.add_subcommand("e2e", "simulate and track in one process");
  e2e->add_option("--config", config_path, "configuration file")->required();
  e2e->add_option("--out", out_dir, "output directory")->required();

  auto* report = app.add_subcommand("report", "recompute report.json and summary.csv from a run directory");
  report->add_option("--in", in_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      isac::cmd_simulate(isac::load_config(config_path), out_dir);
    } else if (*track) {
      const auto cfg = isac::load_config(config_path);
      std::optional<fs::path> truth;
      if (!truth_path.empty()) {
        truth = truth_path;
      } else if (tensors_path != "-") {
        const fs::path sibling = fs::path(tensors_path).parent_path() / isac::kTruthFileName;
        if (fs::exists(sibling)) truth = sibling;
      }
      if (tensors_path == "-") {
        isac::cmd_track(cfg, std::cin, out_dir, truth);
      } else {
        std::ifstream in(tensors_path, std::ios::binary);
        if (!in) throw isac::IoError("cannot open tensor file " + tensors_path);
        isac::cmd_track(cfg, in, out_dir, truth);
      }
    } else if (*e2e) {
      isac::cmd_e2e(isac::load_config(config_path), out_dir);
    } else if (*report) {
      std::cout << isac::report_to_json(isac::cmd_report(in_dir));
    }
  } catch (const isac::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return 2;
  } catch (const isac::FormatError& e) {
    spdlog::error("format error: {}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
