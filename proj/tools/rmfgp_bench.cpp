// Benchmark experiment runner. Talks to the library exclusively through the
// C interface in rmfgp.h.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rmfgp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

int status_to_exit(int status) {
  if (status == RMFGP_OK) return kExitOk;
  if (status == RMFGP_ERR_CONFIG || status == RMFGP_ERR_INVALID_ARGUMENT) {
    return kExitConfig;
  }
  return kExitRuntime;
}

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return {};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  ok = true;
  return ss.str();
}

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* root = std::getenv("RMFGP_OUT_ROOT"); root != nullptr && *root) {
    return std::string(root);
  }
  return "rmfgp_out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmfgp benchmark experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string problem;
  std::string out_dir;
  std::string seed_override;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "experiment config JSON");
  run->add_option("--problem", problem,
                  "generate and run the default config for this problem "
                  "(linear, nonlinear, advection, elliptic)");
  run->add_option("--out", out_dir,
                  "output directory (default: $RMFGP_OUT_ROOT or ./rmfgp_out)");
  run->add_option("--seed-override", seed_override,
                  "comma-separated seeds replacing the config's list");

  std::string cfg_problem = "linear";
  std::string cfg_out_path;
  auto* cfg = app.add_subcommand("default-config",
                                 "print the paper-matching config for a problem");
  cfg->add_option("--problem", cfg_problem, "problem name")->required();
  cfg->add_option("-o,--output", cfg_out_path, "write to file instead of stdout");

  auto* version = app.add_subcommand("version", "print the library version");

  CLI11_PARSE(app, argc, argv);

  if (version->parsed()) {
    std::printf("rmfgp %s\n", rmfgp_version());
    return kExitOk;
  }

  if (cfg->parsed()) {
    char* json = nullptr;
    const int status = rmfgp_experiment_default_config(cfg_problem.c_str(), &json);
    if (status != RMFGP_OK) {
      std::fprintf(stderr, "error: %s\n", rmfgp_last_error());
      return status_to_exit(status);
    }
    if (cfg_out_path.empty()) {
      std::printf("%s\n", json);
    } else {
      std::ofstream out(cfg_out_path, std::ios::binary);
      if (!out) {
        std::fprintf(stderr, "error: cannot write %s\n", cfg_out_path.c_str());
        rmfgp_string_free(json);
        return kExitRuntime;
      }
      out << json << "\n";
    }
    rmfgp_string_free(json);
    return kExitOk;
  }

  // run
  if (config_path.empty() && problem.empty()) {
    std::fprintf(stderr, "error: provide a config file or --problem\n");
    return kExitConfig;
  }
  if (!config_path.empty() && !problem.empty()) {
    std::fprintf(stderr, "error: config file and --problem are mutually exclusive\n");
    return kExitConfig;
  }

  std::string config_json;
  if (!problem.empty()) {
    char* json = nullptr;
    const int status = rmfgp_experiment_default_config(problem.c_str(), &json);
    if (status != RMFGP_OK) {
      std::fprintf(stderr, "error: %s\n", rmfgp_last_error());
      return status_to_exit(status);
    }
    config_json = json;
    rmfgp_string_free(json);
  } else {
    bool ok = false;
    config_json = read_file(config_path, ok);
    if (!ok) {
      std::fprintf(stderr, "error: cannot read %s\n", config_path.c_str());
      return kExitConfig;
    }
  }

  const std::string resolved_out = resolve_out_dir(out_dir);
  char* summary = nullptr;
  const int status = rmfgp_experiment_run(config_json.c_str(), resolved_out.c_str(),
                                          seed_override.empty() ? nullptr
                                                                : seed_override.c_str(),
                                          &summary);
  if (summary != nullptr) {
    std::printf("%s\n", summary);
    rmfgp_string_free(summary);
  }
  if (status != RMFGP_OK) {
    std::fprintf(stderr, "error: %s\n", rmfgp_last_error());
    return status_to_exit(status);
  }
  return kExitOk;
}
