#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace seqmeas::runner {

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;  // repeated --set key=value
  int threads = 0;                     // 0 = leave the OpenMP default
  bool verify = false;                 // run debug-profile cross-checks
};

/// Default config document for a named experiment.
nlohmann::json default_config(const std::string& experiment);

/// Parses, validates, applies overrides, re-validates.
nlohmann::json load_config(const RunOptions& options);

/// Executes the experiment named in the config; writes CSV artifacts and
/// summary.json into out_dir. Returns the number of failed checks.
int run_experiment(const RunOptions& options);

}  // namespace seqmeas::runner
