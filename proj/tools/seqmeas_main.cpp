#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "seqmeas/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"seqmeas: sequential projective measurement experiments"};

  seqmeas::runner::RunOptions options;
  std::string print_default;

  app.add_option("--config", options.config_path, "experiment config (JSON)");
  app.add_option("--out", options.out_dir, "output directory for CSV artifacts");
  app.add_option("--set", options.overrides,
                 "override config fields, e.g. --set params.G=512 (repeatable)");
  app.add_option("--threads", options.threads,
                 "OpenMP thread count (results are identical for any value)");
  app.add_flag("--verify", options.verify,
               "run debug-profile cross-checks (quadrature vs closed form, "
               "kernel vs direct iteration, dense oracles)");
  app.add_option("--print-default", print_default,
                 "print the default config for an experiment and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!print_default.empty()) {
      std::cout << seqmeas::runner::default_config(print_default).dump(2)
                << "\n";
      return 0;
    }
    if (options.config_path.empty() || options.out_dir.empty()) {
      std::cerr << "error: --config and --out are required (or use "
                   "--print-default EXPERIMENT)\n";
      return 2;
    }
    const int failures = seqmeas::runner::run_experiment(options);
    if (failures > 0) {
      std::cerr << failures << " check(s) failed; see summary.json\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
