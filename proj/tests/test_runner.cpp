#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "seqmeas/runner.hpp"

using namespace seqmeas;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("seqmeas_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const TempDir& dir, const json& config) {
  const fs::path p = dir.path / "config.json";
  std::ofstream f(p);
  f << config.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json run_and_load_summary(const runner::RunOptions& options) {
  const int failures = runner::run_experiment(options);
  json summary = json::parse(slurp(fs::path(options.out_dir) / "summary.json"));
  REQUIRE(summary["all_checks_passed"].get<bool>() == (failures == 0));
  return summary;
}

}  // namespace

TEST_CASE("schema validation names the offending field") {
  TempDir dir("schema");
  json config = {{"experiment", "box_heat_vision"},
                 {"seed", 1},
                 {"params", {{"G", 32}, {"D", 8}, {"bogus", 1}}}};
  runner::RunOptions options;
  options.config_path = write_config(dir, config).string();
  options.out_dir = (dir.path / "out").string();
  CHECK_THROWS_WITH_AS(runner::run_experiment(options),
                       doctest::Contains("params.bogus"),
                       std::invalid_argument);
  json bad_exp = {{"experiment", "nope"}};
  options.config_path = write_config(dir, bad_exp).string();
  CHECK_THROWS_WITH_AS(runner::run_experiment(options),
                       doctest::Contains("unknown experiment"),
                       std::invalid_argument);
}

TEST_CASE("overrides apply and are re-validated") {
  TempDir dir("override");
  json config = {{"experiment", "box_heat_vision"}, {"seed", 3}};
  runner::RunOptions options;
  options.config_path = write_config(dir, config).string();
  options.out_dir = (dir.path / "out").string();
  options.overrides = {"params.G=48", "params.D=12", "params.steps=6"};
  const json loaded = runner::load_config(options);
  CHECK(loaded["params"]["G"].get<int>() == 48);
  options.overrides.push_back("params.G=oops");
  CHECK_THROWS(runner::load_config(options));
}

TEST_CASE("box experiment emits the pinned csv schema and passes checks") {
  TempDir dir("box");
  json config = {{"experiment", "box_heat_vision"},
                 {"seed", 7},
                 {"params", {{"G", 128}, {"D", 32}, {"steps", 12}}}};
  runner::RunOptions options;
  options.config_path = write_config(dir, config).string();
  options.out_dir = (dir.path / "out").string();
  const json summary = run_and_load_summary(options);
  CHECK(summary["all_checks_passed"].get<bool>());
  const std::string trace = slurp(dir.path / "out" / "trace.csv");
  CHECK(trace.rfind("step,energy,predicted_energy,purity,phi_bound_sq,entropy,"
                    "tail_mass_K16\n",
                    0) == 0);
  // deterministic rerun: byte-identical CSV artifacts
  runner::RunOptions rerun = options;
  rerun.out_dir = (dir.path / "out2").string();
  runner::run_experiment(rerun);
  CHECK(slurp(dir.path / "out" / "trace.csv") ==
        slurp(dir.path / "out2" / "trace.csv"));
}

TEST_CASE("thread override does not change artifacts") {
  TempDir dir("threads");
  json config = {{"experiment", "tomography"},
                 {"seed", 11},
                 {"params",
                  {{"G", 64}, {"n_harmonics", 6}, {"n_traj", 4000},
                   {"grid_out", 16}}}};
  runner::RunOptions options;
  options.config_path = write_config(dir, config).string();
  options.out_dir = (dir.path / "one").string();
  options.threads = 1;
  runner::run_experiment(options);
  runner::RunOptions multi = options;
  multi.out_dir = (dir.path / "four").string();
  multi.threads = 4;
  runner::run_experiment(multi);
  for (const char* name : {"trace.csv", "moments.csv", "density.csv",
                           "histogram.csv"}) {
    if (fs::exists(dir.path / "one" / name)) {
      CHECK(slurp(dir.path / "one" / name) == slurp(dir.path / "four" / name));
    }
  }
}

TEST_CASE("tomography exact path passes its checks") {
  TempDir dir("tomo");
  json config = {{"experiment", "tomography"},
                 {"seed", 5},
                 {"params", {{"G", 128}, {"n_harmonics", 10}, {"grid_out", 32}}}};
  runner::RunOptions options;
  options.config_path = write_config(dir, config).string();
  options.out_dir = (dir.path / "out").string();
  const json summary = run_and_load_summary(options);
  CHECK(summary["all_checks_passed"].get<bool>());
  const std::string density = slurp(dir.path / "out" / "density.csv");
  CHECK(density.rfind("x,rho_exact,rho_reconstructed,stderr\n", 0) == 0);
}

TEST_CASE("tomography accepts foreign outcome counts") {
  TempDir dir("foreign");
  // two-outcome histogram over strings of length 3 concentrated on extremes
  const fs::path counts = dir.path / "counts.csv";
  {
    std::ofstream f(counts);
    f << "string,count\n000,700\n111,200\n010,60\n101,40\n";
  }
  json config = {{"experiment", "tomography"},
                 {"seed", 5},
                 {"params",
                  {{"G", 64}, {"n_harmonics", 3}, {"grid_out", 16},
                   {"counts_csv", counts.string()}}}};
  runner::RunOptions options;
  options.config_path = write_config(dir, config).string();
  options.out_dir = (dir.path / "out").string();
  runner::run_experiment(options);
  const std::string density = slurp(dir.path / "out" / "density.csv");
  // rho_exact column is present but empty for foreign data
  std::istringstream lines(density);
  std::string header, first_row;
  std::getline(lines, header);
  std::getline(lines, first_row);
  const auto c1 = first_row.find(',');
  CHECK(first_row[c1 + 1] == ',');
}

TEST_CASE("remaining experiments run clean at reduced size") {
  struct Case {
    const char* name;
    json params;
  };
  const std::vector<Case> cases = {
      {"finitedim_saturation", {{"d", 6}, {"steps", 60}}},
      {"ladder", {{"d", 6}, {"steps", 40}, {"max_search_steps", 1 << 18}}},
      {"freegroup_norm", {{"s", 3}, {"max_len", 6}}},
      {"freegroup_purity", {{"s", 5}, {"max_len", 4}, {"steps", 3}}},
  };
  for (const auto& c : cases) {
    TempDir dir(std::string("exp_") + c.name);
    json config = {{"experiment", c.name}, {"seed", 21}, {"params", c.params}};
    runner::RunOptions options;
    options.config_path = write_config(dir, config).string();
    options.out_dir = (dir.path / "out").string();
    options.verify = true;
    const json summary = run_and_load_summary(options);
    CHECK_MESSAGE(summary["all_checks_passed"].get<bool>(), c.name);
  }
}

TEST_CASE("cli binary round trip") {
  TempDir dir("cli");
  json config = {{"experiment", "freegroup_purity"},
                 {"seed", 2},
                 {"params", {{"s", 5}, {"max_len", 3}, {"steps", 2}}}};
  const fs::path cfg_path = write_config(dir, config);
  const fs::path out = dir.path / "out";
  std::ostringstream cmd;
  cmd << SEQMEAS_CLI_PATH << " --config " << cfg_path << " --out " << out
      << " --threads 1";
  CHECK(std::system(cmd.str().c_str()) == 0);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "summary.json"));
  // print-default mode
  std::ostringstream cmd2;
  cmd2 << SEQMEAS_CLI_PATH << " --print-default ladder > " << (dir.path / "d.json");
  CHECK(std::system(cmd2.str().c_str()) == 0);
  const json defaults = json::parse(slurp(dir.path / "d.json"));
  CHECK(defaults["experiment"] == "ladder");
}
