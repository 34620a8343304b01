#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entropt/config.hpp"
#include "entropt/landscape.hpp"
#include "entropt/runner.hpp"
#include "entropt/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

int cmd_run(const std::string& config_path) {
  entropt::RunConfig cfg = entropt::load_run_config(config_path);
  entropt::resolve_data_paths(cfg);
  const entropt::RunSummary summary = entropt::execute_run(cfg);
  if (summary.trace.aborted) {
    std::fprintf(stderr, "run aborted: %s (partial metrics at %s)\n",
                 summary.trace.abort_reason.c_str(),
                 summary.metrics_path.c_str());
    return kExitFailure;
  }
  std::printf(
      "%s: %lld updates, final accuracy %.4f, mean update runtime %.4g s, "
      "metrics at %s\n",
      entropt::algorithm_name(cfg.algorithm),
      static_cast<long long>(summary.trace.rows.size()),
      summary.final_accuracy, summary.mean_update_seconds,
      summary.metrics_path.c_str());
  return kExitOk;
}

int cmd_table1(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw entropt::ConfigError("table1: no .json configs in " + dir);

  std::vector<entropt::RunConfig> configs;
  for (const std::string& p : paths) {
    entropt::RunConfig cfg = entropt::load_run_config(p);
    entropt::resolve_data_paths(cfg);
    if (100 % cfg.eval_cadence != 0)
      throw entropt::ConfigError(
          "table1: eval_cadence must divide 100 in " + p);
    configs.push_back(std::move(cfg));
  }
  for (const entropt::RunConfig& cfg : configs)
    if (cfg.seed != configs.front().seed)
      throw entropt::ConfigError("table1: all configs must share one seed");

  const std::string out_path = (fs::path(dir) / "table1.csv").string();
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("table1: cannot write " + out_path);
  out << "algorithm,acc_100,acc_200,acc_300,acc_400,acc_500,"
         "mean_update_seconds\n";
  bool any_aborted = false;
  for (const entropt::RunConfig& cfg : configs) {
    std::fprintf(stderr, "table1: running %s...\n",
                 entropt::algorithm_name(cfg.algorithm));
    const entropt::RunSummary summary = entropt::execute_run(cfg);
    any_aborted |= summary.trace.aborted;
    std::map<std::int64_t, double> at;
    for (const entropt::TraceRow& row : summary.trace.rows)
      if (row.step % 100 == 0 && std::isfinite(row.accuracy))
        at[row.step] = row.accuracy;
    out << entropt::algorithm_name(cfg.algorithm);
    char buf[32];
    for (std::int64_t step = 100; step <= 500; step += 100) {
      if (at.count(step)) {
        std::snprintf(buf, sizeof(buf), "%.4f", at[step]);
        out << ',' << buf;
      } else {
        out << ",nan";
      }
    }
    std::snprintf(buf, sizeof(buf), "%.6g", summary.mean_update_seconds);
    out << ',' << buf << "\n";
    out.flush();
  }
  std::printf("table written to %s\n", out_path.c_str());
  return any_aborted ? kExitFailure : kExitOk;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const char* flag) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw entropt::ConfigError(std::string("landscape: bad value '") + token +
                                 "' in " + flag);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return values;
}

int cmd_landscape(const std::string& name, const std::vector<double>& taus,
                  int grid_n, const std::pair<double, double>& range,
                  const std::string& outdir) {
  std::unique_ptr<entropt::Objective> obj;
  if (name == "mixture") {
    obj = std::make_unique<entropt::BumpMixture2D>();
  } else if (name == "quadratic") {
    obj = std::make_unique<entropt::QuadraticObjective>(
        entropt::QuadraticObjective::isotropic(2, 1.0));
  } else {
    throw entropt::ConfigError(
        "landscape: objective must be 'mixture' or 'quadratic'");
  }
  std::filesystem::create_directories(outdir);
  for (double tau : taus) {
    if (!(tau > 0.0))
      throw entropt::ConfigError("landscape: tau values must be > 0");
    const auto points = entropt::landscape_grid(*obj, tau, grid_n, range.first,
                                                range.second);
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "%g", tau);
    const std::string path = (std::filesystem::path(outdir) /
                              ("landscape_" + name + "_tau" + suffix + ".csv"))
                                 .string();
    entropt::write_landscape_csv(path, points);
    std::printf("wrote %s\n", path.c_str());
  }
  return kExitOk;
}

int cmd_verify() {
  const std::vector<entropt::CheckResult> checks =
      entropt::run_verification_suite();
  int failed = 0;
  for (const entropt::CheckResult& c : checks) {
    std::printf("%s  %-55s observed %.3g  tolerance %.3g\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.observed,
                c.tolerance);
    if (!c.pass) ++failed;
  }
  if (failed) {
    std::printf("%d of %zu checks failed\n", failed, checks.size());
    return kExitFailure;
  }
  std::printf("all %zu checks passed\n", checks.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local-entropy and heat-regularized training experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute one run from a JSON config");
  run->add_option("config", config_path, "path to the run config")->required();

  std::string table_dir;
  auto* table1 = app.add_subcommand(
      "table1", "run a directory of configs and tabulate accuracy");
  table1->add_option("dir", table_dir, "directory of .json run configs")
      ->required();

  std::string landscape_name = "mixture";
  std::string tau_list = "0.01,1";
  int grid_n = 41;
  std::string range_str = "-2,2";
  std::string landscape_out = ".";
  auto* landscape = app.add_subcommand(
      "landscape", "emit raw and regularized loss surfaces as CSV grids");
  landscape->add_option("name", landscape_name, "2-D objective name")
      ->required();
  landscape->add_option("--tau", tau_list,
                        "comma-separated tau values, one grid file each");
  landscape->add_option("--grid", grid_n, "nodes per axis");
  landscape->add_option("--range", range_str, "lattice bounds as lo,hi");
  landscape->add_option("--out", landscape_out, "output directory");

  auto* verify = app.add_subcommand(
      "verify", "check the analytic identities behind the algorithms");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (table1->parsed()) return cmd_table1(table_dir);
    if (landscape->parsed()) {
      const std::vector<double> taus = parse_double_list(tau_list, "--tau");
      const std::vector<double> bounds =
          parse_double_list(range_str, "--range");
      if (bounds.size() != 2)
        throw entropt::ConfigError("landscape: --range needs exactly lo,hi");
      return cmd_landscape(landscape_name, taus, grid_n,
                           {bounds[0], bounds[1]}, landscape_out);
    }
    if (verify->parsed()) return cmd_verify();
  } catch (const entropt::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitConfig;
}
