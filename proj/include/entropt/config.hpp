#ifndef ENTROPT_CONFIG_HPP
#define ENTROPT_CONFIG_HPP

#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "entropt/optimizers.hpp"

namespace entropt {

// Raised for malformed or out-of-range run configurations; the message
// names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { Sgd, SgldLe, IsLe, Hr, ExactLe, ExactHr };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Sgd: return "sgd";
    case Algorithm::SgldLe: return "sgld-le";
    case Algorithm::IsLe: return "is-le";
    case Algorithm::Hr: return "hr";
    case Algorithm::ExactLe: return "exact-le";
    case Algorithm::ExactHr: return "exact-hr";
  }
  return "?";
}

// One training or optimization run, as parsed from a JSON file.
struct RunConfig {
  Algorithm algorithm = Algorithm::Sgd;
  std::string network;    // "small" or "hidden"; empty for analytic runs
  std::string objective;  // "quadratic", "double-well", "mixture"
  double tau0 = 0.01;
  double tau1 = 0.0;  // > 0 selects the annealing schedule
  std::int64_t samples = 1000;       // J
  std::int64_t shards = 1;           // L
  std::int64_t inner_samples = 30;   // M
  double c = 0.1;
  double alpha = 0.7;
  double eps0 = 1000.0;
  std::int64_t batch_size = 20;      // B
  bool epoch_shuffle = false;  // epoch-based batches for the sgd baseline
  std::int64_t updates = 500;        // K
  double eta = -1.0;  // < 0 couples the step size to tau; required for sgd
  std::uint64_t seed = 1;
  std::string train_images, train_labels, test_images, test_labels;
  std::string outdir = ".";
  std::int64_t eval_cadence = 100;
  std::int64_t eval_subset = 1000;
  bool resample_eval = false;  // fresh evaluation subset per evaluation

  bool analytic() const { return network.empty(); }
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& field,
                                     const std::string& what) {
  throw ConfigError("config: field '" + field + "' " + what);
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& field, T fallback,
            bool required = false) {
  if (!j.contains(field)) {
    if (required) config_fail(field, "is required");
    return fallback;
  }
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_fail(field, "has the wrong type");
  }
}

}  // namespace detail

inline Algorithm parse_algorithm(const std::string& name) {
  if (name == "sgd") return Algorithm::Sgd;
  if (name == "sgld-le") return Algorithm::SgldLe;
  if (name == "is-le") return Algorithm::IsLe;
  if (name == "hr") return Algorithm::Hr;
  if (name == "exact-le") return Algorithm::ExactLe;
  if (name == "exact-hr") return Algorithm::ExactHr;
  detail::config_fail("algorithm",
                      "must be one of sgd, sgld-le, is-le, hr, exact-le, "
                      "exact-hr (got '" + name + "')");
}

inline void validate(const RunConfig& cfg) {
  using detail::config_fail;
  if (cfg.network.empty() == cfg.objective.empty())
    config_fail("network", "exactly one of 'network' and 'objective' is "
                           "required");
  if (!cfg.network.empty() && cfg.network != "small" && cfg.network != "hidden")
    config_fail("network", "must be 'small' or 'hidden'");
  if (!cfg.objective.empty() && cfg.objective != "quadratic" &&
      cfg.objective != "double-well" && cfg.objective != "mixture")
    config_fail("objective", "must be 'quadratic', 'double-well', or "
                             "'mixture'");
  if ((cfg.algorithm == Algorithm::ExactLe ||
       cfg.algorithm == Algorithm::ExactHr) &&
      cfg.analytic() == false)
    config_fail("algorithm", "exact-* needs an analytic objective");
  if (cfg.algorithm == Algorithm::ExactHr && cfg.objective != "quadratic")
    config_fail("algorithm", "exact-hr needs the quadratic objective");
  if (cfg.algorithm == Algorithm::Sgd && cfg.eta < 0.0)
    config_fail("eta", "is required for sgd");
  if (!(cfg.tau0 > 0.0)) config_fail("tau0", "must be > 0");
  if (cfg.tau1 < 0.0) config_fail("tau1", "must be >= 0");
  if (cfg.samples < 1) config_fail("J", "must be >= 1");
  if (cfg.shards < 1) config_fail("L", "must be >= 1");
  if (cfg.samples % cfg.shards != 0) config_fail("L", "must divide J");
  if (cfg.inner_samples < 1) config_fail("M", "must be >= 1");
  if (!(cfg.c > 0.0)) config_fail("c", "must be > 0");
  if (!(cfg.alpha > 0.5 && cfg.alpha <= 1.0))
    config_fail("alpha", "must lie in (1/2, 1]");
  if (!(cfg.eps0 > 0.0)) config_fail("eps0", "must be > 0");
  if (cfg.batch_size < 1) config_fail("B", "must be >= 1");
  if (cfg.updates < 1) config_fail("K", "must be >= 1");
  if (cfg.seed == 0) config_fail("seed", "must be >= 1");
  if (cfg.eval_cadence < 1) config_fail("eval_cadence", "must be >= 1");
  if (cfg.eval_subset < 1) config_fail("eval_subset", "must be >= 1");
}

// Fills in the four IDX paths from $ENTROPT_DATA_ROOT when a run needs a
// dataset and the config leaves them out.
inline void resolve_data_paths(RunConfig& cfg) {
  if (cfg.analytic()) return;
  if (!cfg.train_images.empty() && !cfg.train_labels.empty() &&
      !cfg.test_images.empty() && !cfg.test_labels.empty())
    return;
  const char* root = std::getenv("ENTROPT_DATA_ROOT");
  if (!root || !*root)
    detail::config_fail("train_images",
                        "and the other data paths are unset and "
                        "ENTROPT_DATA_ROOT is not exported");
  const std::string r(root);
  if (cfg.train_images.empty()) cfg.train_images = r + "/train-images-idx3-ubyte";
  if (cfg.train_labels.empty()) cfg.train_labels = r + "/train-labels-idx1-ubyte";
  if (cfg.test_images.empty()) cfg.test_images = r + "/t10k-images-idx3-ubyte";
  if (cfg.test_labels.empty()) cfg.test_labels = r + "/t10k-labels-idx1-ubyte";
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::get_field;
  if (!j.is_object()) detail::config_fail("(root)", "must be a JSON object");
  RunConfig cfg;
  cfg.algorithm =
      parse_algorithm(get_field<std::string>(j, "algorithm", "", true));
  cfg.network = get_field<std::string>(j, "network", "");
  cfg.objective = get_field<std::string>(j, "objective", "");
  cfg.tau0 = get_field<double>(j, "tau0", cfg.tau0);
  cfg.tau1 = get_field<double>(j, "tau1", cfg.tau1);
  cfg.samples = get_field<std::int64_t>(j, "J", cfg.samples);
  cfg.shards = get_field<std::int64_t>(j, "L", cfg.shards);
  cfg.inner_samples = get_field<std::int64_t>(j, "M", cfg.inner_samples);
  cfg.c = get_field<double>(j, "c", cfg.c);
  cfg.alpha = get_field<double>(j, "alpha", cfg.alpha);
  cfg.eps0 = get_field<double>(j, "eps0", cfg.eps0);
  cfg.batch_size = get_field<std::int64_t>(j, "B", cfg.batch_size);
  cfg.epoch_shuffle = get_field<bool>(j, "epoch_shuffle", cfg.epoch_shuffle);
  cfg.updates = get_field<std::int64_t>(j, "K", cfg.updates);
  cfg.eta = get_field<double>(j, "eta", cfg.eta);
  cfg.seed = get_field<std::uint64_t>(j, "seed", cfg.seed);
  cfg.train_images = get_field<std::string>(j, "train_images", "");
  cfg.train_labels = get_field<std::string>(j, "train_labels", "");
  cfg.test_images = get_field<std::string>(j, "test_images", "");
  cfg.test_labels = get_field<std::string>(j, "test_labels", "");
  cfg.outdir = get_field<std::string>(j, "outdir", cfg.outdir);
  cfg.eval_cadence = get_field<std::int64_t>(j, "eval_cadence", cfg.eval_cadence);
  cfg.eval_subset = get_field<std::int64_t>(j, "eval_subset", cfg.eval_subset);
  cfg.resample_eval = get_field<bool>(j, "resample_eval", cfg.resample_eval);
  validate(cfg);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["algorithm"] = algorithm_name(cfg.algorithm);
  if (!cfg.network.empty()) j["network"] = cfg.network;
  if (!cfg.objective.empty()) j["objective"] = cfg.objective;
  j["tau0"] = cfg.tau0;
  j["tau1"] = cfg.tau1;
  j["J"] = cfg.samples;
  j["L"] = cfg.shards;
  j["M"] = cfg.inner_samples;
  j["c"] = cfg.c;
  j["alpha"] = cfg.alpha;
  j["eps0"] = cfg.eps0;
  j["B"] = cfg.batch_size;
  j["epoch_shuffle"] = cfg.epoch_shuffle;
  j["K"] = cfg.updates;
  j["eta"] = cfg.eta;
  j["seed"] = cfg.seed;
  if (!cfg.train_images.empty()) {
    j["train_images"] = cfg.train_images;
    j["train_labels"] = cfg.train_labels;
    j["test_images"] = cfg.test_images;
    j["test_labels"] = cfg.test_labels;
  }
  j["outdir"] = cfg.outdir;
  j["eval_cadence"] = cfg.eval_cadence;
  j["eval_subset"] = cfg.eval_subset;
  j["resample_eval"] = cfg.resample_eval;
  return j;
}

}  // namespace entropt

#endif
