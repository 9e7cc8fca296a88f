#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "biasrec/data.hpp"
#include "biasrec/metrics.hpp"
#include "biasrec/optimizer.hpp"

namespace biasrec {

/// Invalid configuration; `field` names the offending flag.
struct ConfigError : public std::runtime_error {
  std::string field;
  ConfigError(std::string field_name, const std::string& message)
      : std::runtime_error(message), field(std::move(field_name)) {}
};

struct RunConfig {
  // shared
  std::string out_dir;  // defaults to $BIASREC_OUTPUT_DIR or "."
  std::uint64_t seed = 1;
  bool strict_parse = false;

  // inputs
  std::string log_path;
  std::string scores_path;
  std::string bias_path;
  std::string warm_start_path;
  std::string taxonomy_path;
  std::string model_path;
  std::string out_file;  // overrides the default primary output path
  std::string model_kind = "markov";

  // windows
  std::string split_date;
  std::string from_date;
  std::string to_date;
  int recent_days = 3;
  int test_days = 7;

  // evaluation / optimization
  int k = 10;
  int capacity = 0;  // 0 -> 5k
  std::string metric = "acc";
  int max_cycles = 2;
  double min_changed_fraction = 0.0;
  int top_predicted = 0;
  int top_recent = 0;
  double tie_epsilon = 1e-9;
  bool no_prune = false;
  double beta = 60.0;
  int context_items = 3;
  int predict_n = 0;  // 0 -> capacity
  std::vector<std::string> strategies;
  std::vector<int> overlap_levels = {10, 20, 50, 100, 200, 500, 1000};

  // generator
  DriftConfig drift;

  int effective_capacity() const { return capacity > 0 ? capacity : 5 * k; }
};

std::string default_out_dir();
std::string config_hash(const RunConfig& config);

int cmd_generate(const RunConfig& config);
int cmd_fit(const RunConfig& config);
int cmd_predict(const RunConfig& config);
int cmd_learn_bias(const RunConfig& config);
int cmd_evaluate(const RunConfig& config);
int cmd_compare(const RunConfig& config);

}  // namespace biasrec
