#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biasrec/core.hpp"
#include "biasrec/models.hpp"
#include "biasrec/optimizer.hpp"

namespace biasrec {

enum class StrategyKind { Long, Bias, Truncate, DistrDiff, Decay };
enum class BaseModelKind { Markov, Category, Popularity };

const char* strategy_name(StrategyKind kind);
std::optional<StrategyKind> strategy_from_name(const std::string& name);
const char* base_model_name(BaseModelKind kind);
std::optional<BaseModelKind> base_model_from_name(const std::string& name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::Long;
  BaseModelKind base = BaseModelKind::Markov;
  double beta = 60.0;  // decay factor, days
};

/// Shared inputs of one benchmark run. The train window fits base models, the
/// recent window carries the adaptation signal, `now` is the recommendation
/// date (start of the evaluation window).
struct StrategyContext {
  const TransactionLog* train = nullptr;
  const TransactionLog* recent = nullptr;
  TimeRange train_range;
  TimeRange recent_range;
  std::int64_t now = 0;
  const IdMap* users = nullptr;
  const IdMap* items = nullptr;
  /// per user, last distinct pre-test items, most recent first
  const std::vector<std::vector<ItemId>>* context_items = nullptr;
  const std::vector<std::int32_t>* item_category = nullptr;  // for the category base
  std::int32_t num_categories = 0;
  int k = 10;
  int capacity = 50;
  OptimizerConfig optimizer;  // for the bias strategy
};

struct StrategyOutput {
  ScoreStore scores;
  BiasVector bias;
  std::optional<LearnResult> learn;
};

/// Runs one comparison pipeline: fit base model, predict, and apply the
/// strategy's temporal correction (none, learned biases, truncation,
/// distribution-difference biases, or decayed refit).
StrategyOutput run_strategy(const StrategySpec& spec, const StrategyContext& ctx);

}  // namespace biasrec
