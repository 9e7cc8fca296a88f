#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "biasrec/core.hpp"
#include "biasrec/metrics.hpp"

namespace biasrec {

/// A top-k boundary crossing: `s` is the minimum add-on bias at which the
/// crossing happens, `delta` the utility change it causes. `s` is -infinity
/// for crossings that hold at every finite bias (users with fewer than k
/// candidates); the sentinel pair (-infinity, 0) marks the "item recommended
/// to nobody" reference point and appears exactly once per search.
struct CandidatePair {
  double s = 0.0;
  double delta = 0.0;
};

/// Outcome of a single-item bias search. `bias` is the add-on to apply, or
/// kNegInf to exclude the item everywhere; `utility_gain` is the improvement
/// over the utility at the item's present bias (0 = keep current bias).
struct BiasSearchResult {
  double bias = 0.0;
  double utility_gain = 0.0;
};

struct OptimizerConfig {
  MetricSpec metric{MetricKind::Acc, 10};
  int max_cycles = 2;
  // early stop when the fraction of items changed in a cycle falls below
  // this threshold; 0 disables
  double min_items_changed_fraction = 0.0;
  // candidate set caps; <= 0 means no cap on that route
  int candidate_top_predicted = 0;
  int candidate_top_recent = 0;
  double tie_epsilon = 1e-9;
  std::optional<BiasVector> warm_start_bias;
  bool prune = true;
};

struct PairScan {
  double current_utility = 0.0;
  std::vector<CandidatePair> pairs;
};

/// Candidate pairs of one item under ACC@k: one pair per user whose accuracy
/// would change if the item crossed their top-k boundary. Utility deltas are
/// measured against the ranking with the item removed, so they are exact even
/// for users already recommending the item.
PairScan candidate_pairs_acc(ItemId item, const ScoreStore& scores, const BiasVector& bias,
                             const TopKState& topk, const RelevanceSet& relevance);

/// Candidate pairs of one item under MAP@k or NDCG@k: one pair per (user,
/// position) whose incumbent relevance differs from the item's. Per-user
/// deltas stack along the ascending-threshold sweep.
PairScan candidate_pairs_rank(ItemId item, const ScoreStore& scores, const BiasVector& bias,
                              const TopKState& topk, const RelevanceSet& relevance,
                              MetricKind metric);

/// Sorts pairs by threshold and sweeps the piecewise-constant utility,
/// returning the bias with maximal utility. Utility at threshold b is the sum
/// of deltas with s <= b; the applied bias sits strictly above the chosen
/// threshold (tie_epsilon, capped at half the gap to the next threshold).
/// Prefers no change when no strict improvement exists; equal-utility ties go
/// to the smallest |bias|, then the smaller bias.
BiasSearchResult sweep_optimal_bias(double current_utility, std::vector<CandidatePair> pairs,
                                    double tie_epsilon);

/// Items relevant to no user; excluding them loses no ACC utility.
std::vector<ItemId> prune_zero_relevance(const RelevanceSet& relevance, std::int32_t num_items);

/// Union of the most frequently recommended items (zero-bias top-k counts)
/// and the most frequently relevant items, minus zero-relevance items.
/// Ordered by recent relevance frequency descending, index ascending.
std::vector<ItemId> build_candidate_set(const ScoreStore& scores, const RelevanceSet& relevance,
                                        const OptimizerConfig& config);

struct AcceptEvent {
  int cycle = 0;
  ItemId item = 0;
  double add_on = 0.0;   // kNegInf when the item was excluded
  double new_bias = 0.0;
  double gain = 0.0;     // per-user utility sum, not yet divided by n
};

struct CycleStats {
  int cycle = 0;
  int items_changed = 0;
  double total_gain = 0.0;
  double objective = 0.0;  // running objective estimate after the cycle
};

struct LearnResult {
  BiasVector bias;
  int cycles = 0;
  long accepted_updates = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<CycleStats> cycle_log;
  std::vector<ItemId> pruned_items;
  std::vector<ItemId> candidate_items;
  std::vector<std::string> warnings;
};

/// Observer fired after every accepted bias update; sees the live bias vector
/// and top-k state.
using AcceptObserver =
    std::function<void(const AcceptEvent&, const BiasVector&, const TopKState&)>;

/// Coordinate ascent over candidate items: repeatedly runs the single-item
/// search and accepts strictly improving biases until a full cycle yields no
/// gain, the cycle cap is reached, or too few items change. The configured
/// metric's mean over the relevance users never decreases across accepted
/// updates.
LearnResult learn_biases(const ScoreStore& scores, const RelevanceSet& relevance,
                         const OptimizerConfig& config, const AcceptObserver& observer = {});

/// Mean of the configured metric over the relevance users, recomputed from
/// the given state.
double objective_mean(const TopKState& state, const RelevanceSet& relevance,
                      const MetricSpec& metric);

}  // namespace biasrec
