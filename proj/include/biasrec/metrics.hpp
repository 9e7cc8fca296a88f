#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biasrec/core.hpp"

namespace biasrec {

enum class MetricKind { Acc, Map, Ndcg };

const char* metric_name(MetricKind kind);
std::optional<MetricKind> metric_from_name(const std::string& name);

/// Which top-k ranking metric to evaluate/optimize.
struct MetricSpec {
  MetricKind kind = MetricKind::Acc;
  int k = 10;
};

/// Fraction of the k slots filled with relevant items. Lists shorter than k
/// count missing positions as irrelevant.
double acc_at_k(const std::vector<int>& topk_relevance, int k);

/// Average precision at k: mean of Precision(p) over relevant positions p,
/// normalized by min(k, relevant_count). relevant_count must be >= 1.
double ap_at_k(const std::vector<int>& topk_relevance, int k, int relevant_count);

/// NDCG at k with binary gains and natural-log discounts. The ideal DCG
/// places min(k, relevant_count) relevant items at the top.
double ndcg_at_k(const std::vector<int>& topk_relevance, int k, int relevant_count);

double metric_at_k(const MetricSpec& spec, const std::vector<int>& topk_relevance,
                   int relevant_count);

/// Arithmetic mean; throws on an empty list.
double mean_perf(const std::vector<double>& per_user_values);

/// Relative improvement in percent; empty when the baseline is not positive.
std::optional<double> lift_percent(double perf, double perf_baseline);

/// KL(p || q) over a shared item universe after replacing every zero count
/// with 0.01 and normalizing both sides. Natural log. Throws when either
/// side has no positive count.
double kl_divergence_smoothed(const std::vector<double>& p_counts,
                              const std::vector<double>& q_counts);

struct OverlapRow {
  int level = 0;           // requested
  int effective_level = 0; // clamped to the universe size
  int overlap = 0;
};

/// Size of the intersection of the top-L items of both count vectors
/// (frequency descending, index ascending) for each requested level.
std::vector<OverlapRow> top_popular_overlap(const std::vector<double>& test_counts,
                                            const std::vector<double>& prediction_counts,
                                            const std::vector<int>& levels);

/// Mean metric values over the users of a RelevanceSet.
struct EvalReport {
  int k = 0;
  int user_count = 0;
  double acc = 0.0;
  double map = 0.0;
  double ndcg = 0.0;
  // parallel to RelevanceSet::users(); filled when requested
  std::vector<double> per_user_acc;
  std::vector<double> per_user_ap;
  std::vector<double> per_user_ndcg;

  double value(MetricKind kind) const;
};

/// Evaluates ACC/MAP/NDCG@k of per-user top-k item lists against relevance.
/// `topk_of_user` returns the ordered recommendation list of a user.
EvalReport evaluate_topk_lists(const std::function<std::vector<ItemId>(UserId)>& topk_of_user,
                               const RelevanceSet& relevance, int k, bool keep_per_user = false);

}  // namespace biasrec
