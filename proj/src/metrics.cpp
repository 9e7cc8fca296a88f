#include "biasrec/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace biasrec {

const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::Acc: return "ACC";
    case MetricKind::Map: return "MAP";
    case MetricKind::Ndcg: return "NDCG";
  }
  return "?";
}

std::optional<MetricKind> metric_from_name(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "acc") return MetricKind::Acc;
  if (s == "map") return MetricKind::Map;
  if (s == "ndcg") return MetricKind::Ndcg;
  return std::nullopt;
}

double acc_at_k(const std::vector<int>& topk_relevance, int k) {
  if (k < 1) throw std::invalid_argument("acc_at_k: k must be >= 1");
  int hits = 0;
  int n = std::min<int>(k, static_cast<int>(topk_relevance.size()));
  for (int p = 0; p < n; ++p) hits += topk_relevance[p] ? 1 : 0;
  return static_cast<double>(hits) / k;
}

double ap_at_k(const std::vector<int>& topk_relevance, int k, int relevant_count) {
  if (k < 1) throw std::invalid_argument("ap_at_k: k must be >= 1");
  if (relevant_count < 1) throw std::invalid_argument("ap_at_k: relevant_count must be >= 1");
  double sum = 0.0;
  int hits = 0;
  int n = std::min<int>(k, static_cast<int>(topk_relevance.size()));
  for (int p = 1; p <= n; ++p) {
    if (topk_relevance[p - 1]) {
      ++hits;
      sum += static_cast<double>(hits) / p;
    }
  }
  return sum / std::min(k, relevant_count);
}

double ndcg_at_k(const std::vector<int>& topk_relevance, int k, int relevant_count) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  if (relevant_count < 1) throw std::invalid_argument("ndcg_at_k: relevant_count must be >= 1");
  double dcg = 0.0;
  int n = std::min<int>(k, static_cast<int>(topk_relevance.size()));
  for (int p = 1; p <= n; ++p) {
    if (topk_relevance[p - 1]) dcg += 1.0 / std::log(1.0 + p);
  }
  double ideal = 0.0;
  int top = std::min(k, relevant_count);
  for (int p = 1; p <= top; ++p) ideal += 1.0 / std::log(1.0 + p);
  return dcg / ideal;
}

double metric_at_k(const MetricSpec& spec, const std::vector<int>& topk_relevance,
                   int relevant_count) {
  switch (spec.kind) {
    case MetricKind::Acc: return acc_at_k(topk_relevance, spec.k);
    case MetricKind::Map: return ap_at_k(topk_relevance, spec.k, relevant_count);
    case MetricKind::Ndcg: return ndcg_at_k(topk_relevance, spec.k, relevant_count);
  }
  throw std::logic_error("unknown metric");
}

double mean_perf(const std::vector<double>& per_user_values) {
  if (per_user_values.empty()) throw std::invalid_argument("mean_perf: empty list");
  double sum = std::accumulate(per_user_values.begin(), per_user_values.end(), 0.0);
  return sum / per_user_values.size();
}

std::optional<double> lift_percent(double perf, double perf_baseline) {
  if (!(perf_baseline > 0.0)) return std::nullopt;
  return (perf / perf_baseline - 1.0) * 100.0;
}

double kl_divergence_smoothed(const std::vector<double>& p_counts,
                              const std::vector<double>& q_counts) {
  if (p_counts.size() != q_counts.size())
    throw std::invalid_argument("kl_divergence_smoothed: size mismatch");
  double p_total = 0.0, q_total = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    p_total += p_counts[i];
    q_total += q_counts[i];
  }
  if (!(p_total > 0.0) || !(q_total > 0.0))
    throw std::invalid_argument("kl_divergence_smoothed: a side has no positive count");

  // zero counts become 0.01 before normalization
  double p_norm = 0.0, q_norm = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    p_norm += p_counts[i] > 0.0 ? p_counts[i] : 0.01;
    q_norm += q_counts[i] > 0.0 ? q_counts[i] : 0.01;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    double p = (p_counts[i] > 0.0 ? p_counts[i] : 0.01) / p_norm;
    double q = (q_counts[i] > 0.0 ? q_counts[i] : 0.01) / q_norm;
    kl += p * std::log(p / q);
  }
  return kl;
}

namespace {

std::vector<ItemId> top_by_count(const std::vector<double>& counts, int level) {
  std::vector<ItemId> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  order.resize(std::min<std::size_t>(order.size(), level));
  return order;
}

}  // namespace

std::vector<OverlapRow> top_popular_overlap(const std::vector<double>& test_counts,
                                            const std::vector<double>& prediction_counts,
                                            const std::vector<int>& levels) {
  if (test_counts.size() != prediction_counts.size())
    throw std::invalid_argument("top_popular_overlap: size mismatch");
  std::vector<OverlapRow> rows;
  rows.reserve(levels.size());
  for (int level : levels) {
    if (level < 1) throw std::invalid_argument("top_popular_overlap: levels must be positive");
    int eff = std::min<int>(level, static_cast<int>(test_counts.size()));
    auto a = top_by_count(test_counts, eff);
    auto b = top_by_count(prediction_counts, eff);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<ItemId> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    rows.push_back({level, eff, static_cast<int>(both.size())});
  }
  return rows;
}

double EvalReport::value(MetricKind kind) const {
  switch (kind) {
    case MetricKind::Acc: return acc;
    case MetricKind::Map: return map;
    case MetricKind::Ndcg: return ndcg;
  }
  throw std::logic_error("unknown metric");
}

EvalReport evaluate_topk_lists(const std::function<std::vector<ItemId>(UserId)>& topk_of_user,
                               const RelevanceSet& relevance, int k, bool keep_per_user) {
  EvalReport report;
  report.k = k;
  report.user_count = static_cast<int>(relevance.users().size());
  if (report.user_count == 0) throw std::invalid_argument("evaluate_topk_lists: no evaluable users");
  double acc_sum = 0.0, ap_sum = 0.0, ndcg_sum = 0.0;
  std::vector<int> rel;
  for (UserId u : relevance.users()) {
    std::vector<ItemId> items = topk_of_user(u);
    rel.clear();
    for (ItemId i : items) rel.push_back(relevance.is_relevant(u, i) ? 1 : 0);
    int rc = relevance.relevant_count(u);
    double a = acc_at_k(rel, k);
    double ap = ap_at_k(rel, k, rc);
    double nd = ndcg_at_k(rel, k, rc);
    acc_sum += a;
    ap_sum += ap;
    ndcg_sum += nd;
    if (keep_per_user) {
      report.per_user_acc.push_back(a);
      report.per_user_ap.push_back(ap);
      report.per_user_ndcg.push_back(nd);
    }
  }
  report.acc = acc_sum / report.user_count;
  report.map = ap_sum / report.user_count;
  report.ndcg = ndcg_sum / report.user_count;
  return report;
}

}  // namespace biasrec
