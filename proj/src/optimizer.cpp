#include "biasrec/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace biasrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ideal-DCG normalizers: z_table[t] = sum_{p=1..t} 1/log(1+p).
std::vector<double> make_z_table(int k) {
  std::vector<double> z(k + 1, 0.0);
  for (int p = 1; p <= k; ++p) z[p] = z[p - 1] + 1.0 / std::log(1.0 + p);
  return z;
}

// ACC pairs of one (user, item): at most one boundary crossing, measured
// against the user's ranking with the item removed.
void acc_pairs_for_user(UserId u, ItemId item, double item_score, const TopKState& topk,
                        const RelevanceSet& relevance, PairScan& out) {
  int k = topk.k();
  const auto& list = topk.full_list(u);
  int pos = -1;
  for (int j = 0; j < static_cast<int>(list.size()); ++j) {
    if (list[j].item == item) {
      pos = j;
      break;
    }
  }
  bool in_topk_now = pos >= 0 && pos < k;

  const ScoredItem* absent_kth = nullptr;
  if (in_topk_now) {
    if (static_cast<int>(list.size()) >= k + 1) absent_kth = &list[k];
  } else {
    if (static_cast<int>(list.size()) >= k) absent_kth = &list[k - 1];
  }

  int y_i = relevance.is_relevant(u, item) ? 1 : 0;
  int y_k = (absent_kth && relevance.is_relevant(u, absent_kth->item)) ? 1 : 0;
  if (y_i == y_k) return;

  double delta = static_cast<double>(y_i - y_k) / k;
  double s = absent_kth ? absent_kth->score - item_score : -kInf;
  out.pairs.push_back({s, delta});
  if (in_topk_now) out.current_utility += delta;
}

// MAP/NDCG pairs of one (user, item): one crossing per position of the
// item-removed ranking whose incumbent relevance differs from the item's.
void rank_pairs_for_user(UserId u, ItemId item, double item_score, const TopKState& topk,
                         const RelevanceSet& relevance, MetricKind kind,
                         const std::vector<double>& z_table, PairScan& out) {
  int k = topk.k();
  const auto& list = topk.full_list(u);
  int pos = -1;
  for (int j = 0; j < static_cast<int>(list.size()); ++j) {
    if (list[j].item == item) {
      pos = j;
      break;
    }
  }

  int y_i = relevance.is_relevant(u, item) ? 1 : 0;
  int rc = relevance.relevant_count(u);
  if (rc < 1) return;  // user carries no signal
  int ktilde = std::min(k, rc);
  double z = z_table[ktilde];

  int prefix = 0;  // relevant incumbents above position p
  int p = 0;       // absent-ranking position consumed so far
  for (int j = 0; j < static_cast<int>(list.size()) && p < k; ++j) {
    if (j == pos) continue;
    const ScoredItem& c = list[j];
    ++p;
    int y_p = relevance.is_relevant(u, c.item) ? 1 : 0;
    if (y_p != y_i) {
      double delta;
      if (kind == MetricKind::Map) {
        double inv_next = (p + 1 > k) ? 0.0 : 1.0 / (p + 1);
        delta = (y_i - y_p) * (1.0 + prefix) * (1.0 / p - inv_next) / ktilde;
      } else {
        double inv_next = (p + 1 > k) ? 0.0 : 1.0 / std::log(2.0 + p);
        delta = (y_i - y_p) * (1.0 / std::log(1.0 + p) - inv_next) / z;
      }
      out.pairs.push_back({c.score - item_score, delta});
      if (pos >= 0 && pos < j) out.current_utility += delta;
    }
    prefix += y_p;
  }

  // fewer than k incumbents: the item sits at position p+1 for any finite bias
  if (p < k && y_i == 1) {
    int tail = p + 1;
    double delta = (kind == MetricKind::Map)
                       ? (1.0 + prefix) / (static_cast<double>(tail) * ktilde)
                       : 1.0 / (std::log(1.0 + tail) * z);
    out.pairs.push_back({-kInf, delta});
    if (pos >= 0) out.current_utility += delta;
  }
}

void check_inputs(ItemId item, const ScoreStore& scores, const BiasVector& bias,
                  const TopKState& topk, const RelevanceSet& relevance) {
  if (bias.size() != scores.num_items() || relevance.num_items() != scores.num_items())
    throw std::invalid_argument("candidate_pairs: item universe mismatch");
  if (item < 0 || item >= scores.num_items())
    throw std::invalid_argument("candidate_pairs: item out of range");
  if (bias.excluded(item))
    throw std::invalid_argument("candidate_pairs: item is excluded");
  (void)topk;
}

}  // namespace

PairScan candidate_pairs_acc(ItemId item, const ScoreStore& scores, const BiasVector& bias,
                             const TopKState& topk, const RelevanceSet& relevance) {
  check_inputs(item, scores, bias, topk, relevance);
  PairScan out;
  double item_bias = bias[item];
  for (UserId u : relevance.users()) {
    acc_pairs_for_user(u, item, scores.score(u, item) + item_bias, topk, relevance, out);
  }
  out.pairs.push_back({-kInf, 0.0});
  return out;
}

PairScan candidate_pairs_rank(ItemId item, const ScoreStore& scores, const BiasVector& bias,
                              const TopKState& topk, const RelevanceSet& relevance,
                              MetricKind metric) {
  if (metric == MetricKind::Acc)
    throw std::invalid_argument("candidate_pairs_rank: use candidate_pairs_acc for ACC");
  check_inputs(item, scores, bias, topk, relevance);
  PairScan out;
  double item_bias = bias[item];
  auto z_table = make_z_table(topk.k());
  for (UserId u : relevance.users()) {
    rank_pairs_for_user(u, item, scores.score(u, item) + item_bias, topk, relevance, metric,
                        z_table, out);
  }
  out.pairs.push_back({-kInf, 0.0});
  return out;
}

BiasSearchResult sweep_optimal_bias(double current_utility, std::vector<CandidatePair> pairs,
                                    double tie_epsilon) {
  if (!(tie_epsilon > 0.0)) throw std::invalid_argument("sweep_optimal_bias: tie_epsilon must be > 0");

  double base = 0.0;  // deltas that hold at every finite bias
  bool has_base = false;
  int sentinels = 0;
  std::vector<CandidatePair> finite;
  finite.reserve(pairs.size());
  for (const auto& pr : pairs) {
    if (pr.s == -kInf) {
      if (pr.delta == 0.0) {
        ++sentinels;
      } else {
        base += pr.delta;
        has_base = true;
      }
    } else {
      finite.push_back(pr);
    }
  }
  if (sentinels != 1) throw std::invalid_argument("sweep_optimal_bias: sentinel pair missing");

  std::stable_sort(finite.begin(), finite.end(), [](const CandidatePair& a, const CandidatePair& b) {
    if (a.s != b.s) return a.s < b.s;
    return a.delta > b.delta;
  });

  // exclusion reference: bias = kNegInf, utility 0
  double best_util = 0.0;
  double best_bias = kNegInf;
  auto consider = [&](double util, double value) {
    if (util > best_util) {
      best_util = util;
      best_bias = value;
    } else if (util == best_util) {
      double va = std::abs(value), vb = std::abs(best_bias);
      if (va < vb || (va == vb && value < best_bias)) best_bias = value;
    }
  };

  if (has_base) {
    double min_s = finite.empty() ? 0.0 : finite.front().s;
    consider(base, std::min(min_s, 0.0) - 1.0);
  }

  double run = base;
  std::size_t i = 0;
  while (i < finite.size()) {
    double s = finite[i].s;
    while (i < finite.size() && finite[i].s == s) {
      run += finite[i].delta;
      ++i;
    }
    double next = (i < finite.size()) ? finite[i].s : kInf;
    double step = std::min(tie_epsilon, (next - s) / 2.0);
    consider(run, s + step);
  }

  if (!(best_util > current_utility)) return {0.0, 0.0};
  return {best_bias, best_util - current_utility};
}

std::vector<ItemId> prune_zero_relevance(const RelevanceSet& relevance, std::int32_t num_items) {
  if (relevance.num_items() != num_items)
    throw std::invalid_argument("prune_zero_relevance: item universe mismatch");
  std::vector<ItemId> out;
  for (ItemId i = 0; i < num_items; ++i) {
    if (relevance.users_of_item(i).empty()) out.push_back(i);
  }
  return out;
}

std::vector<ItemId> build_candidate_set(const ScoreStore& scores, const RelevanceSet& relevance,
                                        const OptimizerConfig& config) {
  if (relevance.num_items() != scores.num_items())
    throw std::invalid_argument("build_candidate_set: item universe mismatch");
  std::int32_t m = scores.num_items();
  int k = config.metric.k;

  std::vector<std::int64_t> pred_freq(m, 0);
  for (UserId u = 0; u < scores.num_users(); ++u) {
    const auto& row = scores.row(u);  // already rank-ordered; zero-bias top-k is its prefix
    int n = std::min<int>(k, static_cast<int>(row.size()));
    for (int j = 0; j < n; ++j) ++pred_freq[row[j].item];
  }
  std::vector<std::int64_t> recent_freq(m, 0);
  for (ItemId i = 0; i < m; ++i)
    recent_freq[i] = static_cast<std::int64_t>(relevance.users_of_item(i).size());

  auto top_items = [m](const std::vector<std::int64_t>& freq, int cap) {
    std::vector<ItemId> order;
    for (ItemId i = 0; i < m; ++i)
      if (freq[i] > 0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
      if (freq[a] != freq[b]) return freq[a] > freq[b];
      return a < b;
    });
    if (cap > 0 && static_cast<int>(order.size()) > cap) order.resize(cap);
    return order;
  };

  std::vector<char> selected(m, 0);
  for (ItemId i : top_items(pred_freq, config.candidate_top_predicted)) selected[i] = 1;
  for (ItemId i : top_items(recent_freq, config.candidate_top_recent)) selected[i] = 1;

  std::vector<ItemId> out;
  for (ItemId i = 0; i < m; ++i) {
    if (selected[i] && recent_freq[i] > 0) out.push_back(i);  // zero-relevance items pruned
  }
  std::sort(out.begin(), out.end(), [&](ItemId a, ItemId b) {
    if (recent_freq[a] != recent_freq[b]) return recent_freq[a] > recent_freq[b];
    return a < b;
  });
  return out;
}

namespace {

// Coordinate-ascent driver with the relevance-coupled caches that keep each
// single-item scan near the size of its audience instead of O(n).
class Learner {
 public:
  Learner(const ScoreStore& scores, const RelevanceSet& relevance, const OptimizerConfig& config,
          const AcceptObserver& observer)
      : scores_(scores),
        relevance_(relevance),
        config_(config),
        observer_(observer),
        k_(config.metric.k),
        bias_(config.warm_start_bias ? *config.warm_start_bias : BiasVector(scores.num_items())),
        z_table_(make_z_table(config.metric.k)) {}

  LearnResult run() {
    validate();
    TopKState state(scores_, bias_, k_);
    state_ = &state;
    init_caches();

    LearnResult result;
    result.pruned_items = prune_zero_relevance(relevance_, scores_.num_items());
    if (config_.prune) {
      for (ItemId i : result.pruned_items) {
        if (bias_.excluded(i)) continue;
        double old = bias_[i];
        bias_.set(i, kNegInf);
        for (UserId u : state.apply_bias_update(i, old, kNegInf)) refresh_user_cache(u);
      }
      if (config_.metric.kind != MetricKind::Acc && !result.pruned_items.empty())
        result.warnings.push_back(
            "zero-relevance pruning applied under a rank metric; it is loss-free for ACC only");
    } else {
      result.pruned_items.clear();
    }

    result.candidate_items = build_candidate_set(scores_, relevance_, config_);
    std::erase_if(result.candidate_items, [&](ItemId i) { return bias_.excluded(i); });

    std::size_t n_users = relevance_.users().size();
    result.initial_objective = objective_mean(state, relevance_, config_.metric);
    double running = result.initial_objective;

    if (result.candidate_items.empty()) {
      result.warnings.push_back("empty candidate set; no bias learning performed");
      result.final_objective = result.initial_objective;
      result.bias = bias_;
      return result;
    }

    for (int cycle = 1; cycle <= config_.max_cycles; ++cycle) {
      int changed = 0;
      double cycle_gain = 0.0;
      for (ItemId item : result.candidate_items) {
        if (bias_.excluded(item)) continue;
        PairScan scan = scan_item(item);
        BiasSearchResult res =
            sweep_optimal_bias(scan.current_utility, std::move(scan.pairs), config_.tie_epsilon);
        if (!(res.utility_gain > 0.0)) continue;
        double old = bias_[item];
        double nb = is_excluded_bias(res.bias) ? kNegInf : old + res.bias;
        bias_.set(item, nb);
        for (UserId u : state.apply_bias_update(item, old, nb)) refresh_user_cache(u);
        ++changed;
        ++result.accepted_updates;
        cycle_gain += res.utility_gain;
        running += res.utility_gain / static_cast<double>(n_users);
        if (observer_) observer_({cycle, item, res.bias, nb, res.utility_gain}, bias_, state);
      }
      result.cycles = cycle;
      result.cycle_log.push_back({cycle, changed, cycle_gain, running});
      if (cycle_gain == 0.0) break;
      if (config_.min_items_changed_fraction > 0.0 &&
          changed < config_.min_items_changed_fraction *
                        static_cast<double>(result.candidate_items.size()))
        break;
    }

    result.final_objective = objective_mean(state, relevance_, config_.metric);
    result.bias = bias_;
    state_ = nullptr;
    return result;
  }

 private:
  void validate() const {
    if (k_ < 1) throw std::invalid_argument("learn_biases: k must be >= 1");
    if (config_.max_cycles < 1) throw std::invalid_argument("learn_biases: max_cycles must be >= 1");
    if (!(config_.tie_epsilon > 0.0))
      throw std::invalid_argument("learn_biases: tie_epsilon must be > 0");
    if (scores_.capacity() < k_)
      throw std::invalid_argument("learn_biases: ScoreStore capacity is below k");
    if (relevance_.num_items() != scores_.num_items())
      throw std::invalid_argument("learn_biases: item universe mismatch");
    if (config_.warm_start_bias && config_.warm_start_bias->size() != scores_.num_items())
      throw std::invalid_argument("learn_biases: warm start bias size mismatch");
  }

  void init_caches() {
    auto n = static_cast<std::size_t>(scores_.num_users());
    kth_rel_.assign(n, 0);
    k1_rel_.assign(n, 0);
    any_rel_.assign(n, 0);
    kth_rel_users_.clear();
    k1_rel_users_.clear();
    any_rel_users_.clear();
    for (UserId u : relevance_.users()) refresh_user_cache(u);
  }

  void refresh_user_cache(UserId u) {
    if (relevance_.relevant_count(u) == 0) return;  // flags stay false
    const auto& list = state_->full_list(u);
    char kth = 0, k1 = 0, any = 0;
    for (int j = 0; j < static_cast<int>(list.size()); ++j) {
      if (!relevance_.is_relevant(u, list[j].item)) continue;
      any = 1;
      if (j == k_ - 1) kth = 1;
      if (j == k_) k1 = 1;
    }
    auto sync = [u](char now, char& stored, std::set<UserId>& users) {
      if (now == stored) return;
      stored = now;
      if (now)
        users.insert(u);
      else
        users.erase(u);
    };
    sync(kth, kth_rel_[u], kth_rel_users_);
    sync(k1, k1_rel_[u], k1_rel_users_);
    sync(any, any_rel_[u], any_rel_users_);
  }

  PairScan scan_item(ItemId item) {
    active_.clear();
    const auto& direct = relevance_.users_of_item(item);
    active_.insert(active_.end(), direct.begin(), direct.end());
    if (config_.metric.kind == MetricKind::Acc) {
      active_.insert(active_.end(), kth_rel_users_.begin(), kth_rel_users_.end());
      active_.insert(active_.end(), k1_rel_users_.begin(), k1_rel_users_.end());
    } else {
      active_.insert(active_.end(), any_rel_users_.begin(), any_rel_users_.end());
    }
    std::sort(active_.begin(), active_.end());
    active_.erase(std::unique(active_.begin(), active_.end()), active_.end());

    PairScan out;
    double item_bias = bias_[item];
    for (UserId u : active_) {
      double item_score = scores_.score(u, item) + item_bias;
      if (config_.metric.kind == MetricKind::Acc) {
        acc_pairs_for_user(u, item, item_score, *state_, relevance_, out);
      } else {
        rank_pairs_for_user(u, item, item_score, *state_, relevance_, config_.metric.kind,
                            z_table_, out);
      }
    }
    out.pairs.push_back({-kInf, 0.0});
    return out;
  }

  const ScoreStore& scores_;
  const RelevanceSet& relevance_;
  const OptimizerConfig& config_;
  const AcceptObserver& observer_;
  int k_;
  BiasVector bias_;
  std::vector<double> z_table_;
  TopKState* state_ = nullptr;
  std::vector<char> kth_rel_, k1_rel_, any_rel_;
  std::set<UserId> kth_rel_users_, k1_rel_users_, any_rel_users_;
  std::vector<UserId> active_;
};

}  // namespace

LearnResult learn_biases(const ScoreStore& scores, const RelevanceSet& relevance,
                         const OptimizerConfig& config, const AcceptObserver& observer) {
  Learner learner(scores, relevance, config, observer);
  return learner.run();
}

double objective_mean(const TopKState& state, const RelevanceSet& relevance,
                      const MetricSpec& metric) {
  const auto& users = relevance.users();
  if (users.empty()) throw std::invalid_argument("objective_mean: no users");
  double sum = 0.0;
  std::vector<int> rel;
  for (UserId u : users) {
    const auto& list = state.full_list(u);
    rel.clear();
    int n = std::min<int>(metric.k, static_cast<int>(list.size()));
    for (int p = 0; p < n; ++p) rel.push_back(relevance.is_relevant(u, list[p].item) ? 1 : 0);
    sum += metric_at_k(metric, rel, relevance.relevant_count(u));
  }
  return sum / static_cast<double>(users.size());
}

}  // namespace biasrec
