#include "biasrec/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace biasrec {

namespace {
constexpr double kSecondsPerDay = 86400.0;
}

double decay_weight(double delta_t_days, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("decay_weight: beta must be > 0");
  return std::exp(-delta_t_days / beta);
}

std::uint64_t MarkovModel::pair_key(ItemId a, ItemId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

double MarkovModel::prob_first(ItemId j, ItemId i) const {
  auto it = first_.find(j);
  if (it == first_.end() || !(it->second.total.weight > 0.0)) return 0.0;
  auto s = it->second.successors.find(i);
  if (s == it->second.successors.end()) return 0.0;
  return std::min(1.0, s->second.weight / it->second.total.weight);
}

double MarkovModel::prob_second(ItemId j1, ItemId j2, ItemId i) const {
  auto it = second_.find(pair_key(j1, j2));
  if (it == second_.end() || !(it->second.total.weight > 0.0)) return 0.0;
  auto s = it->second.successors.find(i);
  if (s == it->second.successors.end()) return 0.0;
  return std::min(1.0, s->second.weight / it->second.total.weight);
}

namespace {

using UserEvents = std::vector<std::pair<ItemId, std::int64_t>>;

void fit_user_dedupe(MarkovModel& model, const UserEvents& evs,
                     const std::function<double(std::int64_t)>& w_of) {
  std::map<ItemId, double> earlier;  // distinct earlier item -> max purchase weight
  std::map<std::pair<ItemId, ItemId>, double> num1;
  std::map<std::tuple<ItemId, ItemId, ItemId>, double> num2;

  std::size_t a = 0;
  while (a < evs.size()) {
    std::size_t b = a;
    std::int64_t t = evs[a].second;
    while (b < evs.size() && evs[b].second == t) ++b;
    double w = w_of(t);
    for (std::size_t e = a; e < b; ++e) {
      ItemId i = evs[e].first;
      for (auto j1 = earlier.begin(); j1 != earlier.end(); ++j1) {
        auto& v = num1[{j1->first, i}];
        v = std::max(v, w);
        for (auto j2 = std::next(j1); j2 != earlier.end(); ++j2) {
          auto& v2 = num2[{j1->first, j2->first, i}];
          v2 = std::max(v2, w);
        }
      }
    }
    for (std::size_t e = a; e < b; ++e) {
      auto& we = earlier[evs[e].first];
      we = std::max(we, w);
    }
    a = b;
  }

  // per-user denominators dominate every numerator contribution
  std::map<ItemId, double> denom1(earlier);
  for (const auto& [ji, w] : num1) {
    auto& d = denom1[ji.first];
    d = std::max(d, w);
  }
  std::map<std::pair<ItemId, ItemId>, double> denom2;
  for (auto j1 = earlier.begin(); j1 != earlier.end(); ++j1) {
    for (auto j2 = std::next(j1); j2 != earlier.end(); ++j2) {
      denom2[{j1->first, j2->first}] = std::min(j1->second, j2->second);
    }
  }
  for (const auto& [jji, w] : num2) {
    auto& d = denom2[{std::get<0>(jji), std::get<1>(jji)}];
    d = std::max(d, w);
  }

  for (const auto& [j, w] : denom1) {
    auto& c = model.first_context(j).total;
    c.count += 1;
    c.weight += w;
  }
  for (const auto& [ji, w] : num1) {
    auto& c = model.first_context(ji.first).successors[ji.second];
    c.count += 1;
    c.weight += w;
  }
  for (const auto& [jj, w] : denom2) {
    auto& c = model.second_context(jj.first, jj.second).total;
    c.count += 1;
    c.weight += w;
  }
  for (const auto& [jji, w] : num2) {
    auto& c = model.second_context(std::get<0>(jji), std::get<1>(jji))
                  .successors[std::get<2>(jji)];
    c.count += 1;
    c.weight += w;
  }
}

// Alternative per-event counting (config flag): every occurrence contributes.
void fit_user_events(MarkovModel& model, const UserEvents& evs,
                     const std::function<double(std::int64_t)>& w_of) {
  std::set<ItemId> earlier;
  std::size_t a = 0;
  while (a < evs.size()) {
    std::size_t b = a;
    std::int64_t t = evs[a].second;
    while (b < evs.size() && evs[b].second == t) ++b;
    double w = w_of(t);
    for (std::size_t e = a; e < b; ++e) {
      ItemId i = evs[e].first;
      for (auto j1 = earlier.begin(); j1 != earlier.end(); ++j1) {
        auto& c1 = model.first_context(*j1).successors[i];
        c1.count += 1;
        c1.weight += w;
        for (auto j2 = std::next(j1); j2 != earlier.end(); ++j2) {
          auto& c2 = model.second_context(*j1, *j2).successors[i];
          c2.count += 1;
          c2.weight += w;
        }
      }
      // pair completions: this event together with each distinct earlier item
      for (ItemId y : earlier) {
        if (y == i) continue;
        auto& d2 = model.second_context(i, y).total;
        d2.count += 1;
        d2.weight += w;
      }
      auto& d1 = model.first_context(i).total;
      d1.count += 1;
      d1.weight += w;
    }
    for (std::size_t e = a; e < b; ++e) earlier.insert(evs[e].first);
    a = b;
  }
}

}  // namespace

MarkovModel fit_markov(const TransactionLog& log, TimeRange window, const IdMap& items,
                       const RecencyWeightFn& weight, const MarkovFitOptions& options) {
  MarkovModel model;
  if (window.empty()) return model;
  std::int64_t anchor = options.decay_anchor.value_or(window.end);
  auto w_of = [&](std::int64_t t) {
    if (!weight) return 1.0;
    return weight(static_cast<double>(anchor - t) / kSecondsPerDay);
  };

  // per-user event lists in first-appearance order (deterministic merge)
  std::unordered_map<std::string, std::size_t> user_index;
  std::vector<UserEvents> events;
  for (const auto& r : log.records) {
    if (!window.contains(r.time)) continue;
    ItemId i = items.index_of(r.item);
    if (i < 0) continue;
    auto [it, fresh] = user_index.try_emplace(r.user, events.size());
    if (fresh) events.emplace_back();
    events[it->second].push_back({i, r.time});
  }

  for (const auto& evs : events) {
    if (options.dedupe_per_user)
      fit_user_dedupe(model, evs, w_of);
    else
      fit_user_events(model, evs, w_of);
  }
  return model;
}

std::vector<ScoredItem> predict_markov(const MarkovModel& model,
                                       const std::vector<ItemId>& recent_items, int n,
                                       ContextCombine combine) {
  if (n < 1) throw std::invalid_argument("predict_markov: n must be >= 1");
  std::vector<ScoredItem> out;
  if (recent_items.empty()) return out;

  auto in_history = [&](ItemId i) {
    return std::find(recent_items.begin(), recent_items.end(), i) != recent_items.end();
  };
  std::map<ItemId, double> agg;
  auto add = [&](ItemId i, double p) {
    if (!(p > 0.0) || in_history(i)) return;
    auto [it, fresh] = agg.try_emplace(i, p);
    if (!fresh) it->second = combine == ContextCombine::Max ? std::max(it->second, p) : it->second + p;
  };

  for (ItemId j : recent_items) {
    auto it = model.first_order().find(j);
    if (it == model.first_order().end()) continue;
    for (const auto& [i, cell] : it->second.successors) add(i, model.prob_first(j, i));
  }
  for (std::size_t a = 0; a < recent_items.size(); ++a) {
    for (std::size_t b = a + 1; b < recent_items.size(); ++b) {
      ItemId j1 = recent_items[a], j2 = recent_items[b];
      auto it = model.second_order().find(MarkovModel::pair_key(j1, j2));
      if (it == model.second_order().end()) continue;
      for (const auto& [i, cell] : it->second.successors) add(i, model.prob_second(j1, j2, i));
    }
  }

  out.reserve(agg.size());
  for (const auto& [i, p] : agg) out.push_back({i, p});
  std::sort(out.begin(), out.end(),
            [](const ScoredItem& a, const ScoredItem& b) { return ranks_before(a, b); });
  if (static_cast<int>(out.size()) > n) out.resize(n);
  return out;
}

CategoryModel::CategoryModel(std::int32_t num_users, std::int32_t num_categories,
                             std::vector<std::int32_t> item_category)
    : num_categories_(num_categories), item_category_(std::move(item_category)) {
  interest_.resize(num_users);
  item_pop_.assign(item_category_.size(), 0.0);
}

const std::vector<double>& CategoryModel::interest_of(UserId u) const {
  return interest_[u].empty() ? fallback_ : interest_[u];
}

void CategoryModel::finalize() {
  active_items_.clear();
  std::vector<char> observed(num_categories_, 0);
  for (ItemId i = 0; i < static_cast<ItemId>(item_pop_.size()); ++i) {
    if (item_pop_[i] > 0.0) {
      active_items_.push_back(i);
      observed[item_category_[i]] = 1;
    }
  }
  int n_observed = 0;
  for (char c : observed) n_observed += c;
  fallback_.assign(num_categories_, 0.0);
  if (n_observed > 0) {
    for (std::int32_t c = 0; c < num_categories_; ++c)
      if (observed[c]) fallback_[c] = 1.0 / n_observed;
  }
}

CategoryModel fit_category(const TransactionLog& log, const IdMap& users, const IdMap& items,
                           const std::vector<std::int32_t>& item_category,
                           std::int32_t num_categories, TimeRange interest_window,
                           TimeRange popularity_window, const RecencyWeightFn& weight,
                           std::optional<std::int64_t> decay_anchor) {
  if (static_cast<std::int32_t>(item_category.size()) != items.size())
    throw std::invalid_argument("fit_category: taxonomy size mismatch");
  for (std::int32_t c : item_category) {
    if (c < 0 || c >= num_categories) throw std::invalid_argument("fit_category: category out of range");
  }
  CategoryModel model(users.size(), num_categories, item_category);
  std::int64_t anchor =
      decay_anchor.value_or(std::max(interest_window.end, popularity_window.end));
  auto w_of = [&](std::int64_t t) {
    if (!weight) return 1.0;
    return weight(static_cast<double>(anchor - t) / kSecondsPerDay);
  };

  std::vector<std::vector<double>> cat_counts(users.size());
  std::vector<double> item_counts(items.size(), 0.0);
  for (const auto& r : log.records) {
    UserId u = users.index_of(r.user);
    ItemId i = items.index_of(r.item);
    if (u < 0 || i < 0) continue;
    if (interest_window.contains(r.time)) {
      auto& cc = cat_counts[u];
      if (cc.empty()) cc.assign(num_categories, 0.0);
      cc[item_category[i]] += w_of(r.time);
    }
    if (popularity_window.contains(r.time)) item_counts[i] += w_of(r.time);
  }

  for (UserId u = 0; u < users.size(); ++u) {
    auto& cc = cat_counts[u];
    if (cc.empty()) continue;
    double total = 0.0;
    for (double v : cc) total += v;
    if (!(total > 0.0)) continue;
    auto& interest = model.mutable_interest()[u];
    interest.assign(num_categories, 0.0);
    for (std::int32_t c = 0; c < num_categories; ++c) interest[c] = cc[c] / total;
  }

  std::vector<double> cat_totals(num_categories, 0.0);
  for (ItemId i = 0; i < items.size(); ++i) cat_totals[item_category[i]] += item_counts[i];
  for (ItemId i = 0; i < items.size(); ++i) {
    double t = cat_totals[item_category[i]];
    model.mutable_item_pop()[i] = t > 0.0 ? item_counts[i] / t : 0.0;
  }
  model.finalize();
  return model;
}

std::vector<ScoredItem> predict_category_interest(const CategoryModel& model,
                                                  const std::vector<double>& interest, int n) {
  if (n < 1) throw std::invalid_argument("predict_category: n must be >= 1");
  std::vector<ScoredItem> out;
  if (interest.empty()) return out;
  for (ItemId i : model.active_items()) {
    double sc = model.item_popularity(i) * interest[model.category_of(i)];
    if (sc > 0.0) out.push_back({i, sc});
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredItem& a, const ScoredItem& b) { return ranks_before(a, b); });
  if (static_cast<int>(out.size()) > n) out.resize(n);
  return out;
}

std::vector<ScoredItem> predict_category(const CategoryModel& model, UserId u, int n) {
  return predict_category_interest(model, model.interest_of(u), n);
}

PopularityModel fit_popularity(const TransactionLog& log, TimeRange window, const IdMap& items,
                               const RecencyWeightFn& weight,
                               std::optional<std::int64_t> decay_anchor) {
  PopularityModel model;
  model.score.assign(items.size(), 0.0);
  std::int64_t anchor = decay_anchor.value_or(window.end);
  double total = 0.0;
  for (const auto& r : log.records) {
    if (!window.contains(r.time)) continue;
    ItemId i = items.index_of(r.item);
    if (i < 0) continue;
    double w = weight ? weight(static_cast<double>(anchor - r.time) / kSecondsPerDay) : 1.0;
    model.score[i] += w;
    total += w;
  }
  if (total > 0.0) {
    for (double& s : model.score) s /= total;
  }
  return model;
}

std::vector<ScoredItem> predict_popularity(const PopularityModel& model,
                                           const std::vector<ItemId>& exclude, int n) {
  if (n < 1) throw std::invalid_argument("predict_popularity: n must be >= 1");
  std::vector<ScoredItem> out;
  for (ItemId i = 0; i < static_cast<ItemId>(model.score.size()); ++i) {
    if (!(model.score[i] > 0.0)) continue;
    if (std::find(exclude.begin(), exclude.end(), i) != exclude.end()) continue;
    out.push_back({i, model.score[i]});
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredItem& a, const ScoredItem& b) { return ranks_before(a, b); });
  if (static_cast<int>(out.size()) > n) out.resize(n);
  return out;
}

}  // namespace biasrec
