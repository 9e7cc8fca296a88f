#include "biasrec/core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace biasrec {

void TransactionLog::sort_by_time() {
  // stable: same-timestamp records keep input order
  std::stable_sort(records.begin(), records.end(),
                   [](const Transaction& a, const Transaction& b) { return a.time < b.time; });
}

std::int32_t IdMap::add(const std::string& name) {
  auto it = forward_.find(name);
  if (it != forward_.end()) return it->second;
  std::int32_t idx = static_cast<std::int32_t>(names_.size());
  forward_.emplace(name, idx);
  names_.push_back(name);
  return idx;
}

std::int32_t IdMap::index_of(const std::string& name) const {
  auto it = forward_.find(name);
  return it == forward_.end() ? -1 : it->second;
}

const std::string& IdMap::name_of(std::int32_t idx) const { return names_.at(idx); }

RelevanceSet::RelevanceSet(std::int32_t num_users, std::int32_t num_items,
                           std::vector<std::vector<ItemId>> per_user_items)
    : num_users_(num_users), num_items_(num_items), items_(std::move(per_user_items)) {
  items_.resize(num_users_);
  inverted_.resize(num_items_);
  for (UserId u = 0; u < num_users_; ++u) {
    auto& v = items_[u];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (!v.empty()) users_.push_back(u);
    for (ItemId i : v) inverted_[i].push_back(u);
  }
}

bool RelevanceSet::is_relevant(UserId u, ItemId i) const {
  const auto& v = items_[u];
  return std::binary_search(v.begin(), v.end(), i);
}

ScoreStore::ScoreStore(std::int32_t num_users, std::int32_t num_items, int capacity,
                       std::vector<std::vector<ScoredItem>> rows)
    : num_users_(num_users), num_items_(num_items), capacity_(capacity), rows_(std::move(rows)) {
  if (capacity_ < 1) throw std::invalid_argument("ScoreStore capacity must be >= 1");
  rows_.resize(num_users_);
  rows_by_item_.resize(num_users_);
  inverted_.resize(num_items_);
  for (UserId u = 0; u < num_users_; ++u) {
    auto& r = rows_[u];
    for (const auto& e : r) {
      if (!std::isfinite(e.score)) throw std::invalid_argument("ScoreStore scores must be finite");
      if (e.item < 0 || e.item >= num_items_) throw std::invalid_argument("ScoreStore item out of range");
    }
    std::sort(r.begin(), r.end(), [](const ScoredItem& a, const ScoredItem& b) { return ranks_before(a, b); });
    if (static_cast<int>(r.size()) > capacity_) r.resize(capacity_);
    auto& by_item = rows_by_item_[u];
    by_item = r;
    std::sort(by_item.begin(), by_item.end(),
              [](const ScoredItem& a, const ScoredItem& b) { return a.item < b.item; });
    for (std::size_t j = 1; j < by_item.size(); ++j) {
      if (by_item[j].item == by_item[j - 1].item)
        throw std::invalid_argument("duplicate item in ScoreStore row");
    }
    for (const auto& e : r) inverted_[e.item].push_back(u);
  }
}

double ScoreStore::score(UserId u, ItemId i) const {
  const auto& v = rows_by_item_[u];
  auto it = std::lower_bound(v.begin(), v.end(), i,
                             [](const ScoredItem& e, ItemId x) { return e.item < x; });
  if (it != v.end() && it->item == i) return it->score;
  return 0.0;
}

bool ScoreStore::has(UserId u, ItemId i) const {
  const auto& v = rows_by_item_[u];
  auto it = std::lower_bound(v.begin(), v.end(), i,
                             [](const ScoredItem& e, ItemId x) { return e.item < x; });
  return it != v.end() && it->item == i;
}

ScoreStore build_score_store(std::int32_t num_users, std::int32_t num_items, int capacity,
                             std::vector<std::vector<ScoredItem>> rows) {
  return ScoreStore(num_users, num_items, capacity, std::move(rows));
}

std::vector<ItemId> select_topk(const std::vector<ScoredItem>& user_scores,
                                const BiasVector& bias, int k) {
  if (k < 1) throw std::invalid_argument("select_topk: k must be >= 1");
  std::vector<ScoredItem> cands;
  cands.reserve(user_scores.size());
  for (const auto& e : user_scores) {
    if (bias.excluded(e.item)) continue;
    cands.push_back({e.item, e.score + bias[e.item]});
  }
  std::sort(cands.begin(), cands.end(),
            [](const ScoredItem& a, const ScoredItem& b) { return ranks_before(a, b); });
  std::vector<ItemId> out;
  out.reserve(std::min<std::size_t>(cands.size(), k));
  for (const auto& e : cands) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(e.item);
  }
  return out;
}

TopKState::TopKState(const ScoreStore& store, const BiasVector& bias, int k)
    : store_(&store), bias_(&bias), k_(k), depth_(k + 1) {
  if (k < 1) throw std::invalid_argument("TopKState: k must be >= 1");
  if (bias.size() != store.num_items()) throw std::invalid_argument("TopKState: bias size mismatch");
  lists_.resize(store.num_users());
  boundary_.assign(store.num_users(), -std::numeric_limits<double>::infinity());
  holders_.resize(store.num_items());
  rebuild();
}

std::vector<ItemId> TopKState::topk_items(UserId u) const {
  const auto& l = lists_[u];
  std::vector<ItemId> out;
  int n = std::min<int>(k_, static_cast<int>(l.size()));
  out.reserve(n);
  for (int p = 0; p < n; ++p) out.push_back(l[p].item);
  return out;
}

double TopKState::kth_score(UserId u) const {
  const auto& l = lists_[u];
  if (static_cast<int>(l.size()) < k_) return -std::numeric_limits<double>::infinity();
  return l[k_ - 1].score;
}

void TopKState::rebuild() {
  biased_items_.clear();
  for (ItemId i = 0; i < bias_->size(); ++i) {
    double b = (*bias_)[i];
    if (b != 0.0 && !is_excluded_bias(b)) biased_items_.insert({b, i});
  }
  for (auto& h : holders_) h.clear();
  for (UserId u = 0; u < store_->num_users(); ++u) {
    lists_[u].clear();
    recompute_user(u);
    for (const auto& e : lists_[u]) holders_[e.item].insert(u);
  }
}

void TopKState::recompute_user(UserId u) {
  scratch_.clear();
  for (const auto& e : store_->row(u)) {
    if (bias_->excluded(e.item)) continue;
    scratch_.push_back({e.item, e.score + (*bias_)[e.item]});
  }
  std::sort(scratch_.begin(), scratch_.end(),
            [](const ScoredItem& a, const ScoredItem& b) { return ranks_before(a, b); });
  if (static_cast<int>(scratch_.size()) > depth_) scratch_.resize(depth_);

  // merge unstored items carrying a finite nonzero bias (score = bias)
  for (const auto& [b, item] : biased_items_) {
    bool full = static_cast<int>(scratch_.size()) >= depth_;
    if (full && b < scratch_.back().score) break;  // later biases are <= b
    if (store_->has(u, item)) continue;            // already counted via the row
    ScoredItem cand{item, b};
    auto pos = std::lower_bound(scratch_.begin(), scratch_.end(), cand,
                                [](const ScoredItem& a, const ScoredItem& c) { return ranks_before(a, c); });
    if (full && pos == scratch_.end()) continue;
    scratch_.insert(pos, cand);
    if (static_cast<int>(scratch_.size()) > depth_) scratch_.pop_back();
  }

  lists_[u].assign(scratch_.begin(), scratch_.end());
  boundary_[u] = static_cast<int>(lists_[u].size()) >= depth_
                     ? lists_[u].back().score
                     : -std::numeric_limits<double>::infinity();
}

void TopKState::refresh_index(UserId u, const std::vector<ScoredItem>& old_list) {
  const auto& new_list = lists_[u];
  for (const auto& e : old_list) {
    bool still = std::any_of(new_list.begin(), new_list.end(),
                             [&](const ScoredItem& x) { return x.item == e.item; });
    if (!still) holders_[e.item].erase(u);
  }
  for (const auto& e : new_list) {
    bool was = std::any_of(old_list.begin(), old_list.end(),
                           [&](const ScoredItem& x) { return x.item == e.item; });
    if (!was) holders_[e.item].insert(u);
  }
}

const std::vector<UserId>& TopKState::apply_bias_update(ItemId item, double old_bias,
                                                        double new_bias) {
  affected_.clear();
  assert((*bias_)[item] == new_bias && "caller must write the new bias before applying");
  if (old_bias == new_bias) return affected_;

  bool old_unstored_cand = old_bias != 0.0 && !is_excluded_bias(old_bias);
  bool new_unstored_cand = new_bias != 0.0 && !is_excluded_bias(new_bias);
  if (old_unstored_cand) biased_items_.erase({old_bias, item});
  if (new_unstored_cand) biased_items_.insert({new_bias, item});

  std::vector<UserId> touched(holders_[item].begin(), holders_[item].end());

  if (!is_excluded_bias(new_bias)) {
    // stored users where the re-scored entry may now place
    for (UserId u : store_->users_with_item(item)) {
      if (holders_[item].count(u)) continue;
      double ns = store_->score(u, item) + new_bias;
      const auto& l = lists_[u];
      if (static_cast<int>(l.size()) < depth_ ||
          ranks_before(ns, item, l.back().score, l.back().item))
        touched.push_back(u);
    }
    // unstored users the new bias may now reach
    if (new_unstored_cand) {
      for (UserId u = 0; u < store_->num_users(); ++u) {
        if (new_bias < boundary_[u]) continue;
        if (holders_[item].count(u)) continue;
        const auto& l = lists_[u];
        bool enters = static_cast<int>(l.size()) < depth_ ||
                      ranks_before(new_bias, item, l.back().score, l.back().item);
        if (enters && !store_->has(u, item)) touched.push_back(u);
      }
    }
  }

  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  std::vector<ScoredItem> old_list;
  for (UserId u : touched) {
    old_list = lists_[u];
    recompute_user(u);
    bool changed = lists_[u].size() != old_list.size() ||
                   !std::equal(lists_[u].begin(), lists_[u].end(), old_list.begin(),
                               [](const ScoredItem& a, const ScoredItem& b) {
                                 return a.item == b.item && a.score == b.score;
                               });
    if (changed) {
      refresh_index(u, old_list);
      affected_.push_back(u);
    }
  }
  return affected_;
}

}  // namespace biasrec
