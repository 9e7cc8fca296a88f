#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace biasrec {

using UserId = std::int32_t;
using ItemId = std::int32_t;

/// Bias value that removes an item from recommendation entirely. A large
/// finite constant rather than an IEEE infinity so arithmetic with it stays
/// well-defined; comparisons use `is_excluded_bias`.
inline constexpr double kNegInf = -1.0e18;

inline bool is_excluded_bias(double b) { return b <= kNegInf; }

/// One timestamped purchase event. Timestamps are UTC epoch seconds.
struct Transaction {
  std::string user;
  std::string item;
  std::int64_t time = 0;
};

/// Half-open time window [begin, end) in epoch seconds.
struct TimeRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t t) const { return t >= begin && t < end; }
  bool empty() const { return end <= begin; }
};

/// Purchase events sorted by (time, input order). Input need not be sorted;
/// call `sort_by_time` after filling `records`.
struct TransactionLog {
  std::vector<Transaction> records;

  void sort_by_time();
  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

/// Bijection between external string ids and dense indices 0..n-1.
class IdMap {
 public:
  std::int32_t add(const std::string& name);          // inserts if absent
  std::int32_t index_of(const std::string& name) const;  // -1 if absent
  const std::string& name_of(std::int32_t idx) const;
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }

 private:
  std::unordered_map<std::string, std::int32_t> forward_;
  std::vector<std::string> names_;
};

struct ScoredItem {
  ItemId item = 0;
  double score = 0.0;
};

/// Deterministic ranking order: score descending, item index ascending.
inline bool ranks_before(double score_a, ItemId item_a, double score_b, ItemId item_b) {
  if (score_a != score_b) return score_a > score_b;
  return item_a < item_b;
}

inline bool ranks_before(const ScoredItem& a, const ScoredItem& b) {
  return ranks_before(a.score, a.item, b.score, b.item);
}

/// Sparse binary relevance y_ui built from recent transactions. Users with no
/// relevant items are dropped at construction; items are deduplicated and kept
/// sorted per user. Immutable after construction.
class RelevanceSet {
 public:
  RelevanceSet(std::int32_t num_users, std::int32_t num_items,
               std::vector<std::vector<ItemId>> per_user_items);

  std::int32_t num_users() const { return num_users_; }
  std::int32_t num_items() const { return num_items_; }

  /// Users with relevant_count >= 1, ascending.
  const std::vector<UserId>& users() const { return users_; }
  int relevant_count(UserId u) const { return static_cast<int>(items_[u].size()); }
  bool is_relevant(UserId u, ItemId i) const;
  const std::vector<ItemId>& items_of(UserId u) const { return items_[u]; }
  /// Users for which item i is relevant, ascending.
  const std::vector<UserId>& users_of_item(ItemId i) const { return inverted_[i]; }

 private:
  std::int32_t num_users_;
  std::int32_t num_items_;
  std::vector<std::vector<ItemId>> items_;     // per user, sorted
  std::vector<UserId> users_;                  // users with >= 1 relevant item
  std::vector<std::vector<UserId>> inverted_;  // per item, sorted
};

/// Per-user sparse top-N prediction scores from a base model. Entries beyond
/// capacity are dropped at construction; absent entries read as score 0.
/// Immutable after construction.
class ScoreStore {
 public:
  ScoreStore(std::int32_t num_users, std::int32_t num_items, int capacity,
             std::vector<std::vector<ScoredItem>> rows);

  std::int32_t num_users() const { return num_users_; }
  std::int32_t num_items() const { return num_items_; }
  int capacity() const { return capacity_; }

  /// Row sorted by (score desc, item asc), at most `capacity` entries.
  const std::vector<ScoredItem>& row(UserId u) const { return rows_[u]; }
  /// Stored score, or 0 when the (user, item) entry is absent.
  double score(UserId u, ItemId i) const;
  bool has(UserId u, ItemId i) const;
  /// Users whose row contains item i, ascending.
  const std::vector<UserId>& users_with_item(ItemId i) const { return inverted_[i]; }

 private:
  std::int32_t num_users_;
  std::int32_t num_items_;
  int capacity_;
  std::vector<std::vector<ScoredItem>> rows_;          // rank order
  std::vector<std::vector<ScoredItem>> rows_by_item_;  // item order, for lookup
  std::vector<std::vector<UserId>> inverted_;
};

/// Keeps the N highest-scoring items per user (ties to the lower item index).
ScoreStore build_score_store(std::int32_t num_users, std::int32_t num_items, int capacity,
                             std::vector<std::vector<ScoredItem>> rows);

/// Per-item additive bias b_i. Defaults to all zeros; entries of kNegInf mark
/// items excluded from recommendation.
class BiasVector {
 public:
  BiasVector() = default;
  explicit BiasVector(std::int32_t num_items) : b_(num_items, 0.0) {}

  std::int32_t size() const { return static_cast<std::int32_t>(b_.size()); }
  double operator[](ItemId i) const { return b_[i]; }
  void set(ItemId i, double v) { b_[i] = v; }
  bool excluded(ItemId i) const { return is_excluded_bias(b_[i]); }
  const std::vector<double>& values() const { return b_; }

 private:
  std::vector<double> b_;
};

/// Top-k selection over one user's sparse score list under additive biases.
/// Returns up to k items ordered by (f + b) descending, ties to the lower
/// item index. Items with an excluding bias never appear. Candidates are the
/// entries of `user_scores`; callers wanting zero-score candidates add them
/// to the list explicitly.
std::vector<ItemId> select_topk(const std::vector<ScoredItem>& user_scores,
                                const BiasVector& bias, int k);

/// Maintained per-user top-k lists of biased scores, incrementally updatable
/// as single-item biases change.
///
/// The candidate set of user u is: items stored in u's ScoreStore row, plus
/// every item with a finite nonzero bias (at score 0 where unstored). Items
/// with bias <= kNegInf are never candidates. Internally one extra rank
/// (k+1) is maintained so that the ranking with any single item removed is
/// known exactly.
class TopKState {
 public:
  TopKState(const ScoreStore& store, const BiasVector& bias, int k);

  int k() const { return k_; }
  std::int32_t num_users() const { return store_->num_users(); }

  /// Maintained list (up to k+1 entries), biased scores, rank order.
  const std::vector<ScoredItem>& full_list(UserId u) const { return lists_[u]; }
  /// First k entries of the maintained list.
  std::vector<ItemId> topk_items(UserId u) const;
  /// Biased score at rank k, or -infinity when fewer than k candidates.
  double kth_score(UserId u) const;

  /// Applies a single-item bias change. The caller must have already written
  /// `new_bias` into the BiasVector this state was constructed with. Returns
  /// the users whose maintained list changed (buffer reused across calls).
  const std::vector<UserId>& apply_bias_update(ItemId item, double old_bias, double new_bias);

  /// Recomputes every user from scratch (e.g. after bulk bias replacement).
  void rebuild();

 private:
  void recompute_user(UserId u);
  void refresh_index(UserId u, const std::vector<ScoredItem>& old_list);
  void register_candidate_bias(ItemId item, double b);
  void unregister_candidate_bias(ItemId item, double b);

  const ScoreStore* store_;
  const BiasVector* bias_;
  int k_;
  int depth_;  // k + 1
  std::vector<std::vector<ScoredItem>> lists_;
  // Score an unstored candidate must beat to enter the maintained list;
  // -infinity while the list is not full.
  std::vector<double> boundary_;
  // item -> users whose maintained list currently contains it
  std::vector<std::unordered_set<UserId>> holders_;
  // finite nonzero biases, (bias desc, item asc)
  std::set<std::pair<double, ItemId>, std::greater<>> biased_items_;
  std::vector<UserId> affected_;
  std::vector<ScoredItem> scratch_;
};

}  // namespace biasrec
