#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "biasrec/core.hpp"

namespace biasrec {

/// Exponential recency decay: exp(-delta_t / beta), delta_t in days.
double decay_weight(double delta_t_days, double beta);

/// Weight applied to a contribution, as a function of the gap in days
/// between the event and the anchor date. Empty function = weight 1.
using RecencyWeightFn = std::function<double(double delta_days)>;

/// First- and second-order co-purchase chain. Cells hold both the plain user
/// count and the (possibly decayed) weight; transition probabilities are
/// derived from weights.
class MarkovModel {
 public:
  struct Cell {
    std::int64_t count = 0;
    double weight = 0.0;
  };
  struct Context {
    Cell total;                              // users who bought the context
    std::map<ItemId, Cell> successors;       // users who then bought i
  };

  static std::uint64_t pair_key(ItemId a, ItemId b);

  bool empty() const { return first_.empty() && second_.empty(); }
  const std::map<ItemId, Context>& first_order() const { return first_; }
  const std::map<std::uint64_t, Context>& second_order() const { return second_; }

  /// P(buy i | bought j); 0 when the context is unknown.
  double prob_first(ItemId j, ItemId i) const;
  /// P(buy i | bought j1, j2); 0 when the pair context is unknown.
  double prob_second(ItemId j1, ItemId j2, ItemId i) const;

  // mutable access for fitting and deserialization
  Context& first_context(ItemId j) { return first_[j]; }
  Context& second_context(ItemId j1, ItemId j2) { return second_[pair_key(j1, j2)]; }

 private:
  std::map<ItemId, Context> first_;
  std::map<std::uint64_t, Context> second_;
};

struct MarkovFitOptions {
  /// One contribution per user per cell (paper convention). When false,
  /// every event occurrence contributes.
  bool dedupe_per_user = true;
  /// Date the decay weight measures back from; defaults to window.end.
  std::optional<std::int64_t> decay_anchor;
};

/// Counts user-level ordered co-purchases inside the window. Contexts are the
/// user's distinct strictly-earlier purchases (single items and pairs);
/// same-timestamp purchases contribute no transition to each other.
MarkovModel fit_markov(const TransactionLog& log, TimeRange window, const IdMap& items,
                       const RecencyWeightFn& weight = {},
                       const MarkovFitOptions& options = {});

enum class ContextCombine { Max, Sum };

/// Scores successors of the user's recent items (single and pair contexts),
/// combining per successor, excluding the conditioning items. Top N by
/// (score desc, item asc).
std::vector<ScoredItem> predict_markov(const MarkovModel& model,
                                       const std::vector<ItemId>& recent_items, int n,
                                       ContextCombine combine = ContextCombine::Max);

/// Category taxonomy plus per-user interest and within-category popularity.
class CategoryModel {
 public:
  CategoryModel(std::int32_t num_users, std::int32_t num_categories,
                std::vector<std::int32_t> item_category);

  std::int32_t num_categories() const { return num_categories_; }
  std::int32_t category_of(ItemId i) const { return item_category_[i]; }
  /// P(buy in c | user u); the uniform fallback when the user has no history.
  const std::vector<double>& interest_of(UserId u) const;
  const std::vector<double>& fallback_interest() const { return fallback_; }
  bool has_history(UserId u) const { return !interest_[u].empty(); }
  /// P(buy i | buy in category_of(i)).
  double item_popularity(ItemId i) const { return item_pop_[i]; }
  /// Items with positive within-category popularity, ascending.
  const std::vector<ItemId>& active_items() const { return active_items_; }

  // fitting/deserialization access
  std::vector<std::vector<double>>& mutable_interest() { return interest_; }
  std::vector<double>& mutable_item_pop() { return item_pop_; }
  void finalize();  // recomputes fallback_ and active_items_

 private:
  std::int32_t num_categories_;
  std::vector<std::int32_t> item_category_;
  std::vector<std::vector<double>> interest_;  // empty vector = no history
  std::vector<double> fallback_;
  std::vector<double> item_pop_;
  std::vector<ItemId> active_items_;
};

/// User interest from category counts in the interest window; within-category
/// item popularity from the (recent) popularity window.
CategoryModel fit_category(const TransactionLog& log, const IdMap& users, const IdMap& items,
                           const std::vector<std::int32_t>& item_category,
                           std::int32_t num_categories, TimeRange interest_window,
                           TimeRange popularity_window, const RecencyWeightFn& weight = {},
                           std::optional<std::int64_t> decay_anchor = {});

/// score(i) = P(i | cat(i)) * P(cat(i) | u); top N with the standard tie-break.
std::vector<ScoredItem> predict_category(const CategoryModel& model, UserId u, int n);

/// Same scoring against an explicit interest distribution (e.g. the fallback
/// for users unknown to the model).
std::vector<ScoredItem> predict_category_interest(const CategoryModel& model,
                                                  const std::vector<double>& interest, int n);

/// Global popularity over a window, normalized to sum 1.
struct PopularityModel {
  std::vector<double> score;  // per item

  bool empty() const { return score.empty(); }
};

PopularityModel fit_popularity(const TransactionLog& log, TimeRange window, const IdMap& items,
                               const RecencyWeightFn& weight = {},
                               std::optional<std::int64_t> decay_anchor = {});

std::vector<ScoredItem> predict_popularity(const PopularityModel& model,
                                           const std::vector<ItemId>& exclude, int n);

}  // namespace biasrec
