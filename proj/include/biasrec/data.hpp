#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biasrec/core.hpp"

namespace biasrec {

/// "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z', or a bare date taken as
/// midnight UTC. Second resolution.
std::optional<std::int64_t> parse_timestamp(const std::string& text);
std::string format_timestamp(std::int64_t t);

constexpr std::int64_t kSecondsPerDayInt = 86400;

struct ParseResult {
  TransactionLog log;   // sorted by time
  std::size_t skipped = 0;  // malformed lines
};

/// Reads `user<TAB>item<TAB>timestamp` lines; '#' lines are comments.
/// Malformed lines are skipped and counted; in strict mode the first one
/// aborts the parse.
ParseResult parse_transactions(const std::string& path, bool strict = false);
ParseResult parse_transactions_text(const std::string& text, bool strict = false);

/// Disjoint half-open slices: train before the recent window, recent covering
/// `recent_days` before the split date, test covering `test_days` after it.
struct TemporalSplit {
  TransactionLog train;
  TransactionLog recent;
  TransactionLog test;
  TimeRange train_range;
  TimeRange recent_range;
  TimeRange test_range;
};

/// Throws when the test slice comes out empty.
TemporalSplit temporal_split(const TransactionLog& log, std::int64_t split_date, int recent_days,
                             int test_days);

/// Synthetic benchmark with temporal popularity drift: items churn their base
/// popularity and a rotating trending set gets a multiplicative boost.
struct DriftConfig {
  int n_users = 2000;
  int m_items = 200;
  int n_days = 120;
  double churn_rate = 0.2;   // per-item daily probability of resampling popularity
  double trend_spike = 10.0; // weight multiplier for the trending set
  int categories = 10;
  std::uint64_t seed = 1;
};

struct DriftResult {
  TransactionLog log;                       // sorted, deterministic given seed
  std::vector<std::int32_t> item_category;  // item index -> category index
  std::int64_t start_time = 0;
};

std::string drift_user_name(int u);
std::string drift_item_name(int i);
std::string drift_category_name(int c);

DriftResult generate_drift(const DriftConfig& config);

/// Builds id maps from a log in first-appearance order.
void collect_ids(const TransactionLog& log, IdMap& users, IdMap& items);

/// Per-user relevant item sets from a window's purchases (users with none
/// are dropped by the RelevanceSet itself).
RelevanceSet relevance_from_log(const TransactionLog& log, const IdMap& users, const IdMap& items);

/// Last `max_items` distinct items per user, most recent first.
std::vector<std::vector<ItemId>> recent_context_items(const TransactionLog& log,
                                                      const IdMap& users, const IdMap& items,
                                                      int max_items);

}  // namespace biasrec
