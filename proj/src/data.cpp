#include "biasrec/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace biasrec {

namespace {

// days since 1970-01-01 from a civil date (Howard Hinnant's algorithm)
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

bool parse_int(const std::string& s, std::size_t from, std::size_t len, int& out) {
  if (from + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = from; i < from + len; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(const std::string& text) {
  // YYYY-MM-DD[THH:MM:SS[Z]]
  int y, mo, d, h = 0, mi = 0, se = 0;
  if (text.size() < 10) return std::nullopt;
  if (!parse_int(text, 0, 4, y) || text[4] != '-' || !parse_int(text, 5, 2, mo) ||
      text[7] != '-' || !parse_int(text, 8, 2, d))
    return std::nullopt;
  std::size_t n = text.size();
  if (n > 10) {
    if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
    if (n < 19) return std::nullopt;
    if (!parse_int(text, 11, 2, h) || text[13] != ':' || !parse_int(text, 14, 2, mi) ||
        text[16] != ':' || !parse_int(text, 17, 2, se))
      return std::nullopt;
    if (n == 20) {
      if (text[19] != 'Z') return std::nullopt;
    } else if (n != 19) {
      return std::nullopt;
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) return std::nullopt;
  return days_from_civil(y, mo, d) * kSecondsPerDayInt + h * 3600 + mi * 60 + se;
}

std::string format_timestamp(std::int64_t t) {
  std::int64_t days = t / kSecondsPerDayInt;
  std::int64_t rem = t % kSecondsPerDayInt;
  if (rem < 0) {
    rem += kSecondsPerDayInt;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

namespace {

ParseResult parse_transactions_stream(std::istream& in, bool strict) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    bool ok = t1 != std::string::npos && t2 != std::string::npos && t1 > 0 && t2 > t1 + 1;
    std::optional<std::int64_t> ts;
    if (ok) ts = parse_timestamp(line.substr(t2 + 1));
    if (!ok || !ts) {
      if (strict) throw std::runtime_error("malformed transaction at line " + std::to_string(line_no));
      ++result.skipped;
      continue;
    }
    result.log.records.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), *ts});
  }
  result.log.sort_by_time();
  return result;
}

}  // namespace

ParseResult parse_transactions(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transaction file: " + path);
  return parse_transactions_stream(in, strict);
}

ParseResult parse_transactions_text(const std::string& text, bool strict) {
  std::istringstream in(text);
  return parse_transactions_stream(in, strict);
}

TemporalSplit temporal_split(const TransactionLog& log, std::int64_t split_date, int recent_days,
                             int test_days) {
  if (recent_days <= 0) throw std::invalid_argument("temporal_split: recent_days must be positive");
  if (test_days <= 0) throw std::invalid_argument("temporal_split: test_days must be positive");
  if (log.empty()) throw std::invalid_argument("temporal_split: empty log");

  TemporalSplit split;
  std::int64_t recent_begin = split_date - static_cast<std::int64_t>(recent_days) * kSecondsPerDayInt;
  std::int64_t test_end = split_date + static_cast<std::int64_t>(test_days) * kSecondsPerDayInt;
  split.train_range = {std::numeric_limits<std::int64_t>::min(), recent_begin};
  split.recent_range = {recent_begin, split_date};
  split.test_range = {split_date, test_end};

  for (const auto& r : log.records) {
    if (split.train_range.contains(r.time))
      split.train.records.push_back(r);
    else if (split.recent_range.contains(r.time))
      split.recent.records.push_back(r);
    else if (split.test_range.contains(r.time))
      split.test.records.push_back(r);
  }
  if (split.test.empty()) throw std::runtime_error("temporal_split: test window is empty");
  return split;
}

namespace {

// uniform in [0, 1) from the full 64-bit engine output; fully specified,
// unlike the std distributions
double canonical(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int poisson_knuth(std::mt19937_64& rng, double lambda) {
  double l = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= canonical(rng);
  } while (p > l);
  return k - 1;
}

int sample_discrete(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  double total = cumulative.back();
  double x = canonical(rng) * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  if (it == cumulative.end()) return static_cast<int>(cumulative.size()) - 1;
  return static_cast<int>(it - cumulative.begin());
}

}  // namespace

std::string drift_user_name(int u) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%05d", u);
  return buf;
}

std::string drift_item_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "i%04d", i);
  return buf;
}

std::string drift_category_name(int c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%02d", c);
  return buf;
}

DriftResult generate_drift(const DriftConfig& config) {
  if (config.n_users <= 0 || config.m_items <= 0 || config.n_days <= 0 || config.categories <= 0)
    throw std::invalid_argument("generate_drift: counts must be positive");
  if (config.churn_rate < 0.0 || config.churn_rate > 1.0)
    throw std::invalid_argument("generate_drift: churn_rate must be in [0,1]");
  if (config.trend_spike < 1.0)
    throw std::invalid_argument("generate_drift: trend_spike must be >= 1");

  std::mt19937_64 rng(config.seed);
  DriftResult out;
  out.start_time = *parse_timestamp("2013-06-01");

  out.item_category.resize(config.m_items);
  for (int i = 0; i < config.m_items; ++i)
    out.item_category[i] = static_cast<std::int32_t>(rng() % config.categories);

  // base popularity weights, heavy-tailed
  std::vector<double> base(config.m_items);
  for (double& w : base) w = -std::log(1.0 - canonical(rng)) + 0.05;

  // per-user activity and a two-category preference
  std::vector<double> activity(config.n_users);
  std::vector<std::pair<int, int>> pref(config.n_users);
  for (int u = 0; u < config.n_users; ++u) {
    double z = canonical(rng);
    activity[u] = 0.03 + 0.4 * z * z;
    int c1 = static_cast<int>(rng() % config.categories);
    int c2 = static_cast<int>(rng() % config.categories);
    pref[u] = {c1, c2};
  }

  int trend_size = std::max(1, config.m_items / 20);
  std::vector<int> trending;
  std::vector<double> day_weight(config.m_items);
  std::vector<double> cum_all(config.m_items);
  std::vector<double> cum_pref(config.m_items);

  for (int day = 0; day < config.n_days; ++day) {
    // popularity churn
    for (int i = 0; i < config.m_items; ++i) {
      if (canonical(rng) < config.churn_rate) base[i] = -std::log(1.0 - canonical(rng)) + 0.05;
    }
    // weekly rotation of the trending set
    if (day % 7 == 0) {
      trending.clear();
      for (int t = 0; t < trend_size; ++t) trending.push_back(static_cast<int>(rng() % config.m_items));
    }
    for (int i = 0; i < config.m_items; ++i) day_weight[i] = base[i];
    for (int i : trending) day_weight[i] = base[i] * config.trend_spike;

    double acc = 0.0;
    for (int i = 0; i < config.m_items; ++i) {
      acc += day_weight[i];
      cum_all[i] = acc;
    }

    for (int u = 0; u < config.n_users; ++u) {
      int purchases = poisson_knuth(rng, activity[u]);
      if (purchases == 0) continue;
      // category-restricted weights for this user
      double pacc = 0.0;
      for (int i = 0; i < config.m_items; ++i) {
        std::int32_t c = out.item_category[i];
        double w = (c == pref[u].first || c == pref[u].second) ? day_weight[i] : 0.0;
        pacc += w;
        cum_pref[i] = pacc;
      }
      for (int p = 0; p < purchases; ++p) {
        int item;
        if (pacc > 0.0 && canonical(rng) < 0.4)
          item = sample_discrete(rng, cum_pref);
        else
          item = sample_discrete(rng, cum_all);
        std::int64_t t = out.start_time + static_cast<std::int64_t>(day) * kSecondsPerDayInt +
                         static_cast<std::int64_t>(canonical(rng) * kSecondsPerDayInt);
        out.log.records.push_back({drift_user_name(u), drift_item_name(item), t});
      }
    }
  }
  out.log.sort_by_time();
  return out;
}

void collect_ids(const TransactionLog& log, IdMap& users, IdMap& items) {
  for (const auto& r : log.records) {
    if (r.user.empty() || r.item.empty()) throw std::invalid_argument("empty user or item id");
    users.add(r.user);
    items.add(r.item);
  }
}

RelevanceSet relevance_from_log(const TransactionLog& log, const IdMap& users, const IdMap& items) {
  std::vector<std::vector<ItemId>> per_user(users.size());
  for (const auto& r : log.records) {
    UserId u = users.index_of(r.user);
    ItemId i = items.index_of(r.item);
    if (u < 0 || i < 0) continue;
    per_user[u].push_back(i);
  }
  return RelevanceSet(users.size(), items.size(), std::move(per_user));
}

std::vector<std::vector<ItemId>> recent_context_items(const TransactionLog& log,
                                                      const IdMap& users, const IdMap& items,
                                                      int max_items) {
  std::vector<std::vector<ItemId>> ctx(users.size());
  // walk backwards in time, collect distinct items until max_items
  for (auto it = log.records.rbegin(); it != log.records.rend(); ++it) {
    UserId u = users.index_of(it->user);
    ItemId i = items.index_of(it->item);
    if (u < 0 || i < 0) continue;
    auto& v = ctx[u];
    if (static_cast<int>(v.size()) >= max_items) continue;
    if (std::find(v.begin(), v.end(), i) == v.end()) v.push_back(i);
  }
  return ctx;
}

}  // namespace biasrec
