#include "biasrec/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "biasrec/io.hpp"
#include "biasrec/strategies.hpp"

namespace biasrec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_out_dir() {
  const char* env = std::getenv("BIASREC_OUTPUT_DIR");
  return env && *env ? env : ".";
}

std::string config_hash(const RunConfig& c) {
  std::ostringstream s;
  s << c.out_dir << '|' << c.seed << '|' << c.strict_parse << '|' << c.log_path << '|'
    << c.scores_path << '|' << c.bias_path << '|' << c.warm_start_path << '|' << c.taxonomy_path
    << '|' << c.model_path << '|' << c.out_file << '|' << c.model_kind << '|' << c.split_date
    << '|' << c.from_date << '|' << c.to_date << '|' << c.recent_days << '|' << c.test_days << '|'
    << c.k << '|' << c.capacity << '|' << c.metric << '|' << c.max_cycles << '|'
    << c.min_changed_fraction << '|' << c.top_predicted << '|' << c.top_recent << '|'
    << c.tie_epsilon << '|' << c.no_prune << '|' << c.beta << '|' << c.context_items << '|'
    << c.predict_n << '|';
  for (const auto& st : c.strategies) s << st << ',';
  s << '|';
  for (int l : c.overlap_levels) s << l << ',';
  s << '|' << c.drift.n_users << '|' << c.drift.m_items << '|' << c.drift.n_days << '|'
    << c.drift.churn_rate << '|' << c.drift.trend_spike << '|' << c.drift.categories << '|'
    << c.drift.seed;
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string out_dir_of(const RunConfig& c) {
  std::string dir = c.out_dir.empty() ? default_out_dir() : c.out_dir;
  fs::create_directories(dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::int64_t parse_date_field(const std::string& field, const std::string& value) {
  if (value.empty()) throw ConfigError(field, "missing date");
  auto t = parse_timestamp(value);
  if (!t) throw ConfigError(field, "not an ISO-8601 date: " + value);
  return *t;
}

MetricSpec metric_spec_of(const RunConfig& c) {
  auto kind = metric_from_name(c.metric);
  if (!kind) throw ConfigError("metric", "unknown metric: " + c.metric + " (expected acc|map|ndcg)");
  if (c.k < 1) throw ConfigError("k", "k must be >= 1");
  return {*kind, c.k};
}

OptimizerConfig optimizer_config_of(const RunConfig& c) {
  OptimizerConfig opt;
  opt.metric = metric_spec_of(c);
  if (c.max_cycles < 1) throw ConfigError("cycles", "cycles must be >= 1");
  opt.max_cycles = c.max_cycles;
  if (c.min_changed_fraction < 0.0 || c.min_changed_fraction > 1.0)
    throw ConfigError("min-changed-fraction", "must be in [0,1]");
  opt.min_items_changed_fraction = c.min_changed_fraction;
  opt.candidate_top_predicted = c.top_predicted;
  opt.candidate_top_recent = c.top_recent;
  if (!(c.tie_epsilon > 0.0)) throw ConfigError("tie-epsilon", "must be > 0");
  opt.tie_epsilon = c.tie_epsilon;
  opt.prune = !c.no_prune;
  return opt;
}

TimeRange window_of(const RunConfig& c, const TransactionLog& log) {
  TimeRange w;
  w.begin = c.from_date.empty() ? std::numeric_limits<std::int64_t>::min()
                                : parse_date_field("from", c.from_date);
  w.end = c.to_date.empty()
              ? (log.empty() ? 0 : log.records.back().time + 1)
              : parse_date_field("to", c.to_date);
  return w;
}

/// Builds the shared id space of a command from whatever inputs it has.
struct Universe {
  IdMap users;
  IdMap items;
};

void add_scores_ids(Universe& ids, const RawScores& raw) {
  for (const auto& t : raw.triples) {
    if (t.user.empty() || t.item.empty()) throw std::runtime_error("empty id in score file");
    ids.users.add(t.user);
    ids.items.add(t.item);
  }
}

ScoreStore store_from_raw(const RawScores& raw, const Universe& ids, int capacity) {
  std::vector<std::vector<ScoredItem>> rows(ids.users.size());
  for (const auto& t : raw.triples)
    rows[ids.users.index_of(t.user)].push_back({ids.items.index_of(t.item), t.score});
  return build_score_store(ids.users.size(), ids.items.size(), capacity, std::move(rows));
}

BiasVector bias_from_entries(const std::vector<std::pair<std::string, double>>& entries,
                             const IdMap& items, const std::string& what) {
  BiasVector bias(items.size());
  std::vector<std::string> unknown;
  for (const auto& [name, value] : entries) {
    ItemId i = items.index_of(name);
    if (i < 0) {
      unknown.push_back(name);
      continue;
    }
    bias.set(i, value);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown item ids in " + what + ":";
    for (std::size_t j = 0; j < unknown.size() && j < 5; ++j) msg += " " + unknown[j];
    if (unknown.size() > 5) msg += " (+" + std::to_string(unknown.size() - 5) + " more)";
    throw std::runtime_error(msg);
  }
  return bias;
}

void write_kv_report(const std::string& path, const RunConfig& c, const EvalReport& report) {
  std::ofstream out(path);
  out << "# biasrec evaluate\n";
  out << "config_hash\t" << config_hash(c) << '\n';
  out << "seed\t" << c.seed << '\n';
  out << "k\t" << report.k << '\n';
  out << "users_evaluated\t" << report.user_count << '\n';
  out << "ACC@" << report.k << '\t' << format_score(report.acc) << '\n';
  out << "MAP@" << report.k << '\t' << format_score(report.map) << '\n';
  out << "NDCG@" << report.k << '\t' << format_score(report.ndcg) << '\n';
}

struct TaxonomyData {
  IdMap categories;
  std::vector<std::int32_t> item_category;  // parallel to items
};

TaxonomyData taxonomy_for(const RunConfig& c, const IdMap& items) {
  TaxonomyData tax;
  std::vector<std::pair<std::string, std::string>> rows;
  if (!c.taxonomy_path.empty()) rows = read_taxonomy(c.taxonomy_path);
  tax.item_category.assign(items.size(), -1);
  for (const auto& [item, cat] : rows) {
    ItemId i = items.index_of(item);
    if (i < 0) continue;  // taxonomy may cover a wider catalog
    tax.item_category[i] = tax.categories.add(cat);
  }
  std::int32_t other = -1;
  for (auto& cat : tax.item_category) {
    if (cat < 0) {
      if (other < 0) other = tax.categories.add("OTHER");
      cat = other;
    }
  }
  return tax;
}

}  // namespace

int cmd_generate(const RunConfig& config) {
  DriftConfig d = config.drift;
  d.seed = config.seed;
  if (d.n_users <= 0) throw ConfigError("users", "must be positive");
  if (d.m_items <= 0) throw ConfigError("items", "must be positive");
  if (d.n_days <= 0) throw ConfigError("days", "must be positive");
  if (d.churn_rate < 0.0 || d.churn_rate > 1.0) throw ConfigError("churn", "must be in [0,1]");
  if (d.trend_spike < 1.0) throw ConfigError("spike", "must be >= 1");
  if (d.categories <= 0) throw ConfigError("categories", "must be positive");

  DriftResult result = generate_drift(d);
  std::string dir = out_dir_of(config);
  std::string log_path = join(dir, "transactions.tsv");
  std::string tax_path = join(dir, "taxonomy.tsv");
  write_transactions(log_path, result.log);
  std::vector<std::string> item_names, cat_names;
  for (int i = 0; i < d.m_items; ++i) {
    item_names.push_back(drift_item_name(i));
    cat_names.push_back(drift_category_name(result.item_category[i]));
  }
  write_taxonomy(tax_path, item_names, cat_names);
  std::cout << "generated " << result.log.size() << " transactions for " << d.n_users
            << " users, " << d.m_items << " items, " << d.n_days << " days\n"
            << "  " << log_path << "\n  " << tax_path << "\n";
  return 0;
}

int cmd_fit(const RunConfig& config) {
  if (config.log_path.empty()) throw ConfigError("log", "missing transaction file");
  auto base = base_model_from_name(config.model_kind);
  if (!base) throw ConfigError("model", "unknown model: " + config.model_kind);

  ParseResult parsed = parse_transactions(config.log_path, config.strict_parse);
  if (parsed.skipped > 0)
    std::cerr << "warning: skipped " << parsed.skipped << " malformed lines\n";
  Universe ids;
  collect_ids(parsed.log, ids.users, ids.items);
  TimeRange window = window_of(config, parsed.log);

  std::string dir = out_dir_of(config);
  std::string out_path = config.out_file.empty()
                             ? join(dir, "model_" + std::string(base_model_name(*base)) + ".tsv")
                             : config.out_file;

  if (*base == BaseModelKind::Markov) {
    MarkovModel model = fit_markov(parsed.log, window, ids.items);
    write_markov(out_path, model, ids.items);
    std::size_t transitions = 0;
    for (const auto& [j, ctx] : model.first_order()) transitions += ctx.successors.size();
    if (model.empty()) std::cerr << "warning: empty model (no events in window)\n";
    std::cout << "markov model: " << model.first_order().size() << " contexts, " << transitions
              << " transitions, " << model.second_order().size() << " pair contexts -> "
              << out_path << "\n";
  } else if (*base == BaseModelKind::Popularity) {
    PopularityModel model = fit_popularity(parsed.log, window, ids.items);
    write_popularity(out_path, model, ids.items);
    std::cout << "popularity model over " << ids.items.size() << " items -> " << out_path << "\n";
  } else {
    if (config.taxonomy_path.empty()) throw ConfigError("taxonomy", "category model needs --taxonomy");
    TaxonomyData tax = taxonomy_for(config, ids.items);
    TimeRange pop_window{window.end - static_cast<std::int64_t>(config.recent_days) * kSecondsPerDayInt,
                         window.end};
    CategoryModel model = fit_category(parsed.log, ids.users, ids.items, tax.item_category,
                                       tax.categories.size(), window, pop_window);
    write_category(out_path, model, ids.users, ids.items, tax.categories);
    std::cout << "category model: " << tax.categories.size() << " categories, "
              << model.active_items().size() << " active items -> " << out_path << "\n";
  }
  return 0;
}

int cmd_predict(const RunConfig& config) {
  if (config.model_path.empty()) throw ConfigError("model-file", "missing model file");
  if (config.log_path.empty()) throw ConfigError("log", "missing transaction file (context source)");
  std::string kind = model_kind_of(config.model_path);

  ParseResult parsed = parse_transactions(config.log_path, config.strict_parse);
  int n = config.predict_n > 0 ? config.predict_n : config.effective_capacity();

  Universe ids;
  std::string dir = out_dir_of(config);
  std::string out_path = config.out_file.empty() ? join(dir, "scores.tsv") : config.out_file;

  if (kind == "markov") {
    MarkovModel model = read_markov(config.model_path, ids.items);
    collect_ids(parsed.log, ids.users, ids.items);
    auto ctx = recent_context_items(parsed.log, ids.users, ids.items, config.context_items);
    std::vector<std::vector<ScoredItem>> rows(ids.users.size());
    for (UserId u = 0; u < ids.users.size(); ++u) rows[u] = predict_markov(model, ctx[u], n);
    ScoreStore store = build_score_store(ids.users.size(), ids.items.size(), n, std::move(rows));
    write_scores(out_path, store, ids.users, ids.items);
  } else if (kind == "popularity") {
    PopularityModel model = read_popularity(config.model_path, ids.items);
    collect_ids(parsed.log, ids.users, ids.items);
    model.score.resize(ids.items.size(), 0.0);
    auto ctx = recent_context_items(parsed.log, ids.users, ids.items, config.context_items);
    std::vector<std::vector<ScoredItem>> rows(ids.users.size());
    for (UserId u = 0; u < ids.users.size(); ++u) rows[u] = predict_popularity(model, ctx[u], n);
    ScoreStore store = build_score_store(ids.users.size(), ids.items.size(), n, std::move(rows));
    write_scores(out_path, store, ids.users, ids.items);
  } else if (kind == "category") {
    IdMap categories;
    CategoryModel model = read_category(config.model_path, ids.users, ids.items, categories);
    std::int32_t model_users = ids.users.size();
    collect_ids(parsed.log, ids.users, ids.items);
    std::vector<std::vector<ScoredItem>> rows(ids.users.size());
    for (UserId u = 0; u < ids.users.size(); ++u) {
      rows[u] = u < model_users ? predict_category(model, u, n)
                                : predict_category_interest(model, model.fallback_interest(), n);
    }
    ScoreStore store = build_score_store(ids.users.size(), ids.items.size(), n, std::move(rows));
    write_scores(out_path, store, ids.users, ids.items);
  } else {
    throw std::runtime_error("unsupported model kind: " + kind);
  }
  std::cout << "predictions -> " << out_path << "\n";
  return 0;
}

int cmd_learn_bias(const RunConfig& config) {
  if (config.scores_path.empty()) throw ConfigError("scores", "missing score file");
  if (config.log_path.empty()) throw ConfigError("log", "missing recent transaction file");
  OptimizerConfig opt = optimizer_config_of(config);

  RawScores raw = read_scores(config.scores_path);
  ParseResult recent = parse_transactions(config.log_path, config.strict_parse);
  Universe ids;
  add_scores_ids(ids, raw);
  collect_ids(recent.log, ids.users, ids.items);

  if (!config.warm_start_path.empty())
    opt.warm_start_bias = bias_from_entries(read_bias(config.warm_start_path), ids.items, "warm start");

  ScoreStore store = store_from_raw(raw, ids, config.effective_capacity());
  RelevanceSet relevance = relevance_from_log(recent.log, ids.users, ids.items);
  if (relevance.users().empty())
    throw std::runtime_error("no users with relevant items in the recent window");

  LearnResult result = learn_biases(store, relevance, opt);

  std::string dir = out_dir_of(config);
  std::string bias_path = config.out_file.empty() ? join(dir, "bias.tsv") : config.out_file;
  write_bias(bias_path, result.bias, ids.items);

  std::string log_path = join(dir, "learn_log.tsv");
  {
    std::ofstream out(log_path);
    out << "# biasrec learn-bias\n";
    out << "# config_hash=" << config_hash(config) << " seed=" << config.seed << '\n';
    out << "# metric=" << metric_name(opt.metric.kind) << " k=" << opt.metric.k << " path="
        << (opt.metric.kind == MetricKind::Acc ? "acc" : "rank")
        << " prune=" << (opt.prune ? "yes" : "no")
        << " warm_start=" << (opt.warm_start_bias ? "yes" : "no") << '\n';
    out << "# initial_objective=" << format_score(result.initial_objective) << '\n';
    out << "cycle\titems_changed\tcycle_gain\tobjective\n";
    for (const auto& cyc : result.cycle_log)
      out << cyc.cycle << '\t' << cyc.items_changed << '\t' << format_score(cyc.total_gain) << '\t'
          << format_score(cyc.objective) << '\n';
  }

  std::cout << "learned biases for " << ids.items.size() << " items ("
            << result.candidate_items.size() << " candidates, " << result.pruned_items.size()
            << " pruned, " << result.accepted_updates << " updates, " << result.cycles
            << " cycles)\n"
            << "objective " << format_score(result.initial_objective) << " -> "
            << format_score(result.final_objective) << "\n"
            << "  " << bias_path << "\n  " << log_path << "\n";
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& config) {
  if (config.scores_path.empty()) throw ConfigError("scores", "missing score file");
  if (config.log_path.empty()) throw ConfigError("log", "missing test transaction file");
  if (config.k < 1) throw ConfigError("k", "k must be >= 1");

  RawScores raw = read_scores(config.scores_path);
  ParseResult test = parse_transactions(config.log_path, config.strict_parse);
  Universe ids;
  add_scores_ids(ids, raw);
  collect_ids(test.log, ids.users, ids.items);

  BiasVector bias(ids.items.size());
  if (!config.bias_path.empty())
    bias = bias_from_entries(read_bias(config.bias_path), ids.items, "bias file");

  ScoreStore store = store_from_raw(raw, ids, config.effective_capacity());
  RelevanceSet relevance = relevance_from_log(test.log, ids.users, ids.items);
  if (relevance.users().empty()) throw std::runtime_error("no users with relevant items in the test window");

  TopKState state(store, bias, config.k);
  EvalReport report = evaluate_topk_lists([&](UserId u) { return state.topk_items(u); },
                                          relevance, config.k);

  std::string dir = out_dir_of(config);
  write_kv_report(join(dir, "eval.tsv"), config, report);
  json j{{"config_hash", config_hash(config)},
         {"seed", config.seed},
         {"k", report.k},
         {"users_evaluated", report.user_count},
         {"acc", report.acc},
         {"map", report.map},
         {"ndcg", report.ndcg}};
  std::ofstream(join(dir, "eval.json")) << j.dump(2) << '\n';

  std::cout << "users=" << report.user_count << " ACC@" << report.k << "=" << format_score(report.acc)
            << " MAP@" << report.k << "=" << format_score(report.map) << " NDCG@" << report.k
            << "=" << format_score(report.ndcg) << "\n";
  return 0;
}

int cmd_compare(const RunConfig& config) {
  if (config.log_path.empty()) throw ConfigError("log", "missing transaction file");
  if (config.recent_days < 1) throw ConfigError("recent-days", "must be >= 1");
  if (config.test_days < 1) throw ConfigError("test-days", "must be >= 1");
  std::int64_t split_ts = parse_date_field("split-date", config.split_date);
  auto base = base_model_from_name(config.model_kind);
  if (!base) throw ConfigError("model", "unknown base model: " + config.model_kind);
  OptimizerConfig opt = optimizer_config_of(config);

  std::vector<StrategyKind> kinds;
  if (config.strategies.empty()) {
    kinds = {StrategyKind::Long, StrategyKind::Bias, StrategyKind::Truncate,
             StrategyKind::DistrDiff, StrategyKind::Decay};
  } else {
    for (const auto& name : config.strategies) {
      auto kind = strategy_from_name(name);
      if (!kind) throw ConfigError("strategies", "unknown strategy: " + name);
      kinds.push_back(*kind);
    }
  }
  if (*base == BaseModelKind::Category && config.taxonomy_path.empty())
    throw ConfigError("taxonomy", "category base requires --taxonomy");

  ParseResult parsed = parse_transactions(config.log_path, config.strict_parse);
  if (parsed.skipped > 0)
    std::cerr << "warning: skipped " << parsed.skipped << " malformed lines\n";

  Universe ids;
  collect_ids(parsed.log, ids.users, ids.items);
  TemporalSplit split = temporal_split(parsed.log, split_ts, config.recent_days, config.test_days);

  TransactionLog pre_test;
  pre_test.records = split.train.records;
  pre_test.records.insert(pre_test.records.end(), split.recent.records.begin(),
                          split.recent.records.end());
  auto context = recent_context_items(pre_test, ids.users, ids.items, config.context_items);

  TaxonomyData tax = taxonomy_for(config, ids.items);

  StrategyContext ctx;
  ctx.train = &split.train;
  ctx.recent = &split.recent;
  ctx.train_range = split.train_range;
  ctx.recent_range = split.recent_range;
  ctx.now = split_ts;
  ctx.users = &ids.users;
  ctx.items = &ids.items;
  ctx.context_items = &context;
  ctx.item_category = &tax.item_category;
  ctx.num_categories = tax.categories.size();
  ctx.k = config.k;
  ctx.capacity = config.effective_capacity();
  ctx.optimizer = opt;

  RelevanceSet relevance = relevance_from_log(split.test, ids.users, ids.items);
  if (relevance.users().empty()) throw std::runtime_error("no users with relevant items in the test window");

  std::vector<double> test_counts(ids.items.size(), 0.0);
  for (const auto& r : split.test.records) {
    ItemId i = ids.items.index_of(r.item);
    if (i >= 0) test_counts[i] += 1.0;
  }

  struct Row {
    StrategyKind kind;
    EvalReport report;
    double kl = 0.0;
    std::vector<OverlapRow> overlap;
    std::optional<LearnResult> learn;
  };
  std::vector<Row> rows;
  std::string dir = out_dir_of(config);

  for (StrategyKind kind : kinds) {
    StrategySpec spec{kind, *base, config.beta};
    StrategyOutput out = run_strategy(spec, ctx);
    TopKState state(out.scores, out.bias, config.k);

    Row row;
    row.kind = kind;
    row.report = evaluate_topk_lists([&](UserId u) { return state.topk_items(u); }, relevance,
                                     config.k);
    std::vector<double> pred_counts(ids.items.size(), 0.0);
    for (UserId u : relevance.users())
      for (ItemId i : state.topk_items(u)) pred_counts[i] += 1.0;
    row.kl = kl_divergence_smoothed(test_counts, pred_counts);
    row.overlap = top_popular_overlap(test_counts, pred_counts, config.overlap_levels);
    row.learn = std::move(out.learn);

    std::string name = strategy_name(kind);
    write_scores(join(dir, name + ".scores.tsv"), out.scores, ids.users, ids.items);
    if (kind == StrategyKind::Bias || kind == StrategyKind::Truncate ||
        kind == StrategyKind::DistrDiff)
      write_bias(join(dir, name + ".bias.tsv"), out.bias, ids.items);
    if (row.learn) {
      std::ofstream lf(join(dir, name + ".learn.tsv"));
      lf << "cycle\titems_changed\tcycle_gain\tobjective\n";
      for (const auto& cyc : row.learn->cycle_log)
        lf << cyc.cycle << '\t' << cyc.items_changed << '\t' << format_score(cyc.total_gain)
           << '\t' << format_score(cyc.objective) << '\n';
    }
    rows.push_back(std::move(row));
  }

  const Row* baseline = nullptr;
  for (const auto& r : rows)
    if (r.kind == StrategyKind::Long) baseline = &r;

  auto lift_of = [&](const Row& r, MetricKind m) -> std::optional<double> {
    if (!baseline) return std::nullopt;
    return lift_percent(r.report.value(m), baseline->report.value(m));
  };
  auto lift_str = [](const std::optional<double>& l) {
    return l ? format_score(*l) : std::string("-");
  };

  // plot-ready TSV
  {
    std::ofstream out(join(dir, "plot.tsv"));
    out << "metric\tstrategy\tvalue\tlift\n";
    for (MetricKind m : {MetricKind::Acc, MetricKind::Map, MetricKind::Ndcg}) {
      for (const auto& r : rows)
        out << metric_name(m) << '@' << config.k << '\t' << strategy_name(r.kind) << '\t'
            << format_score(r.report.value(m)) << '\t' << lift_str(lift_of(r, m)) << '\n';
    }
  }

  // human-readable report (file + stdout)
  std::ostringstream rep;
  rep << "# biasrec compare  config=" << config_hash(config) << " seed=" << config.seed << "\n";
  rep << "# split=" << config.split_date << " recent_days=" << config.recent_days
      << " test_days=" << config.test_days << " k=" << config.k << " base="
      << base_model_name(*base) << " users_evaluated=" << relevance.users().size() << "\n";
  rep << "strategy\tACC@" << config.k << "\tlift%\tMAP@" << config.k << "\tlift%\tNDCG@"
      << config.k << "\tlift%\tKL\n";
  for (const auto& r : rows) {
    rep << strategy_name(r.kind);
    for (MetricKind m : {MetricKind::Acc, MetricKind::Map, MetricKind::Ndcg})
      rep << '\t' << format_score(r.report.value(m)) << '\t' << lift_str(lift_of(r, m));
    rep << '\t' << format_score(r.kl) << "\n";
  }
  rep << "# top-popular overlap (level, then one column per strategy)\n";
  rep << "level";
  for (const auto& r : rows) rep << '\t' << strategy_name(r.kind);
  rep << "\n";
  for (std::size_t li = 0; li < config.overlap_levels.size(); ++li) {
    rep << config.overlap_levels[li];
    for (const auto& r : rows) rep << '\t' << r.overlap[li].overlap;
    rep << "\n";
    if (!rows.empty() && rows[0].overlap[li].effective_level != config.overlap_levels[li]) {
      rep << "# level " << config.overlap_levels[li] << " clamped to "
          << rows[0].overlap[li].effective_level << " (universe size)\n";
    }
  }
  std::ofstream(join(dir, "report.txt")) << rep.str();
  std::cout << rep.str();

  // machine-readable report
  json j;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["k"] = config.k;
  j["base_model"] = base_model_name(*base);
  j["split_date"] = config.split_date;
  j["recent_days"] = config.recent_days;
  j["test_days"] = config.test_days;
  j["users_evaluated"] = relevance.users().size();
  j["strategies"] = json::array();
  for (const auto& r : rows) {
    json jr;
    jr["name"] = strategy_name(r.kind);
    jr["acc"] = r.report.acc;
    jr["map"] = r.report.map;
    jr["ndcg"] = r.report.ndcg;
    for (MetricKind m : {MetricKind::Acc, MetricKind::Map, MetricKind::Ndcg}) {
      auto l = lift_of(r, m);
      std::string key = std::string("lift_") + metric_name(m);
      if (l)
        jr[key] = *l;
      else
        jr[key] = nullptr;
    }
    jr["kl_divergence"] = r.kl;
    json jo = json::array();
    for (const auto& o : r.overlap)
      jo.push_back({{"level", o.level}, {"effective_level", o.effective_level}, {"overlap", o.overlap}});
    jr["top_popular_overlap"] = jo;
    if (r.learn) {
      jr["learn"] = {{"cycles", r.learn->cycles},
                     {"accepted_updates", r.learn->accepted_updates},
                     {"initial_objective", r.learn->initial_objective},
                     {"final_objective", r.learn->final_objective},
                     {"pruned_items", r.learn->pruned_items.size()},
                     {"candidate_items", r.learn->candidate_items.size()},
                     {"warnings", r.learn->warnings}};
    }
    j["strategies"].push_back(jr);
  }
  std::ofstream(join(dir, "report.json")) << j.dump(2) << '\n';
  return 0;
}

}  // namespace biasrec
