#include "biasrec/strategies.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "biasrec/data.hpp"

namespace biasrec {

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Long: return "long";
    case StrategyKind::Bias: return "bias";
    case StrategyKind::Truncate: return "truncate";
    case StrategyKind::DistrDiff: return "distrdiff";
    case StrategyKind::Decay: return "decay";
  }
  return "?";
}

std::optional<StrategyKind> strategy_from_name(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "long") return StrategyKind::Long;
  if (s == "bias") return StrategyKind::Bias;
  if (s == "truncate") return StrategyKind::Truncate;
  if (s == "distrdiff") return StrategyKind::DistrDiff;
  if (s == "decay") return StrategyKind::Decay;
  return std::nullopt;
}

const char* base_model_name(BaseModelKind kind) {
  switch (kind) {
    case BaseModelKind::Markov: return "markov";
    case BaseModelKind::Category: return "category";
    case BaseModelKind::Popularity: return "popularity";
  }
  return "?";
}

std::optional<BaseModelKind> base_model_from_name(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "markov") return BaseModelKind::Markov;
  if (s == "category" || s == "cbr") return BaseModelKind::Category;
  if (s == "popularity") return BaseModelKind::Popularity;
  return std::nullopt;
}

namespace {

void check_context(const StrategyContext& ctx) {
  if (!ctx.train || !ctx.recent || !ctx.users || !ctx.items || !ctx.context_items)
    throw std::invalid_argument("run_strategy: incomplete context");
  if (ctx.k < 1) throw std::invalid_argument("run_strategy: k must be >= 1");
  if (ctx.capacity < ctx.k) throw std::invalid_argument("run_strategy: capacity below k");
  if (static_cast<std::int32_t>(ctx.context_items->size()) != ctx.users->size())
    throw std::invalid_argument("run_strategy: context_items size mismatch");
}

/// Base predictions for every user; users whose base model predicts nothing
/// fall back to window popularity.
ScoreStore base_predictions(const StrategySpec& spec, const StrategyContext& ctx,
                            const RecencyWeightFn& weight) {
  std::int32_t n = ctx.users->size();
  std::vector<std::vector<ScoredItem>> rows(n);

  MarkovFitOptions mopts;
  mopts.decay_anchor = ctx.now;
  PopularityModel popularity =
      fit_popularity(*ctx.train, ctx.train_range, *ctx.items, weight, ctx.now);

  if (spec.base == BaseModelKind::Markov) {
    MarkovModel model = fit_markov(*ctx.train, ctx.train_range, *ctx.items, weight, mopts);
    for (UserId u = 0; u < n; ++u) {
      rows[u] = predict_markov(model, (*ctx.context_items)[u], ctx.capacity);
      if (rows[u].empty()) rows[u] = predict_popularity(popularity, (*ctx.context_items)[u], ctx.capacity);
    }
  } else if (spec.base == BaseModelKind::Category) {
    if (!ctx.item_category || ctx.num_categories <= 0)
      throw std::invalid_argument("run_strategy: category base requires a taxonomy");
    CategoryModel model =
        fit_category(*ctx.train, *ctx.users, *ctx.items, *ctx.item_category, ctx.num_categories,
                     ctx.train_range, ctx.recent_range, weight, ctx.now);
    for (UserId u = 0; u < n; ++u) {
      rows[u] = predict_category(model, u, ctx.capacity);
      if (rows[u].empty()) rows[u] = predict_popularity(popularity, (*ctx.context_items)[u], ctx.capacity);
    }
  } else {
    for (UserId u = 0; u < n; ++u)
      rows[u] = predict_popularity(popularity, (*ctx.context_items)[u], ctx.capacity);
  }
  return build_score_store(n, ctx.items->size(), ctx.capacity, std::move(rows));
}

std::vector<double> item_distribution(const TransactionLog& log, const IdMap& items) {
  std::vector<double> d(items.size(), 0.0);
  double total = 0.0;
  for (const auto& r : log.records) {
    ItemId i = items.index_of(r.item);
    if (i < 0) continue;
    d[i] += 1.0;
    total += 1.0;
  }
  if (total > 0.0)
    for (double& v : d) v /= total;
  return d;
}

}  // namespace

StrategyOutput run_strategy(const StrategySpec& spec, const StrategyContext& ctx) {
  check_context(ctx);
  bool needs_recent = spec.kind == StrategyKind::Bias || spec.kind == StrategyKind::Truncate ||
                      spec.kind == StrategyKind::DistrDiff;
  if (needs_recent && ctx.recent->empty())
    throw std::runtime_error("run_strategy: the recent window is empty");

  RecencyWeightFn weight;
  if (spec.kind == StrategyKind::Decay) {
    double beta = spec.beta;
    weight = [beta](double days) { return decay_weight(days, beta); };
  }

  ScoreStore scores = base_predictions(spec, ctx, weight);
  BiasVector bias(ctx.items->size());
  StrategyOutput out{std::move(scores), std::move(bias), std::nullopt};

  switch (spec.kind) {
    case StrategyKind::Long:
    case StrategyKind::Decay:
      break;

    case StrategyKind::Bias: {
      RelevanceSet relevance = relevance_from_log(*ctx.recent, *ctx.users, *ctx.items);
      OptimizerConfig opt = ctx.optimizer;
      opt.metric.k = ctx.k;
      out.learn = learn_biases(out.scores, relevance, opt);
      out.bias = out.learn->bias;
      break;
    }

    case StrategyKind::Truncate: {
      std::vector<char> seen(ctx.items->size(), 0);
      for (const auto& r : ctx.recent->records) {
        ItemId i = ctx.items->index_of(r.item);
        if (i >= 0) seen[i] = 1;
      }
      for (ItemId i = 0; i < ctx.items->size(); ++i)
        if (!seen[i]) out.bias.set(i, kNegInf);
      break;
    }

    case StrategyKind::DistrDiff: {
      // per-user normalized probabilistic output
      std::vector<std::vector<ScoredItem>> rows(ctx.users->size());
      for (UserId u = 0; u < ctx.users->size(); ++u) {
        rows[u] = out.scores.row(u);
        double total = 0.0;
        for (const auto& e : rows[u]) total += e.score;
        if (total > 0.0)
          for (auto& e : rows[u]) e.score /= total;
      }
      out.scores = build_score_store(ctx.users->size(), ctx.items->size(),
                                     out.scores.capacity(), std::move(rows));
      auto d_short = item_distribution(*ctx.recent, *ctx.items);
      auto d_long = item_distribution(*ctx.train, *ctx.items);
      for (ItemId i = 0; i < ctx.items->size(); ++i) out.bias.set(i, d_short[i] - d_long[i]);
      break;
    }
  }
  return out;
}

}  // namespace biasrec
