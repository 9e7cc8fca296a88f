#pragma once

#include <string>
#include <utility>
#include <vector>

#include "biasrec/core.hpp"
#include "biasrec/models.hpp"

namespace biasrec {

void write_transactions(const std::string& path, const TransactionLog& log);

/// Taxonomy lines: item_id<TAB>category_id.
std::vector<std::pair<std::string, std::string>> read_taxonomy(const std::string& path);
void write_taxonomy(const std::string& path, const std::vector<std::string>& item_names,
                    const std::vector<std::string>& category_names);

/// Score triples: user<TAB>item<TAB>score, scores with 9 significant digits.
struct RawScores {
  struct Triple {
    std::string user;
    std::string item;
    double score;
  };
  std::vector<Triple> triples;
};

RawScores read_scores(const std::string& path);
void write_scores(const std::string& path, const ScoreStore& store, const IdMap& users,
                  const IdMap& items);

/// Bias lines: item_id<TAB>bias; the exclusion sentinel serializes as "-inf".
std::vector<std::pair<std::string, double>> read_bias(const std::string& path);
void write_bias(const std::string& path, const BiasVector& bias, const IdMap& items);

/// Versioned delimited model dumps (context, successor, count, weight).
void write_markov(const std::string& path, const MarkovModel& model, const IdMap& items);
MarkovModel read_markov(const std::string& path, IdMap& items);

void write_popularity(const std::string& path, const PopularityModel& model, const IdMap& items);
PopularityModel read_popularity(const std::string& path, IdMap& items);

void write_category(const std::string& path, const CategoryModel& model, const IdMap& users,
                    const IdMap& items, const IdMap& categories);
CategoryModel read_category(const std::string& path, IdMap& users, IdMap& items,
                            IdMap& categories);

/// Peeks the model kind recorded in a dump's header line.
std::string model_kind_of(const std::string& path);

std::string format_score(double v);   // %.9g
std::string format_double(double v);  // %.17g, round-trip exact

}  // namespace biasrec
