#include "biasrec/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "biasrec/data.hpp"

namespace biasrec {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed " + what + " value: " + s);
  }
}

}  // namespace

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_transactions(const std::string& path, const TransactionLog& log) {
  auto out = open_out(path);
  for (const auto& r : log.records)
    out << r.user << '\t' << r.item << '\t' << format_timestamp(r.time) << '\n';
}

std::vector<std::pair<std::string, std::string>> read_taxonomy(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tabs(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty())
      throw std::runtime_error("malformed taxonomy line: " + line);
    out.emplace_back(f[0], f[1]);
  }
  return out;
}

void write_taxonomy(const std::string& path, const std::vector<std::string>& item_names,
                    const std::vector<std::string>& category_names) {
  if (item_names.size() != category_names.size())
    throw std::invalid_argument("write_taxonomy: size mismatch");
  auto out = open_out(path);
  for (std::size_t i = 0; i < item_names.size(); ++i)
    out << item_names[i] << '\t' << category_names[i] << '\n';
}

RawScores read_scores(const std::string& path) {
  auto in = open_in(path);
  RawScores out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tabs(line);
    if (f.size() != 3 || f[0].empty() || f[1].empty())
      throw std::runtime_error("malformed score line: " + line);
    out.triples.push_back({f[0], f[1], parse_double(f[2], "score")});
  }
  return out;
}

void write_scores(const std::string& path, const ScoreStore& store, const IdMap& users,
                  const IdMap& items) {
  auto out = open_out(path);
  for (UserId u = 0; u < store.num_users(); ++u) {
    for (const auto& e : store.row(u))
      out << users.name_of(u) << '\t' << items.name_of(e.item) << '\t' << format_score(e.score)
          << '\n';
  }
}

std::vector<std::pair<std::string, double>> read_bias(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::string, double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tabs(line);
    if (f.size() != 2 || f[0].empty()) throw std::runtime_error("malformed bias line: " + line);
    double v = f[1] == "-inf" ? kNegInf : parse_double(f[1], "bias");
    out.emplace_back(f[0], v);
  }
  return out;
}

void write_bias(const std::string& path, const BiasVector& bias, const IdMap& items) {
  if (bias.size() != items.size()) throw std::invalid_argument("write_bias: size mismatch");
  auto out = open_out(path);
  for (ItemId i = 0; i < bias.size(); ++i) {
    out << items.name_of(i) << '\t';
    if (bias.excluded(i))
      out << "-inf";
    else
      out << format_double(bias[i]);
    out << '\n';
  }
}

void write_markov(const std::string& path, const MarkovModel& model, const IdMap& items) {
  auto out = open_out(path);
  out << "#biasrec-model\tmarkov\t1\n";
  for (const auto& [j, ctx] : model.first_order()) {
    out << "U\t" << items.name_of(j) << '\t' << ctx.total.count << '\t'
        << format_double(ctx.total.weight) << '\n';
    for (const auto& [i, cell] : ctx.successors)
      out << "T\t" << items.name_of(j) << '\t' << items.name_of(i) << '\t' << cell.count << '\t'
          << format_double(cell.weight) << '\n';
  }
  for (const auto& [key, ctx] : model.second_order()) {
    ItemId a = static_cast<ItemId>(key >> 32);
    ItemId b = static_cast<ItemId>(key & 0xffffffffu);
    out << "P\t" << items.name_of(a) << '\t' << items.name_of(b) << '\t' << ctx.total.count << '\t'
        << format_double(ctx.total.weight) << '\n';
    for (const auto& [i, cell] : ctx.successors)
      out << "S\t" << items.name_of(a) << '\t' << items.name_of(b) << '\t' << items.name_of(i)
          << '\t' << cell.count << '\t' << format_double(cell.weight) << '\n';
  }
}

MarkovModel read_markov(const std::string& path, IdMap& items) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_tabs(line) != std::vector<std::string>{"#biasrec-model", "markov", "1"})
    throw std::runtime_error("not a markov model file: " + path);
  MarkovModel model;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tabs(line);
    auto cell_of = [&](const std::string& count, const std::string& weight) {
      MarkovModel::Cell c;
      c.count = static_cast<std::int64_t>(parse_double(count, "count"));
      c.weight = parse_double(weight, "weight");
      return c;
    };
    if (f[0] == "U" && f.size() == 4) {
      model.first_context(items.add(f[1])).total = cell_of(f[2], f[3]);
    } else if (f[0] == "T" && f.size() == 5) {
      model.first_context(items.add(f[1])).successors[items.add(f[2])] = cell_of(f[3], f[4]);
    } else if (f[0] == "P" && f.size() == 5) {
      model.second_context(items.add(f[1]), items.add(f[2])).total = cell_of(f[3], f[4]);
    } else if (f[0] == "S" && f.size() == 6) {
      model.second_context(items.add(f[1]), items.add(f[2])).successors[items.add(f[3])] =
          cell_of(f[4], f[5]);
    } else {
      throw std::runtime_error("malformed model line: " + line);
    }
  }
  return model;
}

void write_popularity(const std::string& path, const PopularityModel& model, const IdMap& items) {
  if (static_cast<std::int32_t>(model.score.size()) != items.size())
    throw std::invalid_argument("write_popularity: size mismatch");
  auto out = open_out(path);
  out << "#biasrec-model\tpopularity\t1\n";
  for (ItemId i = 0; i < items.size(); ++i)
    out << "I\t" << items.name_of(i) << '\t' << format_double(model.score[i]) << '\n';
}

PopularityModel read_popularity(const std::string& path, IdMap& items) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      split_tabs(line) != std::vector<std::string>{"#biasrec-model", "popularity", "1"})
    throw std::runtime_error("not a popularity model file: " + path);
  std::vector<std::pair<ItemId, double>> entries;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tabs(line);
    if (f.size() != 3 || f[0] != "I") throw std::runtime_error("malformed model line: " + line);
    entries.emplace_back(items.add(f[1]), parse_double(f[2], "score"));
  }
  PopularityModel model;
  model.score.assign(items.size(), 0.0);
  for (const auto& [i, s] : entries) model.score[i] = s;
  return model;
}

void write_category(const std::string& path, const CategoryModel& model, const IdMap& users,
                    const IdMap& items, const IdMap& categories) {
  auto out = open_out(path);
  out << "#biasrec-model\tcategory\t1\n";
  for (ItemId i = 0; i < items.size(); ++i) {
    out << "C\t" << items.name_of(i) << '\t' << categories.name_of(model.category_of(i)) << '\t'
        << format_double(model.item_popularity(i)) << '\n';
  }
  for (UserId u = 0; u < users.size(); ++u) {
    if (!model.has_history(u)) continue;
    const auto& interest = model.interest_of(u);
    for (std::int32_t c = 0; c < model.num_categories(); ++c) {
      if (interest[c] > 0.0)
        out << "W\t" << users.name_of(u) << '\t' << categories.name_of(c) << '\t'
            << format_double(interest[c]) << '\n';
    }
  }
}

CategoryModel read_category(const std::string& path, IdMap& users, IdMap& items,
                            IdMap& categories) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      split_tabs(line) != std::vector<std::string>{"#biasrec-model", "category", "1"})
    throw std::runtime_error("not a category model file: " + path);
  struct ItemRow {
    ItemId item;
    std::int32_t cat;
    double pop;
  };
  std::vector<ItemRow> item_rows;
  std::vector<std::tuple<UserId, std::int32_t, double>> interest_rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tabs(line);
    if (f[0] == "C" && f.size() == 4) {
      item_rows.push_back({items.add(f[1]), categories.add(f[2]), parse_double(f[3], "pop")});
    } else if (f[0] == "W" && f.size() == 4) {
      interest_rows.emplace_back(users.add(f[1]), categories.add(f[2]), parse_double(f[3], "interest"));
    } else {
      throw std::runtime_error("malformed model line: " + line);
    }
  }
  std::vector<std::int32_t> item_category(items.size(), 0);
  for (const auto& r : item_rows) item_category[r.item] = r.cat;
  CategoryModel model(users.size(), categories.size(), std::move(item_category));
  for (const auto& r : item_rows) model.mutable_item_pop()[r.item] = r.pop;
  for (const auto& [u, c, p] : interest_rows) {
    auto& v = model.mutable_interest()[u];
    if (v.empty()) v.assign(categories.size(), 0.0);
    v[c] = p;
  }
  model.finalize();
  return model;
}

std::string model_kind_of(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty model file: " + path);
  auto f = split_tabs(line);
  if (f.size() != 3 || f[0] != "#biasrec-model")
    throw std::runtime_error("not a model file: " + path);
  return f[1];
}

}  // namespace biasrec
