#include "relnet/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relnet/error.hpp"

namespace relnet {

using nlohmann::json;

EntityPair EntityPair::make(std::string a, std::string b) {
  if (a == b) throw InputError("entity pair needs two distinct entities, got '" + a + "' twice");
  if (b < a) std::swap(a, b);
  return EntityPair{std::move(a), std::move(b)};
}

EntityPair EntityPair::parse(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
    throw InputError("pair must look like 'A,B': '" + std::string(text) + "'");
  }
  std::string a(text.substr(0, comma));
  std::string b(text.substr(comma + 1));
  if (a.empty() || b.empty()) throw InputError("empty entity in pair '" + std::string(text) + "'");
  return make(std::move(a), std::move(b));
}

std::vector<EntityPair> Corpus::pairs() const {
  std::set<EntityPair> seen;
  for (const auto& a : articles) seen.insert(a.pair);
  return {seen.begin(), seen.end()};
}

std::vector<std::string> Corpus::entities() const {
  std::set<std::string> seen;
  for (const auto& a : articles) {
    seen.insert(a.pair.first);
    seen.insert(a.pair.second);
  }
  return {seen.begin(), seen.end()};
}

std::vector<std::size_t> Corpus::indices_of(const EntityPair& pair) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (articles[i].pair == pair) out.push_back(i);
  }
  return out;
}

std::optional<int> Corpus::month_index(std::string_view label) const {
  for (std::size_t t = 0; t < months.size(); ++t) {
    if (months[t] == label) return static_cast<int>(t);
  }
  return std::nullopt;
}

void normalize(Corpus& corpus) {
  for (const auto& a : corpus.articles) {
    if (a.month_index < 0 || static_cast<std::size_t>(a.month_index) >= corpus.months.size()) {
      throw InputError("article '" + a.article_id + "' has month index " +
                       std::to_string(a.month_index) + " outside [0, " +
                       std::to_string(corpus.months.size()) + ")");
    }
  }
  std::stable_sort(corpus.articles.begin(), corpus.articles.end(),
                   [](const AnnotatedArticle& x, const AnnotatedArticle& y) {
                     return std::tie(x.pair, x.month_index, x.article_id) <
                            std::tie(y.pair, y.month_index, y.article_id);
                   });
}

namespace {

json to_json(const AnnotatedArticle& a) {
  json j;
  j["article_id"] = a.article_id;
  j["pair"] = json::array({a.pair.first, a.pair.second});
  j["month"] = a.month;
  j["month_index"] = a.month_index;
  j["predicates"] = a.predicates;
  j["nouns"] = a.nouns;
  j["country"] = a.country ? json(*a.country) : json(nullptr);
  j["n_tokens"] = a.n_tokens;
  return j;
}

AnnotatedArticle from_json(const json& j) {
  AnnotatedArticle a;
  a.article_id = j.at("article_id").get<std::string>();
  const auto& p = j.at("pair");
  if (!p.is_array() || p.size() != 2) throw InputError("'pair' must be a 2-element array");
  a.pair = EntityPair::make(p[0].get<std::string>(), p[1].get<std::string>());
  if (a.pair.first != p[0].get<std::string>()) {
    throw InputError("pair of article '" + a.article_id + "' is not in canonical order");
  }
  a.month = j.at("month").get<std::string>();
  a.month_index = j.at("month_index").get<int>();
  a.predicates = j.at("predicates").get<std::vector<std::string>>();
  a.nouns = j.at("nouns").get<std::vector<std::string>>();
  if (j.contains("country") && !j["country"].is_null()) a.country = j["country"].get<std::string>();
  a.n_tokens = j.value("n_tokens", std::size_t{0});
  if (a.predicates.empty()) throw InputError("article '" + a.article_id + "' has no predicates");
  return a;
}

}  // namespace

void write_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& a : corpus.articles) out << to_json(a).dump() << '\n';
}

void write_jsonl_file(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write corpus to '" + path + "'");
  write_jsonl(out, corpus);
}

Corpus read_jsonl(std::istream& in) {
  Corpus corpus;
  std::map<int, std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    AnnotatedArticle a;
    try {
      a = from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw InputError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (a.month_index < 0) {
      throw InputError("corpus line " + std::to_string(line_no) + ": negative month_index");
    }
    auto [it, inserted] = labels.emplace(a.month_index, a.month);
    if (!inserted && it->second != a.month) {
      throw InputError("corpus line " + std::to_string(line_no) + ": month index " +
                       std::to_string(a.month_index) + " labelled both '" + it->second +
                       "' and '" + a.month + "'");
    }
    corpus.articles.push_back(std::move(a));
  }
  if (!labels.empty()) {
    corpus.months.resize(static_cast<std::size_t>(labels.rbegin()->first) + 1);
    for (const auto& [t, label] : labels) corpus.months[static_cast<std::size_t>(t)] = label;
  }
  return corpus;
}

Corpus read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus '" + path + "'");
  return read_jsonl(in);
}

}  // namespace relnet
