#include "relnet/annotate.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "relnet/error.hpp"

namespace relnet {
namespace {

std::vector<std::string> split_spaces(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Two non-empty tab-separated fields per line; blank and '#' lines skipped.
template <typename Fn>
void read_two_column_tsv(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos || tab == 0 ||
        tab + 1 == line.size()) {
      throw InputError(std::string(what) + " line " + std::to_string(line_no) +
                       ": expected exactly two tab-separated fields");
    }
    fn(line.substr(0, tab), line.substr(tab + 1));
  }
}

const std::set<std::string>& subject_labels() {
  static const std::set<std::string> s{"nsubj", "nsubjpass", "nsubj:pass"};
  return s;
}

const std::set<std::string>& object_labels() {
  static const std::set<std::string> s{"dobj", "obj", "attr", "dative", "iobj"};
  return s;
}

bool is_negation(const Token& t) {
  if (t.deprel == "neg") return true;
  if (t.deprel != "advmod") return false;
  std::string l = t.lemma;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  return l == "not" || l == "n't" || l == "never";
}

}  // namespace

void AliasMap::add(const std::string& entity, const std::string& alias) {
  auto tokens = split_spaces(alias);
  if (entity.empty() || tokens.empty()) throw ConfigError("empty entity or alias");
  auto [it, inserted] = patterns_.emplace(tokens, entity);
  if (!inserted) {
    if (it->second != entity) {
      throw ConfigError("alias '" + alias + "' maps to both '" + it->second + "' and '" +
                        entity + "'");
    }
    return;
  }
  entries_[entity].push_back(alias);
}

std::vector<std::string> AliasMap::entity_ids() const {
  std::vector<std::string> ids;
  for (const auto& [e, _] : entries_) ids.push_back(e);
  return ids;
}

AliasMap AliasMap::read_tsv(std::istream& in) {
  AliasMap m;
  read_two_column_tsv(in, "alias file", [&](std::string e, std::string a) { m.add(e, a); });
  return m;
}

AliasMap AliasMap::read_tsv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open alias file '" + path + "'");
  return read_tsv(in);
}

const std::string* AntonymLexicon::find(const std::string& lemma) const {
  auto it = map_.find(lemma);
  return it == map_.end() ? nullptr : &it->second;
}

AntonymLexicon AntonymLexicon::read_tsv(std::istream& in) {
  AntonymLexicon lex;
  read_two_column_tsv(in, "antonym file", [&](std::string l, std::string a) { lex.add(l, a); });
  return lex;
}

AntonymLexicon AntonymLexicon::read_tsv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open antonym file '" + path + "'");
  return read_tsv(in);
}

std::set<std::string> detect_entities(const ParsedSentence& sentence, const AliasMap& aliases) {
  std::set<std::string> found;
  const auto& toks = sentence.tokens;
  for (const auto& [pattern, entity] : aliases.patterns_) {
    if (found.count(entity) || pattern.size() > toks.size()) continue;
    for (std::size_t i = 0; i + pattern.size() <= toks.size(); ++i) {
      bool match = true;
      for (std::size_t j = 0; j < pattern.size() && match; ++j) {
        match = toks[i + j].surface == pattern[j];
      }
      if (match) {
        found.insert(entity);
        break;
      }
    }
  }
  return found;
}

std::vector<std::string> extract_predicates(const ParsedSentence& sentence,
                                            const AntonymLexicon& antonyms) {
  validate_heads(sentence);
  const auto& toks = sentence.tokens;
  const std::size_t n = toks.size();
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (toks[i].head > 0) children[static_cast<std::size_t>(toks[i].head - 1)].push_back(i);
  }

  std::vector<std::string> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (toks[v].upos != "VERB") continue;
    bool has_subject = false;
    bool has_object = false;
    bool negated = false;
    for (std::size_t c : children[v]) {
      const auto& dep = toks[c].deprel;
      if (subject_labels().count(dep)) has_subject = true;
      if (object_labels().count(dep)) has_object = true;
      if (dep == "prep") {
        for (std::size_t g : children[c]) {
          if (toks[g].deprel == "pobj") has_object = true;
        }
      }
      if (is_negation(toks[c])) negated = true;
    }
    if (!has_subject || !has_object) continue;
    if (!negated) {
      out.push_back(toks[v].lemma);
    } else if (const std::string* ant = antonyms.find(toks[v].lemma)) {
      out.push_back(*ant);
    }
  }
  return out;
}

std::vector<std::string> extract_nouns(const ParsedSentence& sentence) {
  std::vector<std::string> out;
  for (const auto& t : sentence.tokens) {
    if (t.upos == "NOUN" || t.upos == "PROPN") out.push_back(t.lemma);
  }
  return out;
}

Corpus build_corpus(const std::vector<ParsedSentence>& sentences, const AliasMap& aliases,
                    const std::vector<std::string>& entities, const AntonymLexicon& antonyms) {
  std::set<std::string> allowed;
  if (entities.empty()) {
    for (const auto& e : aliases.entity_ids()) allowed.insert(e);
  } else {
    for (const auto& e : entities) {
      if (!aliases.has_entity(e)) throw ConfigError("unknown entity id '" + e + "'");
      allowed.insert(e);
    }
  }

  struct Key {
    std::string doc;
    EntityPair pair;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, AnnotatedArticle> merged;

  for (const auto& s : sentences) {
    if (s.doc_id.empty() || s.month.empty()) {
      throw InputError("every sentence needs a doc id and a month");
    }
    std::vector<std::string> present;
    for (const auto& e : detect_entities(s, aliases)) {
      if (allowed.count(e)) present.push_back(e);
    }
    if (present.size() < 2) continue;

    const auto predicates = extract_predicates(s, antonyms);
    const auto nouns = extract_nouns(s);
    for (std::size_t i = 0; i < present.size(); ++i) {
      for (std::size_t j = i + 1; j < present.size(); ++j) {
        auto pair = EntityPair::make(present[i], present[j]);
        auto [it, inserted] = merged.try_emplace(Key{s.doc_id, pair});
        auto& art = it->second;
        if (inserted) {
          art.article_id = s.doc_id;
          art.pair = pair;
          art.month = s.month;
          art.country = s.country;
        } else if (art.month != s.month) {
          throw InputError("doc '" + s.doc_id + "' has sentences in months '" + art.month +
                           "' and '" + s.month + "'");
        }
        art.predicates.insert(art.predicates.end(), predicates.begin(), predicates.end());
        art.nouns.insert(art.nouns.end(), nouns.begin(), nouns.end());
        art.n_tokens += s.tokens.size();
      }
    }
  }

  Corpus corpus;
  std::set<std::string> months;
  for (auto& [key, art] : merged) {
    if (art.predicates.empty()) continue;
    months.insert(art.month);
    corpus.articles.push_back(std::move(art));
  }
  corpus.months.assign(months.begin(), months.end());
  for (auto& a : corpus.articles) a.month_index = *corpus.month_index(a.month);
  normalize(corpus);
  return corpus;
}

}  // namespace relnet
