#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "relnet/conllu.hpp"
#include "relnet/corpus.hpp"

namespace relnet {

/// Entity id -> alias surface strings. Matching is case-sensitive; an alias
/// containing spaces matches a contiguous run of tokens.
class AliasMap {
 public:
  /// Throws ConfigError if the alias already belongs to another entity.
  void add(const std::string& entity, const std::string& alias);

  bool has_entity(const std::string& entity) const { return entries_.count(entity) > 0; }
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }
  std::vector<std::string> entity_ids() const;

  /// Reads "entity<TAB>alias" lines; '#' starts a comment line.
  static AliasMap read_tsv(std::istream& in);
  static AliasMap read_tsv_file(const std::string& path);

 private:
  friend std::set<std::string> detect_entities(const ParsedSentence&, const AliasMap&);

  std::map<std::string, std::vector<std::string>> entries_;
  // Alias split into tokens -> entity.
  std::map<std::vector<std::string>, std::string> patterns_;
};

class AntonymLexicon {
 public:
  void add(const std::string& lemma, const std::string& antonym) { map_[lemma] = antonym; }
  const std::string* find(const std::string& lemma) const;
  std::size_t size() const { return map_.size(); }

  /// Reads "lemma<TAB>antonym" lines.
  static AntonymLexicon read_tsv(std::istream& in);
  static AntonymLexicon read_tsv_file(const std::string& path);

 private:
  std::map<std::string, std::string> map_;
};

std::set<std::string> detect_entities(const ParsedSentence& sentence, const AliasMap& aliases);

/// Lemmas of verbs with both a subject and an object dependent. A negated
/// verb is replaced by its antonym when the lexicon has one and dropped
/// otherwise. Throws InputError on a malformed dependency tree.
std::vector<std::string> extract_predicates(const ParsedSentence& sentence,
                                            const AntonymLexicon& antonyms);

/// NOUN and PROPN lemmas in surface order.
std::vector<std::string> extract_nouns(const ParsedSentence& sentence);

/// Groups pair-mentioning sentences into one article per (doc, pair).
/// `entities` restricts which entities are considered; empty means every
/// entity in the alias map. Throws ConfigError on an entity without aliases.
Corpus build_corpus(const std::vector<ParsedSentence>& sentences, const AliasMap& aliases,
                    const std::vector<std::string>& entities, const AntonymLexicon& antonyms);

}  // namespace relnet
