#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relnet {

/// Unordered entity pair stored in canonical (lexicographic) order.
struct EntityPair {
  std::string first;
  std::string second;

  /// Canonicalizes; throws InputError if a == b.
  static EntityPair make(std::string a, std::string b);
  /// Parses "A,B" (order irrelevant).
  static EntityPair parse(std::string_view text);

  std::string str() const { return first + "," + second; }
  bool contains(std::string_view e) const { return first == e || second == e; }

  friend auto operator<=>(const EntityPair&, const EntityPair&) = default;
  friend bool operator==(const EntityPair&, const EntityPair&) = default;
};

/// One article's evidence for one entity pair.
struct AnnotatedArticle {
  std::string article_id;
  EntityPair pair;
  std::string month;  // "YYYY-MM"
  int month_index = 0;
  std::vector<std::string> predicates;
  std::vector<std::string> nouns;
  std::optional<std::string> country;
  // Token count of the pair's merged sentences; the denominator of
  // predicate term frequency.
  std::size_t n_tokens = 0;

  friend bool operator==(const AnnotatedArticle&, const AnnotatedArticle&) = default;
};

struct Corpus {
  std::vector<AnnotatedArticle> articles;
  // Label of each month index; size is the corpus month count T.
  std::vector<std::string> months;

  std::size_t month_count() const { return months.size(); }
  std::vector<EntityPair> pairs() const;
  std::vector<std::string> entities() const;
  std::vector<std::size_t> indices_of(const EntityPair& pair) const;
  /// Month index for a "YYYY-MM" label, if present in the corpus.
  std::optional<int> month_index(std::string_view label) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

void write_jsonl(std::ostream& out, const Corpus& corpus);
void write_jsonl_file(const std::string& path, const Corpus& corpus);
/// Rebuilds the month table from the (month_index, month) fields and checks
/// that the two agree across lines.
Corpus read_jsonl(std::istream& in);
Corpus read_jsonl_file(const std::string& path);

/// Orders articles by (pair, month_index, article_id) and validates indices.
void normalize(Corpus& corpus);

}  // namespace relnet
