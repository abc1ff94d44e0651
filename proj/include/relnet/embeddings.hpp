#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relnet/corpus.hpp"
#include "relnet/tensor.hpp"

namespace relnet {

/// Frozen token -> vector table. Tokens are case-folded to lowercase on
/// insert and lookup; the first occurrence of a folded token wins.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  /// Returns false if the folded token was already present.
  bool add(std::string_view token, std::span<const double> vec);

  std::optional<std::size_t> index(std::string_view token) const;
  std::optional<std::span<const double>> lookup(std::string_view token) const;
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::string& token(std::size_t i) const { return tokens_[i]; }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.dim_ == b.dim_ && a.tokens_ == b.tokens_ && a.values_ == b.values_;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> by_token_;
};

std::string fold_case(std::string_view s);

/// Whitespace-separated text: "token v1 ... vd" per line. The dimension is
/// taken from the first line; a line of different arity is an InputError
/// naming the line.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::string& path);
/// Shortest round-trip decimal representation, so load(save(t)) == t.
void save_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::string& path, const EmbeddingTable& table);

/// (token, count), sorted by descending count then token.
using FrequencyVocab = std::vector<std::pair<std::string, std::size_t>>;

/// The k most frequent corpus-wide predicate lemmas that have embeddings.
FrequencyVocab top_k_predicates(const Corpus& corpus, const EmbeddingTable& emb,
                                std::size_t k = 500);

}  // namespace relnet
