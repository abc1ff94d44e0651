#pragma once

// Baseline in the style of the relationship modeling network: the article is
// the average of all of its word vectors (predicates and nouns, minus a
// stop list of the most frequent words) plus the entity-pair vector, and the
// output distribution is blended with the previous one in time:
//   d_t = alpha * d_{t-1} + (1 - alpha) * softmax(W_out relu(W_hidden [v_words; v_e]))
// This is an approximation of the original model, not a reproduction.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "relnet/corpus.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/model.hpp"

namespace relnet {

struct RmnConfig {
  std::size_t relations = 30;
  std::size_t word_dim = 300;
  std::size_t entity_dim = 50;
  std::size_t hidden_dim = 300;
  double recurrence = 0.5;  // weight of d_{t-1}
  std::size_t stopword_count = 500;

  void validate() const;
};

struct RmnTensors {
  Matrix relations;  // K x d
  Matrix entity;     // entities x entity_dim
  Matrix w_hidden;   // hidden_dim x (d + entity_dim)
  Matrix w_out;      // K x hidden_dim

  template <typename Fn>
  void for_each(Fn&& fn) {
    fn("relations", relations);
    fn("entity", entity);
    fn("w_hidden", w_hidden);
    fn("w_out", w_out);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    fn("relations", relations);
    fn("entity", entity);
    fn("w_hidden", w_hidden);
    fn("w_out", w_out);
  }
  RmnTensors zeros_like() const;
  friend bool operator==(const RmnTensors&, const RmnTensors&) = default;
};

struct RmnParams {
  RmnConfig config;
  ModelIndex index;
  std::vector<std::string> stopwords;  // sorted, folded
  RmnTensors t;

  static RmnParams shaped(const RmnConfig& config, ModelIndex index);
  void validate() const;
};

/// The `count` most frequent folded words over predicates and nouns.
std::vector<std::string> rmn_stopwords(const Corpus& corpus, std::size_t count);

struct RmnArticle {
  std::size_t article = 0;
  std::vector<std::size_t> words;  // embedding rows after stopword removal
  std::size_t entity_a = 0;
  std::size_t entity_b = 0;
  Vector label;  // predicate sum, as in the attention model
};

std::vector<RmnArticle> rmn_encode_corpus(const Corpus& corpus, const RmnParams& params,
                                          const EmbeddingTable& emb, EncodeStats* stats = nullptr);

struct RmnForward {
  Vector words_mean;
  Vector concat;
  Vector pre_relu;
  Vector hidden;
  Vector fresh;  // softmax output before blending
  Vector dist;
  Vector recon;
  bool blended = false;
};

RmnForward rmn_forward(const RmnTensors& t, const RmnConfig& config, const RmnArticle& a,
                       const EmbeddingTable& emb, std::span<const double> prev_dist = {});

/// Public single-article form; `prev_dist` empty on the first time step.
RelationDistribution rmn_forward(const AnnotatedArticle& article, const RmnParams& params,
                                 const EmbeddingTable& emb,
                                 std::span<const double> prev_dist = {});

/// Treats prev_dist as a constant.
void rmn_backward(const RmnTensors& t, const RmnConfig& config, const RmnArticle& a,
                  const EmbeddingTable& emb, const RmnForward& f,
                  std::span<const double> grad_recon, RmnTensors& grad);

/// Index into `encoded` of each article's predecessor in its pair's
/// chronological sequence (month, then article id); nullopt for the first.
std::vector<std::optional<std::size_t>> rmn_predecessors(const Corpus& corpus,
                                                         const std::vector<RmnArticle>& encoded);

/// Runs each pair's sequence in time order, feeding every output forward.
std::vector<RelationDistribution> rmn_infer(const Corpus& corpus,
                                            const std::vector<RmnArticle>& encoded,
                                            const RmnParams& params, const EmbeddingTable& emb);

}  // namespace relnet
