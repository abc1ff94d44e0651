#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relnet/corpus.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/tensor.hpp"

namespace relnet {

struct ModelConfig {
  std::size_t relations = 30;   // K
  std::size_t word_dim = 300;   // d, must match the embedding table
  std::size_t entity_dim = 50;
  std::size_t months = 30;      // T, width of the month one-hot
  std::size_t attention_dim = 0;  // 0 means word_dim + months
  std::size_t final_dim = 300;
  double dropout = 0.5;

  std::size_t resolved_attention_dim() const {
    return attention_dim == 0 ? word_dim + months : attention_dim;
  }
  /// Throws ConfigError on a zero dimension or dropout outside [0, 1].
  void validate() const;
};

/// Entity and entity-pair rows shared by both models.
struct ModelIndex {
  std::vector<std::string> entities;
  std::vector<EntityPair> pairs;

  std::optional<std::size_t> entity(const std::string& e) const;
  std::optional<std::size_t> pair(const EntityPair& p) const;
  static ModelIndex from_corpus(const Corpus& corpus);
};

/// Every trainable tensor of the attention model. Gradients use the same
/// type.
struct LarnTensors {
  Matrix relations;  // K x d
  Matrix entity;     // entities x entity_dim
  Matrix query;      // pairs x attention_dim
  Matrix w_proj;     // attention_dim x (d + T)
  Matrix w_cat;      // final_dim x (d + entity_dim + attention_dim)
  Matrix w_final;    // K x final_dim

  template <typename Fn>
  void for_each(Fn&& fn) {
    fn("relations", relations);
    fn("entity", entity);
    fn("query", query);
    fn("w_proj", w_proj);
    fn("w_cat", w_cat);
    fn("w_final", w_final);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    fn("relations", relations);
    fn("entity", entity);
    fn("query", query);
    fn("w_proj", w_proj);
    fn("w_cat", w_cat);
    fn("w_final", w_final);
  }
  LarnTensors zeros_like() const;
  friend bool operator==(const LarnTensors&, const LarnTensors&) = default;
};

struct ModelParams {
  ModelConfig config;
  ModelIndex index;
  LarnTensors t;

  /// Zero tensors of the configured shapes.
  static ModelParams shaped(const ModelConfig& config, ModelIndex index);
  /// Throws InputError if any tensor has the wrong shape or a non-finite value.
  void validate() const;
};

/// Xavier-uniform initialization of every tensor, drawn in declaration order.
void xavier_init(Matrix& m, std::mt19937_64& rng);

/// An article resolved against the embedding table and the model index.
struct EncodedArticle {
  std::size_t article = 0;          // index into the corpus
  std::vector<std::size_t> predicates;  // embedding rows of embedded predicates
  std::vector<std::size_t> predicate_slots;  // their positions in the article
  std::vector<std::size_t> nouns;   // embedding rows of embedded nouns
  std::size_t entity_a = 0;
  std::size_t entity_b = 0;
  std::size_t pair = 0;
  std::size_t month = 0;
  Vector label;  // sum of predicate vectors
};

struct EncodeStats {
  std::size_t articles_in = 0;
  std::size_t articles_skipped = 0;  // no embedded predicate
  std::size_t predicates_dropped = 0;
  std::size_t nouns_dropped = 0;
};

/// Returns nullopt when the article has no embedded predicate. Throws
/// InputError for entities or pairs unknown to the index and for month
/// indices >= T.
std::optional<EncodedArticle> encode_article(const Corpus& corpus, std::size_t i,
                                             const ModelConfig& config, const ModelIndex& index,
                                             const EmbeddingTable& emb, EncodeStats* stats = nullptr);
std::vector<EncodedArticle> encode_corpus(const Corpus& corpus, const ModelConfig& config,
                                          const ModelIndex& index, const EmbeddingTable& emb,
                                          EncodeStats* stats = nullptr);

// --- Component operations on raw articles ---------------------------------

/// Sum of the embedded predicate vectors; nullopt signals "skip article".
std::optional<Vector> encode_label(const AnnotatedArticle& article, const EmbeddingTable& emb);
/// sum_k mask[k] * v(p_k); mask has one entry per article predicate.
Vector encode_predicates(const AnnotatedArticle& article, const EmbeddingTable& emb,
                         std::span<const std::uint8_t> mask);
Vector encode_entity_pair(const EntityPair& pair, const ModelParams& params);

struct AttentionRecord {
  std::vector<std::string> nouns;  // embedded nouns, article order
  Vector alpha;
  Matrix hidden;  // one row per noun
};

struct NounAttention {
  Vector context;  // v_n; zero when the article has no embedded noun
  AttentionRecord record;
};

NounAttention attend_nouns(const AnnotatedArticle& article, const ModelParams& params,
                           const EmbeddingTable& emb);

using RelationDistribution = Vector;

/// Inference-mode distribution when `mask` is empty; otherwise mask has one
/// entry per article predicate.
RelationDistribution relation_distribution(const AnnotatedArticle& article,
                                           const ModelParams& params, const EmbeddingTable& emb,
                                           std::span<const std::uint8_t> mask = {});

/// R^T dist.
Vector reconstruct(std::span<const double> dist, const Matrix& relations);

// --- Forward/backward on encoded articles ---------------------------------

/// Intermediates of one forward pass, kept for backprop.
struct LarnForward {
  Vector v_p, v_e;
  Matrix hidden;  // nouns x attention_dim, tanh outputs
  Vector alpha;
  Vector v_n;
  Vector concat;  // [v_p; v_e; v_n]
  Vector pre_relu;
  Vector v_final;
  Vector dist;
  Vector recon;
};

/// `keep` holds one 0/1 entry per embedded predicate; empty means all kept.
LarnForward larn_forward(const LarnTensors& t, const ModelConfig& config, const EncodedArticle& a,
                         const EmbeddingTable& emb, std::span<const std::uint8_t> keep = {});

/// Accumulates into `grad` the gradient of a loss whose derivative with
/// respect to the reconstruction is `grad_recon`. Word embeddings receive no
/// gradient.
void larn_backward(const LarnTensors& t, const ModelConfig& config, const EncodedArticle& a,
                   const EmbeddingTable& emb, const LarnForward& fwd,
                   std::span<const double> grad_recon, LarnTensors& grad);

}  // namespace relnet
