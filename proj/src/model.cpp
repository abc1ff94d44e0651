#include "relnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "relnet/error.hpp"
#include "relnet/math.hpp"
#include "relnet/simd.hpp"

namespace relnet {

void ModelConfig::validate() const {
  if (relations == 0 || word_dim == 0 || entity_dim == 0 || months == 0 || final_dim == 0) {
    throw ConfigError("model dimensions must all be positive");
  }
  if (!(dropout >= 0.0 && dropout <= 1.0)) throw ConfigError("dropout must lie in [0, 1]");
}

std::optional<std::size_t> ModelIndex::entity(const std::string& e) const {
  auto it = std::lower_bound(entities.begin(), entities.end(), e);
  if (it == entities.end() || *it != e) return std::nullopt;
  return static_cast<std::size_t>(it - entities.begin());
}

std::optional<std::size_t> ModelIndex::pair(const EntityPair& p) const {
  auto it = std::lower_bound(pairs.begin(), pairs.end(), p);
  if (it == pairs.end() || *it != p) return std::nullopt;
  return static_cast<std::size_t>(it - pairs.begin());
}

ModelIndex ModelIndex::from_corpus(const Corpus& corpus) {
  return ModelIndex{corpus.entities(), corpus.pairs()};
}

LarnTensors LarnTensors::zeros_like() const {
  LarnTensors z;
  z.relations = Matrix(relations.rows(), relations.cols());
  z.entity = Matrix(entity.rows(), entity.cols());
  z.query = Matrix(query.rows(), query.cols());
  z.w_proj = Matrix(w_proj.rows(), w_proj.cols());
  z.w_cat = Matrix(w_cat.rows(), w_cat.cols());
  z.w_final = Matrix(w_final.rows(), w_final.cols());
  return z;
}

ModelParams ModelParams::shaped(const ModelConfig& c, ModelIndex index) {
  c.validate();
  const std::size_t da = c.resolved_attention_dim();
  ModelParams p;
  p.config = c;
  p.t.relations = Matrix(c.relations, c.word_dim);
  p.t.entity = Matrix(index.entities.size(), c.entity_dim);
  p.t.query = Matrix(index.pairs.size(), da);
  p.t.w_proj = Matrix(da, c.word_dim + c.months);
  p.t.w_cat = Matrix(c.final_dim, c.word_dim + c.entity_dim + da);
  p.t.w_final = Matrix(c.relations, c.final_dim);
  p.index = std::move(index);
  return p;
}

void ModelParams::validate() const {
  const ModelParams ref = shaped(config, index);
  t.for_each([&](const char* name, const Matrix& m) {
    const Matrix* expected = nullptr;
    ref.t.for_each([&](const char* n2, const Matrix& m2) {
      if (std::string_view(name) == n2) expected = &m2;
    });
    if (!m.same_shape(*expected)) {
      throw InputError(std::string("tensor '") + name + "' has shape " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                       std::to_string(expected->rows()) + "x" + std::to_string(expected->cols()));
    }
    for (double v : m.flat()) {
      if (!std::isfinite(v)) throw InputError(std::string("tensor '") + name + "' is not finite");
    }
  });
}

void xavier_init(Matrix& m, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.flat()) v = dist(rng);
}

std::optional<EncodedArticle> encode_article(const Corpus& corpus, std::size_t i,
                                             const ModelConfig& config, const ModelIndex& index,
                                             const EmbeddingTable& emb, EncodeStats* stats) {
  const auto& art = corpus.articles.at(i);
  if (stats) ++stats->articles_in;
  EncodedArticle enc;
  enc.article = i;
  for (std::size_t k = 0; k < art.predicates.size(); ++k) {
    if (auto row = emb.index(art.predicates[k])) {
      enc.predicates.push_back(*row);
      enc.predicate_slots.push_back(k);
    } else if (stats) {
      ++stats->predicates_dropped;
    }
  }
  for (const auto& n : art.nouns) {
    if (auto row = emb.index(n)) {
      enc.nouns.push_back(*row);
    } else if (stats) {
      ++stats->nouns_dropped;
    }
  }
  if (enc.predicates.empty()) {
    if (stats) ++stats->articles_skipped;
    return std::nullopt;
  }
  auto a = index.entity(art.pair.first);
  auto b = index.entity(art.pair.second);
  auto p = index.pair(art.pair);
  if (!a || !b || !p) throw InputError("entity pair '" + art.pair.str() + "' unknown to the model");
  if (art.month_index < 0 || static_cast<std::size_t>(art.month_index) >= config.months) {
    throw InputError("article '" + art.article_id + "' has month index " +
                     std::to_string(art.month_index) + " but the model has " +
                     std::to_string(config.months) + " months");
  }
  enc.entity_a = *a;
  enc.entity_b = *b;
  enc.pair = *p;
  enc.month = static_cast<std::size_t>(art.month_index);
  enc.label.assign(emb.dim(), 0.0);
  for (std::size_t row : enc.predicates) simd::axpy(1.0, emb.row(row), enc.label);
  return enc;
}

std::vector<EncodedArticle> encode_corpus(const Corpus& corpus, const ModelConfig& config,
                                          const ModelIndex& index, const EmbeddingTable& emb,
                                          EncodeStats* stats) {
  if (emb.dim() != config.word_dim) {
    throw ConfigError("embedding dimension " + std::to_string(emb.dim()) +
                      " does not match model word dimension " + std::to_string(config.word_dim));
  }
  if (corpus.month_count() > config.months) {
    throw ConfigError("corpus spans " + std::to_string(corpus.month_count()) +
                      " months but the model supports " + std::to_string(config.months) +
                      "; remap months or raise --months");
  }
  std::vector<EncodedArticle> out;
  for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
    if (auto e = encode_article(corpus, i, config, index, emb, stats)) out.push_back(std::move(*e));
  }
  return out;
}

std::optional<Vector> encode_label(const AnnotatedArticle& article, const EmbeddingTable& emb) {
  Vector sum(emb.dim(), 0.0);
  bool any = false;
  for (const auto& p : article.predicates) {
    if (auto v = emb.lookup(p)) {
      simd::axpy(1.0, *v, sum);
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return sum;
}

Vector encode_predicates(const AnnotatedArticle& article, const EmbeddingTable& emb,
                         std::span<const std::uint8_t> mask) {
  if (mask.size() != article.predicates.size()) {
    throw InputError("dropout mask has " + std::to_string(mask.size()) + " entries for " +
                     std::to_string(article.predicates.size()) + " predicates");
  }
  Vector sum(emb.dim(), 0.0);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask[k]) continue;
    if (auto v = emb.lookup(article.predicates[k])) simd::axpy(1.0, *v, sum);
  }
  return sum;
}

Vector encode_entity_pair(const EntityPair& pair, const ModelParams& params) {
  auto a = params.index.entity(pair.first);
  auto b = params.index.entity(pair.second);
  if (!a) throw InputError("unknown entity '" + pair.first + "'");
  if (!b) throw InputError("unknown entity '" + pair.second + "'");
  Vector v(params.t.entity.row(*a).begin(), params.t.entity.row(*a).end());
  simd::axpy(1.0, params.t.entity.row(*b), v);
  return v;
}

namespace {

// Encodes one article of a single-article corpus view.
EncodedArticle encode_single(const AnnotatedArticle& article, const ModelParams& params,
                             const EmbeddingTable& emb) {
  Corpus view;
  view.articles.push_back(article);
  view.months.resize(params.config.months);
  auto enc = encode_article(view, 0, params.config, params.index, emb);
  if (!enc) throw InputError("article '" + article.article_id + "' has no embedded predicate");
  return std::move(*enc);
}

std::vector<std::uint8_t> embedded_keep_mask(const EncodedArticle& enc,
                                             std::span<const std::uint8_t> mask) {
  std::vector<std::uint8_t> keep;
  keep.reserve(enc.predicate_slots.size());
  for (std::size_t slot : enc.predicate_slots) keep.push_back(mask[slot]);
  return keep;
}

}  // namespace

NounAttention attend_nouns(const AnnotatedArticle& article, const ModelParams& params,
                           const EmbeddingTable& emb) {
  const auto enc = encode_single(article, params, emb);
  const auto fwd = larn_forward(params.t, params.config, enc, emb);
  NounAttention out;
  out.context = fwd.v_n;
  out.record.alpha = fwd.alpha;
  out.record.hidden = fwd.hidden;
  for (std::size_t row : enc.nouns) out.record.nouns.push_back(emb.token(row));
  return out;
}

RelationDistribution relation_distribution(const AnnotatedArticle& article,
                                           const ModelParams& params, const EmbeddingTable& emb,
                                           std::span<const std::uint8_t> mask) {
  const auto enc = encode_single(article, params, emb);
  if (mask.empty()) return larn_forward(params.t, params.config, enc, emb).dist;
  if (mask.size() != article.predicates.size()) {
    throw InputError("dropout mask has " + std::to_string(mask.size()) + " entries for " +
                     std::to_string(article.predicates.size()) + " predicates");
  }
  const auto keep = embedded_keep_mask(enc, mask);
  return larn_forward(params.t, params.config, enc, emb, keep).dist;
}

Vector reconstruct(std::span<const double> dist, const Matrix& relations) {
  Vector r(relations.cols(), 0.0);
  simd::gemv_t_acc(relations, dist, r);
  return r;
}

LarnForward larn_forward(const LarnTensors& t, const ModelConfig& config, const EncodedArticle& a,
                         const EmbeddingTable& emb, std::span<const std::uint8_t> keep) {
  const std::size_t d = config.word_dim;
  const std::size_t de = config.entity_dim;
  const std::size_t da = config.resolved_attention_dim();
  if (!keep.empty() && keep.size() != a.predicates.size()) {
    throw InputError("dropout mask length does not match predicate count");
  }

  LarnForward f;
  f.v_p.assign(d, 0.0);
  for (std::size_t k = 0; k < a.predicates.size(); ++k) {
    if (keep.empty() || keep[k]) simd::axpy(1.0, emb.row(a.predicates[k]), f.v_p);
  }

  f.v_e.assign(t.entity.row(a.entity_a).begin(), t.entity.row(a.entity_a).end());
  simd::axpy(1.0, t.entity.row(a.entity_b), f.v_e);

  // h_k = tanh(W_proj [v_k; onehot(month)]); the one-hot selects column d + month.
  const std::size_t m = a.nouns.size();
  f.hidden = Matrix(m, da);
  f.alpha.assign(m, 0.0);
  f.v_n.assign(da, 0.0);
  const auto q = t.query.row(a.pair);
  for (std::size_t k = 0; k < m; ++k) {
    const auto v = emb.row(a.nouns[k]);
    auto h = f.hidden.row(k);
    for (std::size_t r = 0; r < da; ++r) {
      const auto w = t.w_proj.row(r);
      h[r] = std::tanh(simd::dot(w.first(d), v) + w[d + a.month]);
    }
    f.alpha[k] = simd::dot(h, q);
  }
  softmax_inplace(f.alpha);
  for (std::size_t k = 0; k < m; ++k) simd::axpy(f.alpha[k], f.hidden.row(k), f.v_n);

  f.concat.reserve(d + de + da);
  f.concat.insert(f.concat.end(), f.v_p.begin(), f.v_p.end());
  f.concat.insert(f.concat.end(), f.v_e.begin(), f.v_e.end());
  f.concat.insert(f.concat.end(), f.v_n.begin(), f.v_n.end());

  f.pre_relu.assign(config.final_dim, 0.0);
  simd::gemv(t.w_cat, f.concat, f.pre_relu);
  f.v_final = f.pre_relu;
  for (double& x : f.v_final) x = std::max(0.0, x);

  f.dist.assign(config.relations, 0.0);
  simd::gemv(t.w_final, f.v_final, f.dist);
  softmax_inplace(f.dist);

  f.recon = reconstruct(f.dist, t.relations);
  return f;
}

void larn_backward(const LarnTensors& t, const ModelConfig& config, const EncodedArticle& a,
                   const EmbeddingTable& emb, const LarnForward& f,
                   std::span<const double> grad_recon, LarnTensors& g) {
  const std::size_t d = config.word_dim;
  const std::size_t de = config.entity_dim;
  const std::size_t da = config.resolved_attention_dim();
  const std::size_t K = config.relations;

  // r = R^T dist
  simd::ger(1.0, f.dist, grad_recon, g.relations);
  Vector g_dist(K, 0.0);
  simd::gemv(t.relations, grad_recon, g_dist);

  Vector g_logits(K, 0.0);
  softmax_backward(f.dist, g_dist, g_logits);

  simd::ger(1.0, g_logits, f.v_final, g.w_final);
  Vector g_pre(config.final_dim, 0.0);
  simd::gemv_t_acc(t.w_final, g_logits, g_pre);
  for (std::size_t i = 0; i < g_pre.size(); ++i) {
    if (f.pre_relu[i] <= 0.0) g_pre[i] = 0.0;
  }

  simd::ger(1.0, g_pre, f.concat, g.w_cat);
  Vector g_concat(d + de + da, 0.0);
  simd::gemv_t_acc(t.w_cat, g_pre, g_concat);

  // v_p depends only on frozen word vectors: its slice is discarded.
  const std::span<const double> g_ve(g_concat.data() + d, de);
  simd::axpy(1.0, g_ve, g.entity.row(a.entity_a));
  simd::axpy(1.0, g_ve, g.entity.row(a.entity_b));

  const std::size_t m = a.nouns.size();
  if (m == 0) return;
  const std::span<const double> g_vn(g_concat.data() + d + de, da);
  const auto q = t.query.row(a.pair);

  Vector g_alpha(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) g_alpha[k] = simd::dot(f.hidden.row(k), g_vn);
  Vector g_score(m, 0.0);
  softmax_backward(f.alpha, g_alpha, g_score);

  Vector g_h(da, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto h = f.hidden.row(k);
    simd::axpy(g_score[k], h, g.query.row(a.pair));
    for (std::size_t r = 0; r < da; ++r) {
      g_h[r] = (f.alpha[k] * g_vn[r] + g_score[k] * q[r]) * (1.0 - h[r] * h[r]);
    }
    const auto v = emb.row(a.nouns[k]);
    for (std::size_t r = 0; r < da; ++r) {
      if (g_h[r] == 0.0) continue;
      auto w = g.w_proj.row(r);
      simd::axpy(g_h[r], v, w.first(d));
      w[d + a.month] += g_h[r];
    }
  }
}

}  // namespace relnet
