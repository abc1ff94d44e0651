#include "relnet/rmn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "relnet/error.hpp"
#include "relnet/math.hpp"
#include "relnet/simd.hpp"

namespace relnet {

void RmnConfig::validate() const {
  if (relations == 0 || word_dim == 0 || entity_dim == 0 || hidden_dim == 0) {
    throw ConfigError("model dimensions must all be positive");
  }
  if (!(recurrence >= 0.0 && recurrence < 1.0)) {
    throw ConfigError("recurrence weight must lie in [0, 1)");
  }
}

RmnTensors RmnTensors::zeros_like() const {
  return RmnTensors{Matrix(relations.rows(), relations.cols()), Matrix(entity.rows(), entity.cols()),
                    Matrix(w_hidden.rows(), w_hidden.cols()), Matrix(w_out.rows(), w_out.cols())};
}

RmnParams RmnParams::shaped(const RmnConfig& c, ModelIndex index) {
  c.validate();
  RmnParams p;
  p.config = c;
  p.t.relations = Matrix(c.relations, c.word_dim);
  p.t.entity = Matrix(index.entities.size(), c.entity_dim);
  p.t.w_hidden = Matrix(c.hidden_dim, c.word_dim + c.entity_dim);
  p.t.w_out = Matrix(c.relations, c.hidden_dim);
  p.index = std::move(index);
  return p;
}

void RmnParams::validate() const {
  const RmnTensors ref = shaped(config, index).t;
  const Matrix* expected[] = {&ref.relations, &ref.entity, &ref.w_hidden, &ref.w_out};
  std::size_t i = 0;
  t.for_each([&](const char* name, const Matrix& m) {
    if (!m.same_shape(*expected[i++])) {
      throw InputError(std::string("tensor '") + name + "' has the wrong shape");
    }
    for (double v : m.flat()) {
      if (!std::isfinite(v)) throw InputError(std::string("tensor '") + name + "' is not finite");
    }
  });
}

std::vector<std::string> rmn_stopwords(const Corpus& corpus, std::size_t count) {
  std::map<std::string, std::size_t> freq;
  for (const auto& a : corpus.articles) {
    for (const auto& w : a.predicates) ++freq[fold_case(w)];
    for (const auto& w : a.nouns) ++freq[fold_case(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  if (ranked.size() > count) ranked.resize(count);
  std::vector<std::string> out;
  for (auto& [w, _] : ranked) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RmnArticle> rmn_encode_corpus(const Corpus& corpus, const RmnParams& params,
                                          const EmbeddingTable& emb, EncodeStats* stats) {
  if (emb.dim() != params.config.word_dim) {
    throw ConfigError("embedding dimension does not match model word dimension");
  }
  auto is_stop = [&](const std::string& w) {
    return std::binary_search(params.stopwords.begin(), params.stopwords.end(), fold_case(w));
  };
  std::vector<RmnArticle> out;
  for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
    const auto& art = corpus.articles[i];
    if (stats) ++stats->articles_in;
    auto label = encode_label(art, emb);
    if (!label) {
      if (stats) ++stats->articles_skipped;
      continue;
    }
    auto a = params.index.entity(art.pair.first);
    auto b = params.index.entity(art.pair.second);
    if (!a || !b) throw InputError("entity pair '" + art.pair.str() + "' unknown to the model");
    RmnArticle r;
    r.article = i;
    r.entity_a = *a;
    r.entity_b = *b;
    r.label = std::move(*label);
    auto take = [&](const std::vector<std::string>& words, std::size_t* dropped) {
      for (const auto& w : words) {
        if (is_stop(w)) continue;
        if (auto row = emb.index(w)) {
          r.words.push_back(*row);
        } else if (dropped) {
          ++*dropped;
        }
      }
    };
    take(art.predicates, stats ? &stats->predicates_dropped : nullptr);
    take(art.nouns, stats ? &stats->nouns_dropped : nullptr);
    out.push_back(std::move(r));
  }
  return out;
}

RmnForward rmn_forward(const RmnTensors& t, const RmnConfig& c, const RmnArticle& a,
                       const EmbeddingTable& emb, std::span<const double> prev) {
  const std::size_t d = c.word_dim;
  if (!prev.empty() && prev.size() != c.relations) {
    throw InputError("previous distribution has the wrong length");
  }
  RmnForward f;
  f.words_mean.assign(d, 0.0);
  if (!a.words.empty()) {
    const double inv = 1.0 / static_cast<double>(a.words.size());
    for (std::size_t row : a.words) simd::axpy(inv, emb.row(row), f.words_mean);
  }
  f.concat = f.words_mean;
  f.concat.insert(f.concat.end(), t.entity.row(a.entity_a).begin(), t.entity.row(a.entity_a).end());
  simd::axpy(1.0, t.entity.row(a.entity_b), std::span<double>(f.concat).subspan(d));

  f.pre_relu.assign(c.hidden_dim, 0.0);
  simd::gemv(t.w_hidden, f.concat, f.pre_relu);
  f.hidden = f.pre_relu;
  for (double& x : f.hidden) x = std::max(0.0, x);

  f.fresh.assign(c.relations, 0.0);
  simd::gemv(t.w_out, f.hidden, f.fresh);
  softmax_inplace(f.fresh);

  f.dist = f.fresh;
  f.blended = !prev.empty();
  if (f.blended) {
    for (std::size_t k = 0; k < c.relations; ++k) {
      f.dist[k] = c.recurrence * prev[k] + (1.0 - c.recurrence) * f.fresh[k];
    }
  }
  f.recon = reconstruct(f.dist, t.relations);
  return f;
}

RelationDistribution rmn_forward(const AnnotatedArticle& article, const RmnParams& params,
                                 const EmbeddingTable& emb, std::span<const double> prev_dist) {
  Corpus view;
  view.articles.push_back(article);
  auto enc = rmn_encode_corpus(view, params, emb);
  if (enc.empty()) throw InputError("article '" + article.article_id + "' has no embedded predicate");
  return rmn_forward(params.t, params.config, enc.front(), emb, prev_dist).dist;
}

void rmn_backward(const RmnTensors& t, const RmnConfig& c, const RmnArticle& a,
                  const EmbeddingTable&, const RmnForward& f, std::span<const double> grad_recon,
                  RmnTensors& g) {
  const std::size_t d = c.word_dim;
  const std::size_t K = c.relations;
  simd::ger(1.0, f.dist, grad_recon, g.relations);

  Vector g_dist(K, 0.0);
  simd::gemv(t.relations, grad_recon, g_dist);
  // Only the fresh softmax branch depends on parameters; blending scales it.
  if (f.blended) {
    for (double& x : g_dist) x *= (1.0 - c.recurrence);
  }
  Vector g_logits(K, 0.0);
  softmax_backward(f.fresh, g_dist, g_logits);

  simd::ger(1.0, g_logits, f.hidden, g.w_out);
  Vector g_pre(c.hidden_dim, 0.0);
  simd::gemv_t_acc(t.w_out, g_logits, g_pre);
  for (std::size_t i = 0; i < g_pre.size(); ++i) {
    if (f.pre_relu[i] <= 0.0) g_pre[i] = 0.0;
  }
  simd::ger(1.0, g_pre, f.concat, g.w_hidden);
  Vector g_concat(f.concat.size(), 0.0);
  simd::gemv_t_acc(t.w_hidden, g_pre, g_concat);
  const std::span<const double> g_ve(g_concat.data() + d, c.entity_dim);
  simd::axpy(1.0, g_ve, g.entity.row(a.entity_a));
  simd::axpy(1.0, g_ve, g.entity.row(a.entity_b));
}

std::vector<std::optional<std::size_t>> rmn_predecessors(const Corpus& corpus,
                                                         const std::vector<RmnArticle>& encoded) {
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    const auto& a = corpus.articles[encoded[i].article];
    return std::tie(a.pair, a.month_index, a.article_id);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return key(x) < key(y); });
  std::vector<std::optional<std::size_t>> prev(encoded.size());
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& cur = corpus.articles[encoded[order[k]].article];
    const auto& before = corpus.articles[encoded[order[k - 1]].article];
    if (cur.pair == before.pair) prev[order[k]] = order[k - 1];
  }
  return prev;
}

std::vector<RelationDistribution> rmn_infer(const Corpus& corpus,
                                            const std::vector<RmnArticle>& encoded,
                                            const RmnParams& params, const EmbeddingTable& emb) {
  const auto prev = rmn_predecessors(corpus, encoded);
  std::vector<RelationDistribution> out(encoded.size());
  std::vector<bool> done(encoded.size(), false);
  auto eval = [&](auto&& self, std::size_t i) -> void {
    if (done[i]) return;
    std::span<const double> p;
    if (prev[i]) {
      self(self, *prev[i]);
      p = out[*prev[i]];
    }
    out[i] = rmn_forward(params.t, params.config, encoded[i], emb, p).dist;
    done[i] = true;
  };
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    // Walk chains iteratively from their head to avoid deep recursion.
    std::vector<std::size_t> chain{i};
    while (prev[chain.back()] && !done[*prev[chain.back()]]) chain.push_back(*prev[chain.back()]);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) eval(eval, *it);
  }
  return out;
}

}  // namespace relnet
