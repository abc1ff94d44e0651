#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "relnet/error.hpp"
#include "relnet/math.hpp"
#include "relnet/model.hpp"
#include "relnet/training.hpp"

using namespace relnet;

namespace {

struct Toy {
  Corpus corpus;
  EmbeddingTable emb;
  ModelParams params;
};

Toy toy(std::uint64_t seed, std::size_t np = 3, std::size_t nn = 4) {
  std::mt19937_64 rng(seed);
  Toy t;
  t.emb = testing::random_embeddings(8, 6, 6, rng);
  t.corpus = testing::random_corpus(3, 2, np, nn, 6, 6, rng);
  ModelConfig c;
  c.relations = 3;
  c.word_dim = 8;
  c.entity_dim = 4;
  c.months = 3;
  c.final_dim = 6;
  t.params = init_params(c, ModelIndex::from_corpus(t.corpus), rng);
  return t;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("shapes follow the configuration") {
  const auto t = toy(1);
  const auto& p = t.params.t;
  CHECK(p.relations.rows() == 3);
  CHECK(p.relations.cols() == 8);
  CHECK(p.query.cols() == 8 + 3);
  CHECK(p.w_proj.rows() == 11);
  CHECK(p.w_proj.cols() == 8 + 3);
  CHECK(p.w_cat.cols() == 8 + 4 + 11);
  CHECK(p.w_final.rows() == 3);
  CHECK_NOTHROW(t.params.validate());
  ModelConfig bad = t.params.config;
  bad.dropout = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("distributions and attention are simplices") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = toy(seed);
    for (const auto& a : t.corpus.articles) {
      const auto d = relation_distribution(a, t.params, t.emb);
      CHECK(std::abs(sum(d) - 1.0) < 1e-6);
      for (double x : d) CHECK(x >= 0.0);
      const auto att = attend_nouns(a, t.params, t.emb);
      CHECK(std::abs(sum(att.record.alpha) - 1.0) < 1e-6);
      for (double x : att.record.alpha) CHECK(x >= 0.0);
    }
  }
}

TEST_CASE("article without embedded predicates is skipped") {
  auto t = toy(2);
  auto a = t.corpus.articles[0];
  a.predicates = {"unknown", "words"};
  CHECK_FALSE(encode_label(a, t.emb));
  t.corpus.articles[0] = a;
  EncodeStats stats;
  const auto enc = encode_corpus(t.corpus, t.params.config, t.params.index, t.emb, &stats);
  CHECK(enc.size() == t.corpus.articles.size() - 1);
  CHECK(stats.articles_skipped == 1);
  CHECK(stats.predicates_dropped == 2);
}

TEST_CASE("label is the sum of predicate vectors and the mask zeroes terms") {
  const auto t = toy(3);
  const auto& a = t.corpus.articles[0];
  Vector expect(8, 0.0);
  for (const auto& p : a.predicates) {
    const auto v = *t.emb.lookup(p);
    for (std::size_t i = 0; i < 8; ++i) expect[i] += v[i];
  }
  const auto label = *encode_label(a, t.emb);
  for (std::size_t i = 0; i < 8; ++i) CHECK(label[i] == doctest::Approx(expect[i]).epsilon(1e-14));

  const std::vector<std::uint8_t> none(a.predicates.size(), 0);
  for (double x : encode_predicates(a, t.emb, none)) CHECK(x == 0.0);
  const std::vector<std::uint8_t> wrong(a.predicates.size() + 1, 1);
  CHECK_THROWS_AS(encode_predicates(a, t.emb, wrong), InputError);
}

TEST_CASE("no nouns gives a zero context and still a valid distribution") {
  const auto t = toy(4, 2, 0);
  const auto& a = t.corpus.articles[0];
  const auto att = attend_nouns(a, t.params, t.emb);
  CHECK(att.record.alpha.empty());
  for (double x : att.context) CHECK(x == 0.0);
  const auto d = relation_distribution(a, t.params, t.emb);
  CHECK(std::abs(sum(d) - 1.0) < 1e-12);
}

TEST_CASE("entity pair vector is the sum of the two entity rows") {
  const auto t = toy(5);
  const auto v = encode_entity_pair(EntityPair::make("A", "B"), t.params);
  const auto a = t.params.t.entity.row(*t.params.index.entity("A"));
  const auto b = t.params.t.entity.row(*t.params.index.entity("B"));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == a[i] + b[i]);
  CHECK_THROWS_AS(encode_entity_pair(EntityPair::make("A", "Z"), t.params), InputError);
}

TEST_CASE("out-of-range month is an input error") {
  auto t = toy(6);
  t.params.config.months = 2;
  CHECK_THROWS_AS(encode_corpus(t.corpus, t.params.config, t.params.index, t.emb), Error);
}

TEST_CASE("reconstruction is R^T d") {
  Matrix r(2, 3);
  r(0, 0) = 1;
  r(0, 1) = 2;
  r(1, 2) = 4;
  const Vector d{0.25, 0.75};
  CHECK(reconstruct(d, r) == Vector{0.25, 0.5, 3.0});
}

TEST_CASE("forward pass is deterministic and dropout mask matters") {
  const auto t = toy(7);
  const auto enc = encode_corpus(t.corpus, t.params.config, t.params.index, t.emb);
  const auto f1 = larn_forward(t.params.t, t.params.config, enc[0], t.emb);
  const auto f2 = larn_forward(t.params.t, t.params.config, enc[0], t.emb);
  CHECK(f1.dist == f2.dist);
  std::vector<std::uint8_t> keep(enc[0].predicates.size(), 0);
  keep[0] = 1;
  const auto f3 = larn_forward(t.params.t, t.params.config, enc[0], t.emb, keep);
  CHECK(f3.v_p != f1.v_p);
  CHECK(f3.dist.size() == 3);
}
