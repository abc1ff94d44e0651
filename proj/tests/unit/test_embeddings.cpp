#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/error.hpp"

using namespace relnet;

TEST_CASE("load, lookup and case folding") {
  std::istringstream in("Denounce 1 0 0\nsupport 0 1 0\ndenounce 9 9 9\n");
  const auto t = load_embeddings(in);
  CHECK(t.dim() == 3);
  CHECK(t.size() == 2);
  const auto v = t.lookup("DENOUNCE");
  REQUIRE(v);
  CHECK((*v)[0] == 1.0);
  CHECK_FALSE(t.lookup("oppose"));
}

TEST_CASE("malformed files") {
  std::istringstream arity("a 1 2 3\nb 1 2\n");
  try {
    load_embeddings(arity);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream empty("");
  CHECK_THROWS_AS(load_embeddings(empty), InputError);
  std::istringstream junk("a 1 x 3\n");
  CHECK_THROWS_AS(load_embeddings(junk), InputError);
  CHECK_THROWS_AS(load_embeddings(std::string("/nonexistent/emb.txt")), InputError);
}

TEST_CASE("save/load round trip is exact") {
  std::mt19937_64 rng(5);
  const auto t = testing::random_embeddings(7, 10, 10, rng);
  std::stringstream s;
  save_embeddings(s, t);
  CHECK(load_embeddings(s) == t);
}

TEST_CASE("top-k predicates count only embedded lemmas") {
  Corpus c;
  c.months = {"2020-01"};
  AnnotatedArticle a;
  a.article_id = "x";
  a.pair = EntityPair::make("A", "B");
  a.month = "2020-01";
  a.predicates = {"warn", "warn", "meet", "zzz", "zzz", "zzz", "Meet", "agree"};
  c.articles.push_back(a);
  EmbeddingTable t(2);
  t.add("warn", Vector{1, 0});
  t.add("meet", Vector{0, 1});
  t.add("agree", Vector{1, 1});
  const auto v = top_k_predicates(c, t, 2);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == std::pair<std::string, std::size_t>{"meet", 2});
  CHECK(v[1] == std::pair<std::string, std::size_t>{"warn", 2});
}
