#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "relnet/annotate.hpp"
#include "relnet/conllu.hpp"
#include "relnet/corpus.hpp"
#include "relnet/error.hpp"

using namespace relnet;

namespace {

ParsedSentence sentence(std::vector<Token> tokens) {
  ParsedSentence s;
  s.tokens = std::move(tokens);
  s.doc_id = "d";
  s.month = "2016-10";
  return s;
}

// "U.S. denounces Russia for its interference in the 2016 election."
ParsedSentence denounce_sentence() {
  return sentence({{"U.S.", "U.S.", "PROPN", 2, "nsubj"},
                   {"denounces", "denounce", "VERB", 0, "root"},
                   {"Russia", "Russia", "PROPN", 2, "obj"},
                   {"for", "for", "ADP", 6, "case"},
                   {"its", "its", "PRON", 6, "nmod:poss"},
                   {"interference", "interference", "NOUN", 2, "obl"},
                   {"in", "in", "ADP", 10, "case"},
                   {"the", "the", "DET", 10, "det"},
                   {"2016", "2016", "NUM", 10, "nummod"},
                   {"election", "election", "NOUN", 6, "nmod"},
                   {".", ".", "PUNCT", 2, "punct"}});
}

AliasMap aliases() { return AliasMap::read_tsv_file(testing::fixture("aliases.tsv")); }

}  // namespace

TEST_CASE("subject-verb-object predicate and nouns") {
  const auto s = denounce_sentence();
  CHECK(extract_predicates(s, {}) == std::vector<std::string>{"denounce"});
  CHECK(extract_nouns(s) ==
        std::vector<std::string>{"U.S.", "Russia", "interference", "election"});
  CHECK(detect_entities(s, aliases()) == std::set<std::string>{"Russia", "US"});
}

TEST_CASE("negated verb maps to its antonym or is dropped") {
  AntonymLexicon lex;
  lex.add("support", "oppose");
  auto s = sentence({{"Russia", "Russia", "PROPN", 4, "nsubj"},
                     {"does", "do", "AUX", 4, "aux"},
                     {"not", "not", "PART", 4, "advmod"},
                     {"support", "support", "VERB", 0, "root"},
                     {"sanctions", "sanction", "NOUN", 4, "obj"}});
  CHECK(extract_predicates(s, lex) == std::vector<std::string>{"oppose"});
  s.tokens[3].lemma = "endorse";
  CHECK(extract_predicates(s, lex).empty());
  s.tokens[2].deprel = "neg";
  s.tokens[3].lemma = "support";
  CHECK(extract_predicates(s, lex) == std::vector<std::string>{"oppose"});
}

TEST_CASE("intransitive verbs and verbs without subjects are skipped") {
  const auto intrans = sentence({{"Xi", "Xi", "PROPN", 2, "nsubj"},
                                 {"arrived", "arrive", "VERB", 0, "root"},
                                 {"in", "in", "ADP", 4, "case"},
                                 {"Florida", "Florida", "PROPN", 2, "obl"}});
  CHECK(extract_predicates(intrans, {}).empty());
  const auto no_subj = sentence({{"meet", "meet", "VERB", 0, "root"},
                                 {"Trump", "Trump", "PROPN", 1, "obj"}});
  CHECK(extract_predicates(no_subj, {}).empty());
  const auto prep = sentence({{"Germany", "Germany", "PROPN", 2, "nsubj"},
                              {"agreed", "agree", "VERB", 0, "root"},
                              {"with", "with", "ADP", 2, "prep"},
                              {"France", "France", "PROPN", 3, "pobj"}});
  CHECK(extract_predicates(prep, {}) == std::vector<std::string>{"agree"});
}

TEST_CASE("malformed dependency trees are rejected") {
  auto s = denounce_sentence();
  s.tokens[0].head = 12;
  CHECK_THROWS_AS(extract_predicates(s, {}), InputError);
  s.tokens[0].head = 1;
  CHECK_THROWS_AS(extract_predicates(s, {}), InputError);
  s.tokens[0].head = -1;
  CHECK_THROWS_AS(extract_predicates(s, {}), InputError);
}

TEST_CASE("alias map") {
  AliasMap m;
  m.add("US", "U.S.");
  m.add("UK", "Great Britain");
  CHECK_THROWS_AS(m.add("UK", "U.S."), ConfigError);
  auto s = sentence({{"Great", "great", "ADJ", 2, "amod"},
                     {"Britain", "Britain", "PROPN", 0, "root"},
                     {"u.s.", "u.s.", "PROPN", 2, "conj"}});
  // Case-sensitive surface matching; "Britain" alone is not an alias here.
  CHECK(detect_entities(s, m) == std::set<std::string>{"UK"});
  CHECK(aliases().entity_ids().size() == 12);
  CHECK_THROWS_AS(AliasMap::read_tsv_file("/nonexistent/aliases.tsv"), InputError);
}

TEST_CASE("multi-alias sentence yields one article per pair") {
  // "Trump and Obama criticized China" names the US twice.
  auto s = sentence({{"Trump", "Trump", "PROPN", 4, "nsubj"},
                     {"and", "and", "CCONJ", 3, "cc"},
                     {"Obama", "Obama", "PROPN", 1, "conj"},
                     {"criticized", "criticize", "VERB", 0, "root"},
                     {"China", "China", "PROPN", 4, "obj"}});
  const auto c = build_corpus({s}, aliases(), {}, {});
  REQUIRE(c.articles.size() == 1);
  CHECK(c.articles[0].pair == EntityPair::make("US", "China"));
  CHECK(c.articles[0].predicates == std::vector<std::string>{"criticize"});
  CHECK(c.articles[0].n_tokens == 5);
  CHECK_THROWS_AS(build_corpus({s}, aliases(), {"Atlantis"}, {}), ConfigError);
  CHECK(build_corpus({s}, aliases(), {"US", "Russia"}, {}).articles.empty());
}

TEST_CASE("CoNLL-U reader") {
  std::istringstream in(
      "# newdoc id = a\n# meta month = 2017-01\n# meta country = SG\n"
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tXi\tXi\tPROPN\t_\t_\t2\tnsubj\t_\t_\n"
      "2\tmet\tmeet\tVERB\t_\t_\t0\troot\t_\t_\n"
      "2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n"
      "3\tTrump\tTrump\tPROPN\t_\t_\t2\tobj\t_\t_\n\n");
  const auto ss = read_conllu(in);
  REQUIRE(ss.size() == 1);
  CHECK(ss[0].tokens.size() == 3);
  CHECK(ss[0].doc_id == "a");
  CHECK(ss[0].country == std::optional<std::string>("SG"));

  std::istringstream no_month("# newdoc id = a\n1\tXi\tXi\tPROPN\t_\t_\t0\troot\t_\t_\n\n");
  CHECK_THROWS_AS(read_conllu(no_month), InputError);
  std::istringstream short_row("# newdoc id = a\n# meta month = 2017-01\n1\tXi\tXi\n\n");
  CHECK_THROWS_AS(read_conllu(short_row), InputError);
  std::istringstream bad_month("# newdoc id = a\n# meta month = 2017-1\n");
  CHECK_THROWS_AS(read_conllu(bad_month), InputError);
}

TEST_CASE("fixture directory extracts to the golden corpus") {
  const auto sentences = read_conllu_dir(testing::fixture("conllu"));
  const auto corpus = build_corpus(sentences, aliases(),
                                   {}, AntonymLexicon::read_tsv_file(testing::fixture("antonyms.tsv")));
  std::ostringstream out;
  write_jsonl(out, corpus);
  CHECK(out.str() == testing::slurp(testing::fixture("golden/corpus.jsonl")));

  // Independent spot checks of the hand-annotated trees.
  const auto idx = corpus.indices_of(EntityPair::make("US", "Russia"));
  bool found = false;
  for (std::size_t i : idx) {
    const auto& a = corpus.articles[i];
    if (a.article_id == "now-2016-10-0001") {
      found = true;
      CHECK(a.predicates == std::vector<std::string>{"denounce", "oppose"});
      CHECK(a.country == std::optional<std::string>("US"));
    }
  }
  CHECK(found);
}

TEST_CASE("corpus JSONL round trip is lossless") {
  std::mt19937_64 rng(3);
  auto c = testing::random_corpus(4, 3, 2, 3, 5, 5, rng,
                                  {EntityPair::make("A", "B"), EntityPair::make("C", "A")});
  c.articles[1].country = "SG";
  std::stringstream s;
  write_jsonl(s, c);
  const auto back = read_jsonl(s);
  CHECK(back == c);

  const auto golden = read_jsonl_file(testing::fixture("golden/corpus.jsonl"));
  std::ostringstream again;
  write_jsonl(again, golden);
  CHECK(again.str() == testing::slurp(testing::fixture("golden/corpus.jsonl")));
}

TEST_CASE("corpus validation") {
  CHECK_THROWS_AS(EntityPair::make("US", "US"), InputError);
  CHECK(EntityPair::parse("US,China") == EntityPair::parse("China,US"));
  CHECK(EntityPair::parse("US,China").str() == "China,US");
  std::istringstream mismatch(
      R"({"article_id":"a","pair":["A","B"],"month":"2020-01","month_index":0,"predicates":["x"],"nouns":[],"country":null,"n_tokens":3})"
      "\n"
      R"({"article_id":"b","pair":["A","B"],"month":"2020-02","month_index":0,"predicates":["x"],"nouns":[],"country":null,"n_tokens":3})"
      "\n");
  CHECK_THROWS_AS(read_jsonl(mismatch), InputError);
  std::istringstream unordered(
      R"({"article_id":"a","pair":["B","A"],"month":"2020-01","month_index":0,"predicates":["x"],"nouns":[],"country":null,"n_tokens":3})"
      "\n");
  CHECK_THROWS_AS(read_jsonl(unordered), InputError);
  CHECK_THROWS_AS(read_jsonl_file("/nonexistent/corpus.jsonl"), InputError);
}
