#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relnet/corpus.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/model.hpp"

namespace testing {

inline std::string fixture(const std::string& rel) { return std::string(RELNET_FIXTURES) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("relnet_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

struct RunResult {
  int code = 0;
  std::string output;  // stdout and stderr
};

inline RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + RELNET_CLI + "\" " + args + " 2>&1";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, "popen failed"};
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline relnet::Vector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  relnet::Vector v(n);
  for (double& x : v) x = g(rng);
  return v;
}

/// Random embedding table with tokens p0.. and n0...
inline relnet::EmbeddingTable random_embeddings(std::size_t dim, std::size_t predicates,
                                                std::size_t nouns, std::mt19937_64& rng) {
  relnet::EmbeddingTable t(dim);
  for (std::size_t i = 0; i < predicates; ++i) t.add("p" + std::to_string(i), random_vector(dim, rng));
  for (std::size_t i = 0; i < nouns; ++i) t.add("n" + std::to_string(i), random_vector(dim, rng));
  return t;
}

/// One pair, `months` months, `per_month` articles per month drawing
/// `np` predicates and `nn` nouns from the random table vocabulary.
inline relnet::Corpus random_corpus(std::size_t months, std::size_t per_month, std::size_t np,
                                    std::size_t nn, std::size_t vocab_p, std::size_t vocab_n,
                                    std::mt19937_64& rng,
                                    std::vector<relnet::EntityPair> pairs = {relnet::EntityPair::make("A", "B")}) {
  relnet::Corpus c;
  for (std::size_t t = 0; t < months; ++t) {
    char label[16];
    std::snprintf(label, sizeof label, "2020-%02zu", t + 1);
    c.months.push_back(label);
  }
  std::uniform_int_distribution<std::size_t> up(0, vocab_p - 1), un(0, vocab_n - 1);
  std::size_t id = 0;
  for (const auto& pair : pairs) {
    for (std::size_t t = 0; t < months; ++t) {
      for (std::size_t k = 0; k < per_month; ++k) {
        relnet::AnnotatedArticle a;
        char buf[32];
        std::snprintf(buf, sizeof buf, "doc%05zu", id++);
        a.article_id = buf;
        a.pair = pair;
        a.month = c.months[t];
        a.month_index = static_cast<int>(t);
        for (std::size_t i = 0; i < np; ++i) a.predicates.push_back("p" + std::to_string(up(rng)));
        for (std::size_t i = 0; i < nn; ++i) a.nouns.push_back("n" + std::to_string(un(rng)));
        a.n_tokens = 2 * (np + nn) + 2;
        c.articles.push_back(std::move(a));
      }
    }
  }
  relnet::normalize(c);
  return c;
}

}  // namespace testing
