#include "relnet/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "relnet/error.hpp"

namespace relnet {

std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool EmbeddingTable::add(std::string_view token, std::span<const double> vec) {
  if (vec.size() != dim_) {
    throw InputError("embedding for '" + std::string(token) + "' has dimension " +
                     std::to_string(vec.size()) + ", table has " + std::to_string(dim_));
  }
  auto key = fold_case(token);
  if (by_token_.count(key)) return false;
  values_.insert(values_.end(), vec.begin(), vec.end());
  by_token_.emplace(key, tokens_.size());
  tokens_.push_back(std::move(key));
  return true;
}

std::optional<std::size_t> EmbeddingTable::index(std::string_view token) const {
  auto it = by_token_.find(fold_case(token));
  if (it == by_token_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const double>> EmbeddingTable::lookup(std::string_view token) const {
  auto i = index(token);
  if (!i) return std::nullopt;
  return row(*i);
}

EmbeddingTable load_embeddings(std::istream& in) {
  std::vector<std::string> tokens;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> vec;
    for (std::string f; fields >> f;) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) {
        throw InputError("embeddings line " + std::to_string(line_no) + ": bad number '" + f + "'");
      }
      vec.push_back(v);
    }
    if (tokens.empty()) {
      if (vec.empty()) throw InputError("embeddings line 1: no vector components");
      dim = vec.size();
    } else if (vec.size() != dim) {
      throw InputError("embeddings line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " components, got " + std::to_string(vec.size()));
    }
    tokens.push_back(std::move(token));
    values.insert(values.end(), vec.begin(), vec.end());
  }
  if (tokens.empty()) throw InputError("embedding file is empty");

  EmbeddingTable table(dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    table.add(tokens[i], std::span<const double>(values.data() + i * dim, dim));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings '" + path + "'");
  return load_embeddings(in);
}

void save_embeddings(std::ostream& out, const EmbeddingTable& table) {
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.token(i);
    for (double v : table.row(i)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(p - buf));
    }
    out << '\n';
  }
}

void save_embeddings(const std::string& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write embeddings '" + path + "'");
  save_embeddings(out, table);
}

FrequencyVocab top_k_predicates(const Corpus& corpus, const EmbeddingTable& emb, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& a : corpus.articles) {
    for (const auto& p : a.predicates) {
      if (emb.index(p)) ++counts[fold_case(p)];
    }
  }
  FrequencyVocab vocab(counts.begin(), counts.end());
  std::stable_sort(vocab.begin(), vocab.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  if (vocab.size() > k) vocab.resize(k);
  return vocab;
}

}  // namespace relnet
