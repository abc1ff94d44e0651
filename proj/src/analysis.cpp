#include "relnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>

#include "relnet/error.hpp"
#include "relnet/math.hpp"

namespace relnet {

const Matrix& relation_matrix(const AnyModel& model) {
  return std::visit([](const auto& m) -> const Matrix& { return m.t.relations; }, model);
}

std::size_t relation_count(const AnyModel& model) { return relation_matrix(model).rows(); }

ArticleDistributions infer_distributions(const AnyModel& model, const Corpus& corpus,
                                         const EmbeddingTable& emb) {
  ArticleDistributions out(corpus.articles.size());
  if (const auto* larn = std::get_if<ModelParams>(&model)) {
    for (const auto& enc : encode_corpus(corpus, larn->config, larn->index, emb)) {
      out[enc.article] = larn_forward(larn->t, larn->config, enc, emb).dist;
    }
  } else {
    const auto& rmn = std::get<RmnParams>(model);
    const auto encoded = rmn_encode_corpus(corpus, rmn, emb);
    const auto dists = rmn_infer(corpus, encoded, rmn, emb);
    for (std::size_t i = 0; i < encoded.size(); ++i) out[encoded[i].article] = dists[i];
  }
  return out;
}

DescriptorSet descriptors(const Matrix& relations, const FrequencyVocab& vocab,
                          const EmbeddingTable& emb, const ArticleDistributions& dists,
                          std::size_t top) {
  if (vocab.empty()) throw InputError("descriptor vocabulary is empty");
  std::vector<std::span<const double>> vectors;
  for (const auto& [token, _] : vocab) {
    auto v = emb.lookup(token);
    if (!v) throw InputError("vocabulary token '" + token + "' has no embedding");
    vectors.push_back(*v);
  }

  DescriptorSet out(relations.rows());
  std::size_t inferred = 0;
  for (const auto& d : dists) {
    if (!d) continue;
    ++inferred;
    for (std::size_t k = 0; k < out.size(); ++k) out[k].avg_weight += (*d)[k];
  }
  for (auto& desc : out) {
    if (inferred > 0) desc.avg_weight /= static_cast<double>(inferred);
  }

  for (std::size_t k = 0; k < relations.rows(); ++k) {
    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t w = 0; w < vocab.size(); ++w) {
      scored.emplace_back(vocab[w].first, cosine(relations.row(k), vectors[w]));
    }
    const std::size_t n = std::min(top, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                      [](const auto& a, const auto& b) {
                        if (a.second != b.second) return a.second > b.second;
                        return a.first < b.first;
                      });
    scored.resize(n);
    out[k].words = std::move(scored);
  }
  return out;
}

std::vector<std::size_t> TrendSeries::top(std::size_t n) const {
  std::vector<std::size_t> idx(overall.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return overall[a] > overall[b]; });
  if (idx.size() > n) idx.resize(n);
  return idx;
}

namespace {

// Accumulates per-article vectors into monthly means for one pair.
class MonthlyMean {
 public:
  MonthlyMean(std::size_t series, std::size_t months)
      : sum_(series, months), counts_(months, 0), total_(series, 0.0) {}

  void add(std::size_t month, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum_(i, month) += values[i];
      total_[i] += values[i];
    }
    ++counts_[month];
    ++n_;
  }

  void finish(TrendSeries& s) {
    for (std::size_t i = 0; i < sum_.rows(); ++i) {
      for (std::size_t t = 0; t < sum_.cols(); ++t) {
        if (counts_[t] > 0) sum_(i, t) /= static_cast<double>(counts_[t]);
      }
      if (n_ > 0) total_[i] /= static_cast<double>(n_);
    }
    s.mean = std::move(sum_);
    s.counts = std::move(counts_);
    s.overall = std::move(total_);
  }

  std::size_t articles() const { return n_; }

 private:
  Matrix sum_;
  std::vector<std::size_t> counts_;
  Vector total_;
  std::size_t n_ = 0;
};

}  // namespace

TrendSeries trend(const Corpus& corpus, const EntityPair& pair, const ArticleDistributions& dists) {
  const auto idx = corpus.indices_of(pair);
  if (idx.empty()) throw InputError("pair '" + pair.str() + "' not in corpus");
  std::size_t k = 0;
  for (std::size_t i : idx) {
    if (dists.at(i)) k = dists[i]->size();
  }
  if (k == 0) throw InputError("pair '" + pair.str() + "' has no inferable article");

  TrendSeries s;
  s.pair = pair;
  s.months = corpus.months;
  for (std::size_t r = 0; r < k; ++r) s.names.push_back(std::to_string(r));
  MonthlyMean acc(k, corpus.month_count());
  for (std::size_t i : idx) {
    if (dists[i]) acc.add(static_cast<std::size_t>(corpus.articles[i].month_index), *dists[i]);
  }
  acc.finish(s);
  return s;
}

std::optional<std::size_t> ChangeRateReport::argmax() const {
  std::optional<std::size_t> best;
  for (std::size_t t = 0; t < delta.size(); ++t) {
    if (delta[t] && (!best || *delta[t] > *delta[*best])) best = t;
  }
  return best;
}

ChangeRateReport change_rate(const TrendSeries& s, std::size_t window, std::size_t top_n) {
  const std::size_t months = s.month_count();
  if (window == 0 || window >= months) {
    throw InputError("window " + std::to_string(window) + " must be in [1, " +
                     std::to_string(months) + ")");
  }
  ChangeRateReport r;
  r.window = window;
  r.top = s.top(top_n);
  r.months = s.months;
  r.delta.assign(months, std::nullopt);

  for (std::size_t t = window; t < months; ++t) {
    if (!s.present(t)) continue;
    // Running mean over the window, so a constant window reproduces its
    // value exactly.
    std::size_t present = 0;
    Vector prev(r.top.size(), 0.0);
    for (std::size_t w = 1; w <= window; ++w) {
      if (!s.present(t - w)) continue;
      ++present;
      for (std::size_t j = 0; j < r.top.size(); ++j) {
        prev[j] += (s.mean(r.top[j], t - w) - prev[j]) / static_cast<double>(present);
      }
    }
    if (present == 0) continue;
    double weight_sum = 0.0;
    for (std::size_t j = 0; j < r.top.size(); ++j) {
      if (prev[j] > 0.0) weight_sum += s.mean(r.top[j], t);
    }
    if (!(weight_sum > 0.0)) continue;
    double delta = 0.0;
    for (std::size_t j = 0; j < r.top.size(); ++j) {
      if (!(prev[j] > 0.0)) continue;
      const double cur = s.mean(r.top[j], t);
      delta += (cur / weight_sum) * std::abs(cur - prev[j]) / prev[j];
    }
    r.delta[t] = delta;
  }
  return r;
}

Alignment key_event_alignment(const ChangeRateReport& report,
                              const std::set<std::size_t>& key_months) {
  double key_sum = 0.0, other_sum = 0.0;
  std::size_t key_n = 0, other_n = 0;
  for (std::size_t t = 0; t < report.delta.size(); ++t) {
    if (!report.delta[t]) continue;
    if (key_months.count(t)) {
      key_sum += *report.delta[t];
      ++key_n;
    } else {
      other_sum += *report.delta[t];
      ++other_n;
    }
  }
  if (key_n == 0) throw InputError("no key-event month has a defined change rate");
  if (other_n == 0) throw InputError("every month with a defined change rate is a key-event month");
  Alignment a;
  a.key_mean = key_sum / static_cast<double>(key_n);
  a.other_mean = other_sum / static_cast<double>(other_n);
  if (a.other_mean == 0.0) throw InputError("change rate of non-key months is zero");
  a.relative_difference = (a.key_mean - a.other_mean) / a.other_mean;
  return a;
}

void annotate_key_events(ChangeRateReport& report, const std::set<std::size_t>& key_months) {
  report.key_months = key_months;
  const auto a = key_event_alignment(report, key_months);
  report.key_mean = a.key_mean;
  report.other_mean = a.other_mean;
  report.relative_difference = a.relative_difference;
}

Alignment pooled_alignment(const std::vector<Alignment>& per_pair) {
  if (per_pair.empty()) throw InputError("no pairs to pool");
  Alignment out;
  for (const auto& a : per_pair) {
    out.key_mean += a.key_mean;
    out.other_mean += a.other_mean;
  }
  out.key_mean /= static_cast<double>(per_pair.size());
  out.other_mean /= static_cast<double>(per_pair.size());
  if (out.other_mean == 0.0) throw InputError("pooled change rate of non-key months is zero");
  out.relative_difference = (out.key_mean - out.other_mean) / out.other_mean;
  return out;
}

namespace {

ContextRanking rank(const std::vector<std::string>& words, const Matrix& monthly,
                    const Vector& overall, std::size_t top_n) {
  std::vector<std::size_t> idx(words.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (overall[a] != overall[b]) return overall[a] > overall[b];
    return words[a] < words[b];
  });
  if (idx.size() > top_n) idx.resize(top_n);
  ContextRanking r;
  r.scores = Matrix(idx.size(), monthly.cols());
  double mx = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    r.words.push_back(words[idx[i]]);
    for (std::size_t t = 0; t < monthly.cols(); ++t) {
      r.scores(i, t) = monthly(idx[i], t);
      mx = std::max(mx, r.scores(i, t));
    }
  }
  r.degenerate = !(mx > 0.0);
  if (!r.degenerate) {
    for (double& v : r.scores.flat()) v /= mx;
  }
  return r;
}

}  // namespace

ContextWords context_words(const Corpus& corpus, const EntityPair& pair, std::size_t relation,
                           const ModelParams& params, const EmbeddingTable& emb, double fraction,
                           std::size_t top_n) {
  if (relation >= params.config.relations) {
    throw InputError("relation " + std::to_string(relation) + " out of range");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("fraction must lie in (0, 1]");
  const auto idx = corpus.indices_of(pair);
  if (idx.empty()) throw InputError("pair '" + pair.str() + "' not in corpus");

  struct Scored {
    EncodedArticle enc;
    LarnForward fwd;
  };
  std::vector<Scored> scored;
  for (std::size_t i : idx) {
    if (auto enc = encode_article(corpus, i, params.config, params.index, emb)) {
      auto fwd = larn_forward(params.t, params.config, *enc, emb);
      scored.push_back({std::move(*enc), std::move(fwd)});
    }
  }
  if (scored.empty()) throw InputError("no qualifying articles for pair '" + pair.str() + "'");
  std::stable_sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
    return a.fwd.dist[relation] > b.fwd.dist[relation];
  });
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(scored.size()))));
  scored.resize(std::min(keep, scored.size()));

  std::map<std::string, std::size_t> word_index;
  for (const auto& s : scored) {
    for (std::size_t row : s.enc.nouns) word_index.emplace(emb.token(row), 0);
  }
  if (word_index.empty()) throw InputError("selected articles have no embedded nouns");
  std::vector<std::string> words;
  for (auto& [w, i] : word_index) {
    i = words.size();
    words.push_back(w);
  }

  const std::size_t months = corpus.month_count();
  Matrix alpha_sum(words.size(), months), count(words.size(), months);
  ContextWords out;
  out.relation = relation;
  for (const auto& s : scored) {
    out.articles.push_back(s.enc.article);
    for (std::size_t k = 0; k < s.enc.nouns.size(); ++k) {
      const std::size_t w = word_index[emb.token(s.enc.nouns[k])];
      alpha_sum(w, s.enc.month) += s.fwd.alpha[k];
      count(w, s.enc.month) += 1.0;
    }
  }

  Matrix mean_alpha(words.size(), months), combined(words.size(), months);
  Vector overall_alpha(words.size()), overall_count(words.size()), overall_combined(words.size());
  for (std::size_t w = 0; w < words.size(); ++w) {
    double a = 0.0, c = 0.0;
    for (std::size_t t = 0; t < months; ++t) {
      if (count(w, t) > 0.0) {
        mean_alpha(w, t) = alpha_sum(w, t) / count(w, t);
        combined(w, t) = mean_alpha(w, t) * std::log(count(w, t));
      }
      a += alpha_sum(w, t);
      c += count(w, t);
    }
    overall_alpha[w] = a / c;
    overall_count[w] = c;
    overall_combined[w] = overall_alpha[w] * std::log(c);
  }
  out.attention = rank(words, mean_alpha, overall_alpha, top_n);
  out.frequency = rank(words, count, overall_count, top_n);
  out.combined = rank(words, combined, overall_combined, top_n);
  return out;
}

RegionalDiff regional_diff(const Corpus& corpus, const EntityPair& pair,
                           const ArticleDistributions& dists,
                           std::optional<std::pair<std::string, std::string>> regions) {
  const auto idx = corpus.indices_of(pair);
  if (idx.empty()) throw InputError("pair '" + pair.str() + "' not in corpus");
  std::map<std::string, std::pair<Vector, std::size_t>> by_region;
  for (std::size_t i : idx) {
    const auto& a = corpus.articles[i];
    if (!a.country || !dists.at(i)) continue;
    auto& [sum, n] = by_region[*a.country];
    if (sum.empty()) sum.assign(dists[i]->size(), 0.0);
    simd::axpy(1.0, *dists[i], sum);
    ++n;
  }
  if (by_region.size() < 2) {
    throw InputError("pair '" + pair.str() + "' has articles from fewer than two regions");
  }
  if (!regions) {
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (const auto& [name, v] : by_region) ranked.emplace_back(name, v.second);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    regions = std::pair{ranked[0].first, ranked[1].first};
  }
  auto it_a = by_region.find(regions->first);
  auto it_b = by_region.find(regions->second);
  if (it_a == by_region.end() || it_b == by_region.end() || regions->first == regions->second) {
    throw InputError("regions '" + regions->first + "' and '" + regions->second +
                     "' must be two distinct regions with articles");
  }
  RegionalDiff out;
  out.region_a = regions->first;
  out.region_b = regions->second;
  out.articles_a = it_a->second.second;
  out.articles_b = it_b->second.second;
  const auto& sa = it_a->second.first;
  const auto& sb = it_b->second.first;
  for (std::size_t k = 0; k < sa.size(); ++k) {
    RegionalRow row;
    row.relation = k;
    row.weight_a = sa[k] / static_cast<double>(out.articles_a);
    row.weight_b = sb[k] / static_cast<double>(out.articles_b);
    row.diff = row.weight_a - row.weight_b;
    out.rows.push_back(row);
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
    return std::abs(a.diff) > std::abs(b.diff);
  });
  return out;
}

TrendSeries tf_baseline_trend(const Corpus& corpus, const EntityPair& pair) {
  const auto idx = corpus.indices_of(pair);
  if (idx.empty()) throw InputError("pair '" + pair.str() + "' not in corpus");
  std::map<std::string, std::size_t> lemma_index;
  for (std::size_t i : idx) {
    for (const auto& p : corpus.articles[i].predicates) lemma_index.emplace(p, 0);
  }
  TrendSeries s;
  s.pair = pair;
  s.months = corpus.months;
  for (auto& [lemma, i] : lemma_index) {
    i = s.names.size();
    s.names.push_back(lemma);
  }
  MonthlyMean acc(s.names.size(), corpus.month_count());
  Vector tf(s.names.size());
  for (std::size_t i : idx) {
    const auto& a = corpus.articles[i];
    if (a.n_tokens == 0) throw InputError("article '" + a.article_id + "' has no token count");
    std::fill(tf.begin(), tf.end(), 0.0);
    for (const auto& p : a.predicates) tf[lemma_index[p]] += 1.0;
    for (double& v : tf) v /= static_cast<double>(a.n_tokens);
    acc.add(static_cast<std::size_t>(a.month_index), tf);
  }
  acc.finish(s);
  return s;
}

std::vector<KeyEvent> read_key_events(std::istream& in) {
  static const std::regex month_re(R"(\d{4}-(0[1-9]|1[0-2]))");
  std::vector<KeyEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw InputError("key events line " + std::to_string(line_no) +
                       ": expected pair<TAB>YYYY-MM<TAB>description");
    }
    KeyEvent e;
    e.pair = EntityPair::parse(line.substr(0, t1));
    e.month = line.substr(t1 + 1, t2 - t1 - 1);
    if (!std::regex_match(e.month, month_re)) {
      throw InputError("key events line " + std::to_string(line_no) + ": bad month '" + e.month + "'");
    }
    e.description = line.substr(t2 + 1);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<KeyEvent> read_key_events_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open key events '" + path + "'");
  return read_key_events(in);
}

std::set<std::size_t> key_months_for(const std::vector<KeyEvent>& events, const EntityPair& pair,
                                     const Corpus& corpus) {
  std::set<std::size_t> out;
  for (const auto& e : events) {
    if (e.pair != pair) continue;
    if (auto t = corpus.month_index(e.month)) out.insert(static_cast<std::size_t>(*t));
  }
  return out;
}

}  // namespace relnet
