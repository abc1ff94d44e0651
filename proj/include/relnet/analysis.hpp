#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "relnet/corpus.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/model.hpp"
#include "relnet/rmn.hpp"

namespace relnet {

using AnyModel = std::variant<ModelParams, RmnParams>;

const Matrix& relation_matrix(const AnyModel& model);
std::size_t relation_count(const AnyModel& model);

/// Inference-mode distribution for every corpus article, or nullopt where
/// the article has no embedded predicate.
using ArticleDistributions = std::vector<std::optional<RelationDistribution>>;
ArticleDistributions infer_distributions(const AnyModel& model, const Corpus& corpus,
                                         const EmbeddingTable& emb);

// --- Descriptors -----------------------------------------------------------

struct Descriptor {
  std::vector<std::pair<std::string, double>> words;  // by descending cosine
  double avg_weight = 0.0;
};
using DescriptorSet = std::vector<Descriptor>;

/// Nearest vocabulary words (cosine) of every relation row plus its mean
/// weight over all inferred articles.
DescriptorSet descriptors(const Matrix& relations, const FrequencyVocab& vocab,
                          const EmbeddingTable& emb, const ArticleDistributions& dists,
                          std::size_t top = 5);

// --- Trends and change rate --------------------------------------------------

/// Monthly means of a family of series for one pair. Series are relations
/// for model trends and predicates for the term-frequency baseline.
struct TrendSeries {
  EntityPair pair;
  std::vector<std::string> names;      // one per series
  std::vector<std::string> months;     // labels, one per month
  Matrix mean;                         // series x months; meaningless where count == 0
  std::vector<std::size_t> counts;     // articles per month
  Vector overall;                      // mean over all of the pair's articles

  std::size_t month_count() const { return counts.size(); }
  bool present(std::size_t t) const { return counts[t] > 0; }
  /// Indices of the n series with the highest overall mean (ties: lower index).
  std::vector<std::size_t> top(std::size_t n) const;
};

TrendSeries trend(const Corpus& corpus, const EntityPair& pair, const ArticleDistributions& dists);

struct ChangeRateReport {
  std::size_t window = 6;
  std::vector<std::size_t> top;               // series the rate is computed over
  std::vector<std::optional<double>> delta;   // per month
  std::vector<std::string> months;
  std::set<std::size_t> key_months;
  std::optional<double> key_mean;
  std::optional<double> other_mean;
  std::optional<double> relative_difference;

  /// Month with the largest defined delta (earliest on ties).
  std::optional<std::size_t> argmax() const;
};

/// delta_t = sum_i w_ti |d_ti - p_ti| / p_ti over the top series, with p_ti
/// the mean of the W preceding months (months without articles excluded)
/// and w_ti = d_ti / sum_j d_tj. A series whose p_ti is 0 is skipped and
/// the weights renormalized over the rest.
ChangeRateReport change_rate(const TrendSeries& series, std::size_t window = 6,
                             std::size_t top_n = 3);

struct Alignment {
  double key_mean = 0.0;
  double other_mean = 0.0;
  double relative_difference = 0.0;  // (key - other) / other
};

/// Means of the defined deltas over key months and over all other months.
/// Key months without a defined delta are ignored. Throws InputError if
/// either side is empty or the other-month mean is zero.
Alignment key_event_alignment(const ChangeRateReport& report, const std::set<std::size_t>& key_months);
/// Fills the report's key-event fields in place.
void annotate_key_events(ChangeRateReport& report, const std::set<std::size_t>& key_months);
/// Macro average of per-pair alignments.
Alignment pooled_alignment(const std::vector<Alignment>& per_pair);

// --- Context words -----------------------------------------------------------

struct ContextRanking {
  std::vector<std::string> words;  // top words by overall score
  Matrix scores;                   // words x months, divided by the matrix maximum
  bool degenerate = false;         // maximum was not positive
};

struct ContextWords {
  std::size_t relation = 0;
  std::vector<std::size_t> articles;  // corpus indices of the selected articles
  ContextRanking attention;           // mean attention per month
  ContextRanking frequency;           // occurrences per month
  ContextRanking combined;            // mean attention * log(occurrences)
};

/// Over the pair's articles in the top `fraction` by weight on `relation`.
ContextWords context_words(const Corpus& corpus, const EntityPair& pair, std::size_t relation,
                           const ModelParams& params, const EmbeddingTable& emb,
                           double fraction = 0.1, std::size_t top_n = 10);

// --- Regional differences ----------------------------------------------------

struct RegionalRow {
  std::size_t relation = 0;
  double weight_a = 0.0;
  double weight_b = 0.0;
  double diff = 0.0;  // weight_a - weight_b
};

struct RegionalDiff {
  std::string region_a;
  std::string region_b;
  std::size_t articles_a = 0;
  std::size_t articles_b = 0;
  std::vector<RegionalRow> rows;  // descending |diff|
};

/// Mean relation weights per source region. Without explicit regions the
/// two with the most articles are compared.
RegionalDiff regional_diff(const Corpus& corpus, const EntityPair& pair,
                           const ArticleDistributions& dists,
                           std::optional<std::pair<std::string, std::string>> regions = {});

// --- Term-frequency baseline ---------------------------------------------------

/// Monthly mean of count(p) / n_tokens per predicate of the pair.
TrendSeries tf_baseline_trend(const Corpus& corpus, const EntityPair& pair);

// --- Key-event fixtures ----------------------------------------------------------

struct KeyEvent {
  EntityPair pair;
  std::string month;
  std::string description;
};

/// "A,B<TAB>YYYY-MM<TAB>description" per line; '#' lines are comments.
std::vector<KeyEvent> read_key_events(std::istream& in);
std::vector<KeyEvent> read_key_events_file(const std::string& path);
/// Month indices of the pair's events that fall inside the corpus.
std::set<std::size_t> key_months_for(const std::vector<KeyEvent>& events, const EntityPair& pair,
                                     const Corpus& corpus);

}  // namespace relnet
