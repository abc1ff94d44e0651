#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relnet/corpus.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/tensor.hpp"

namespace relnet {

struct SynthEvent {
  std::size_t month = 0;
  Vector mixture;  // in effect from `month` on
};

struct SynthPair {
  EntityPair pair;
  Vector mixture;  // from month 0
  std::vector<SynthEvent> events;
};

struct SynthRegion {
  std::string name;
  double share = 1.0;
  std::optional<std::size_t> skew_cluster;
  double skew = 0.0;  // mass moved to the cluster from the others, proportionally
};

/// Ground-truth generator settings. Each article picks one true relation
/// (cluster) from its pair's monthly mixture and draws predicates from that
/// cluster with Zipf weights and nouns from the cluster's pool or the
/// generic pool.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t dim = 32;
  std::size_t clusters = 3;
  std::size_t cluster_size = 6;
  std::size_t noun_pool_size = 8;
  std::size_t generic_nouns = 12;
  double generic_noun_prob = 0.4;
  double noise = 0.2;  // within-cluster spread; at most 0.22
  std::size_t months = 30;
  std::string start_month = "2016-01";
  std::size_t articles_per_month = 40;  // per pair
  std::size_t min_predicates = 1, max_predicates = 3;
  std::size_t min_nouns = 2, max_nouns = 5;
  std::vector<SynthPair> pairs;
  std::vector<SynthRegion> regions;

  /// Throws InputError on non-simplex mixtures, out-of-range events, or
  /// geometry that does not fit in `dim`.
  void validate() const;
  static SynthSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SynthTruth {
  std::vector<std::vector<std::string>> cluster_predicates;  // descending frequency
  std::vector<std::vector<std::string>> cluster_nouns;
  std::vector<std::string> generic_nouns;
  std::map<EntityPair, Matrix> mixtures;  // months x clusters, before regional skew
  std::map<EntityPair, std::vector<std::size_t>> event_months;
  std::vector<std::size_t> article_cluster;  // parallel to corpus.articles
  std::vector<std::string> article_region;   // parallel; empty without regions

  nlohmann::json to_json() const;
};

struct SynthOutput {
  Corpus corpus;
  EmbeddingTable embeddings;
  SynthTruth truth;
};

SynthOutput generate(const SynthSpec& spec);

/// Month labels "YYYY-MM" starting at `start`.
std::vector<std::string> month_labels(const std::string& start, std::size_t count);

}  // namespace relnet
