#include "relnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "relnet/error.hpp"
#include "relnet/math.hpp"

namespace relnet {

using nlohmann::json;

std::vector<std::string> month_labels(const std::string& start, std::size_t count) {
  int year = 0, month = 0;
  if (std::sscanf(start.c_str(), "%4d-%2d", &year, &month) != 2 || month < 1 || month > 12) {
    throw InputError("start month must be YYYY-MM, got '" + start + "'");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    out.emplace_back(buf);
    if (++month > 12) {
      month = 1;
      ++year;
    }
  }
  return out;
}

namespace {

void check_simplex(const Vector& m, std::size_t k, const std::string& what) {
  if (m.size() != k) {
    throw InputError(what + " has " + std::to_string(m.size()) + " weights for " +
                     std::to_string(k) + " clusters");
  }
  double s = 0.0;
  for (double v : m) {
    if (!(v >= 0.0)) throw InputError(what + " has a negative weight");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw InputError(what + " does not sum to 1");
}

}  // namespace

void SynthSpec::validate() const {
  if (clusters == 0 || cluster_size == 0 || months == 0 || articles_per_month == 0) {
    throw InputError("synthetic spec needs clusters, predicates, months and articles");
  }
  if (min_predicates == 0 || min_predicates > max_predicates || min_nouns > max_nouns) {
    throw InputError("bad per-article predicate/noun ranges");
  }
  if (noun_pool_size == 0 && generic_nouns == 0 && max_nouns > 0) {
    throw InputError("nouns requested but no noun pools configured");
  }
  if (!(noise >= 0.0 && noise <= 0.22)) {
    throw InputError("noise must lie in [0, 0.22] to keep within-cluster cosine above 0.9");
  }
  // One orthogonal direction per predicate cluster, per noun pool, plus generic nouns.
  const std::size_t directions = 2 * clusters + 1;
  if (directions > dim) {
    throw InputError("infeasible geometry: " + std::to_string(clusters) + " clusters need " +
                     std::to_string(directions) + " orthogonal directions but dim is " +
                     std::to_string(dim));
  }
  if (pairs.empty()) throw InputError("synthetic spec has no pairs");
  std::set<EntityPair> seen;
  for (const auto& p : pairs) {
    if (!seen.insert(p.pair).second) throw InputError("duplicate pair '" + p.pair.str() + "'");
    check_simplex(p.mixture, clusters, "mixture of " + p.pair.str());
    for (const auto& e : p.events) {
      if (e.month >= months) {
        throw InputError("event month " + std::to_string(e.month) + " of " + p.pair.str() +
                         " outside [0, " + std::to_string(months) + ")");
      }
      check_simplex(e.mixture, clusters, "event mixture of " + p.pair.str());
    }
  }
  for (const auto& r : regions) {
    if (!(r.share > 0.0)) throw InputError("region '" + r.name + "' needs a positive share");
    if (r.skew_cluster && *r.skew_cluster >= clusters) {
      throw InputError("region '" + r.name + "' skews a cluster that does not exist");
    }
    if (!(r.skew >= 0.0 && r.skew <= 1.0)) throw InputError("region skew must lie in [0, 1]");
  }
}

SynthSpec SynthSpec::from_json(const json& j) {
  try {
    SynthSpec s;
    s.seed = j.value("seed", s.seed);
    s.dim = j.value("dim", s.dim);
    s.clusters = j.value("clusters", s.clusters);
    s.cluster_size = j.value("cluster_size", s.cluster_size);
    s.noun_pool_size = j.value("noun_pool_size", s.noun_pool_size);
    s.generic_nouns = j.value("generic_nouns", s.generic_nouns);
    s.generic_noun_prob = j.value("generic_noun_prob", s.generic_noun_prob);
    s.noise = j.value("noise", s.noise);
    s.months = j.value("months", s.months);
    s.start_month = j.value("start_month", s.start_month);
    s.articles_per_month = j.value("articles_per_month", s.articles_per_month);
    if (j.contains("predicates_per_article")) {
      s.min_predicates = j["predicates_per_article"].at(0);
      s.max_predicates = j["predicates_per_article"].at(1);
    }
    if (j.contains("nouns_per_article")) {
      s.min_nouns = j["nouns_per_article"].at(0);
      s.max_nouns = j["nouns_per_article"].at(1);
    }
    for (const auto& p : j.at("pairs")) {
      SynthPair sp;
      sp.pair = EntityPair::make(p.at("pair").at(0), p.at("pair").at(1));
      sp.mixture = p.at("mixture").get<Vector>();
      for (const auto& e : p.value("events", json::array())) {
        sp.events.push_back({e.at("month").get<std::size_t>(), e.at("mixture").get<Vector>()});
      }
      std::sort(sp.events.begin(), sp.events.end(),
                [](const auto& a, const auto& b) { return a.month < b.month; });
      s.pairs.push_back(std::move(sp));
    }
    for (const auto& r : j.value("regions", json::array())) {
      SynthRegion sr;
      sr.name = r.at("name");
      sr.share = r.value("share", 1.0);
      if (r.contains("skew_cluster")) sr.skew_cluster = r["skew_cluster"].get<std::size_t>();
      sr.skew = r.value("skew", 0.0);
      s.regions.push_back(std::move(sr));
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed synthetic spec: ") + e.what());
  }
}

json SynthSpec::to_json() const {
  json j;
  j["seed"] = seed;
  j["dim"] = dim;
  j["clusters"] = clusters;
  j["cluster_size"] = cluster_size;
  j["noun_pool_size"] = noun_pool_size;
  j["generic_nouns"] = generic_nouns;
  j["generic_noun_prob"] = generic_noun_prob;
  j["noise"] = noise;
  j["months"] = months;
  j["start_month"] = start_month;
  j["articles_per_month"] = articles_per_month;
  j["predicates_per_article"] = {min_predicates, max_predicates};
  j["nouns_per_article"] = {min_nouns, max_nouns};
  j["pairs"] = json::array();
  for (const auto& p : pairs) {
    json e = json::array();
    for (const auto& ev : p.events) e.push_back({{"month", ev.month}, {"mixture", ev.mixture}});
    j["pairs"].push_back(
        {{"pair", {p.pair.first, p.pair.second}}, {"mixture", p.mixture}, {"events", e}});
  }
  j["regions"] = json::array();
  for (const auto& r : regions) {
    json rj{{"name", r.name}, {"share", r.share}, {"skew", r.skew}};
    if (r.skew_cluster) rj["skew_cluster"] = *r.skew_cluster;
    j["regions"].push_back(rj);
  }
  return j;
}

json SynthTruth::to_json() const {
  json j;
  j["cluster_predicates"] = cluster_predicates;
  j["cluster_nouns"] = cluster_nouns;
  j["generic_nouns"] = generic_nouns;
  j["pairs"] = json::array();
  for (const auto& [pair, m] : mixtures) {
    json rows = json::array();
    for (std::size_t t = 0; t < m.rows(); ++t) {
      rows.push_back(std::vector<double>(m.row(t).begin(), m.row(t).end()));
    }
    j["pairs"].push_back({{"pair", {pair.first, pair.second}},
                          {"mixtures", rows},
                          {"event_months", event_months.at(pair)}});
  }
  j["article_cluster"] = article_cluster;
  j["article_region"] = article_region;
  return j;
}

namespace {

// Orthonormal directions by Gram-Schmidt over Gaussian draws.
std::vector<Vector> orthonormal_basis(std::size_t count, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> basis;
  while (basis.size() < count) {
    Vector v(dim);
    for (double& x : v) x = gauss(rng);
    for (const auto& b : basis) simd::axpy(-simd::dot(v, b), b, v);
    const double n = norm(v);
    if (n < 1e-6) continue;
    for (double& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

// normalize(u + noise * z), z a random unit vector orthogonal to u.
Vector perturbed(const Vector& u, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector z(u.size());
  double n = 0.0;
  do {
    for (double& x : z) x = gauss(rng);
    simd::axpy(-simd::dot(z, u), u, z);
    n = norm(z);
  } while (n < 1e-9);
  Vector v = u;
  simd::axpy(noise / n, z, v);
  const double vn = norm(v);
  for (double& x : v) x /= vn;
  return v;
}

std::string word(const char* stem, std::size_t a, std::size_t b) {
  return std::string(stem) + std::to_string(a) + "_" + std::to_string(b);
}

}  // namespace

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SynthOutput out;
  out.embeddings = EmbeddingTable(spec.dim);
  auto& truth = out.truth;

  const auto basis = orthonormal_basis(2 * spec.clusters + 1, spec.dim, rng);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    std::vector<std::string> preds, nouns;
    for (std::size_t j = 0; j < spec.cluster_size; ++j) {
      preds.push_back(word("rel", c, j));
      out.embeddings.add(preds.back(), perturbed(basis[c], spec.noise, rng));
    }
    for (std::size_t j = 0; j < spec.noun_pool_size; ++j) {
      nouns.push_back(word("ctx", c, j));
      out.embeddings.add(nouns.back(), perturbed(basis[spec.clusters + c], spec.noise, rng));
    }
    truth.cluster_predicates.push_back(std::move(preds));
    truth.cluster_nouns.push_back(std::move(nouns));
  }
  for (std::size_t j = 0; j < spec.generic_nouns; ++j) {
    truth.generic_nouns.push_back("gen" + std::to_string(j));
    out.embeddings.add(truth.generic_nouns.back(),
                       perturbed(basis[2 * spec.clusters], 0.6, rng));
  }

  // Zipf weights inside each cluster, so earlier lemmas are more frequent.
  Vector zipf(spec.cluster_size);
  for (std::size_t j = 0; j < zipf.size(); ++j) zipf[j] = 1.0 / static_cast<double>(j + 1);
  std::discrete_distribution<std::size_t> pick_pred(zipf.begin(), zipf.end());
  std::uniform_int_distribution<std::size_t> n_pred(spec.min_predicates, spec.max_predicates);
  std::uniform_int_distribution<std::size_t> n_noun(spec.min_nouns, spec.max_nouns);
  std::bernoulli_distribution generic(spec.noun_pool_size == 0 ? 1.0
                                      : spec.generic_nouns == 0 ? 0.0
                                                                : spec.generic_noun_prob);
  std::vector<double> shares;
  for (const auto& r : spec.regions) shares.push_back(r.share);
  std::discrete_distribution<std::size_t> pick_region(shares.begin(), shares.end());

  out.corpus.months = month_labels(spec.start_month, spec.months);
  auto pairs = spec.pairs;
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.pair < b.pair; });

  char id[96];
  for (const auto& p : pairs) {
    Matrix mix(spec.months, spec.clusters);
    std::vector<std::size_t> events;
    for (const auto& e : p.events) events.push_back(e.month);
    Vector current = p.mixture;
    std::size_t next_event = 0;
    for (std::size_t t = 0; t < spec.months; ++t) {
      while (next_event < p.events.size() && p.events[next_event].month == t) {
        current = p.events[next_event++].mixture;
      }
      std::copy(current.begin(), current.end(), mix.row(t).begin());
      for (std::size_t n = 0; n < spec.articles_per_month; ++n) {
        Vector m = current;
        std::optional<std::size_t> region;
        if (!spec.regions.empty()) {
          region = pick_region(rng);
          const auto& r = spec.regions[*region];
          if (r.skew_cluster) {
            // Shift `skew` of probability mass to the cluster, taken
            // proportionally from the others.
            double& a = m[*r.skew_cluster];
            const double target = std::min(1.0, a + r.skew);
            const double rest = 1.0 - a;
            for (double& v : m) v = rest > 0.0 ? v * (1.0 - target) / rest : 0.0;
            a = target;
          }
        }
        std::discrete_distribution<std::size_t> pick_cluster(m.begin(), m.end());
        const std::size_t c = pick_cluster(rng);

        AnnotatedArticle a;
        std::snprintf(id, sizeof id, "%s-%s-m%03zu-a%04zu", p.pair.first.c_str(),
                      p.pair.second.c_str(), t, n);
        a.article_id = id;
        a.pair = p.pair;
        a.month = out.corpus.months[t];
        a.month_index = static_cast<int>(t);
        const std::size_t np = n_pred(rng);
        for (std::size_t k = 0; k < np; ++k) {
          a.predicates.push_back(truth.cluster_predicates[c][pick_pred(rng)]);
        }
        const std::size_t nn = n_noun(rng);
        for (std::size_t k = 0; k < nn; ++k) {
          if (generic(rng)) {
            std::uniform_int_distribution<std::size_t> g(0, spec.generic_nouns - 1);
            a.nouns.push_back(truth.generic_nouns[g(rng)]);
          } else {
            std::uniform_int_distribution<std::size_t> g(0, spec.noun_pool_size - 1);
            a.nouns.push_back(truth.cluster_nouns[c][g(rng)]);
          }
        }
        // Predicates, nouns, both entity mentions, and a little filler.
        a.n_tokens = 2 * (np + nn) + 2;
        if (region) a.country = spec.regions[*region].name;
        out.corpus.articles.push_back(std::move(a));
        truth.article_cluster.push_back(c);
        if (region) truth.article_region.push_back(spec.regions[*region].name);
      }
    }
    truth.mixtures.emplace(p.pair, std::move(mix));
    truth.event_months.emplace(p.pair, std::move(events));
  }
  return out;
}

}  // namespace relnet
