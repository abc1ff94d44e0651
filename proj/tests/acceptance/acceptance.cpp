// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "relnet/analysis.hpp"
#include "relnet/annotate.hpp"
#include "relnet/conllu.hpp"
#include "relnet/math.hpp"
#include "relnet/synth.hpp"
#include "relnet/training.hpp"

using namespace relnet;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SynthOutput synth_fixture(const std::string& name) {
  std::ifstream in(testing::fixture("synth/" + name));
  return generate(SynthSpec::from_json(nlohmann::json::parse(in)));
}

// Default training, except K = 5 relations.
ModelParams train_default(const SynthOutput& s) {
  ModelConfig mc;
  mc.relations = 5;
  mc.word_dim = s.embeddings.dim();
  mc.months = std::max<std::size_t>(mc.months, s.corpus.month_count());
  TrainConfig tc;
  return train(s.corpus, s.embeddings, mc, tc).params;
}

// --- 1 ------------------------------------------------------------------------------
Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0;
  bool every_tensor_checked = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const auto emb = testing::random_embeddings(8, 6, 6, rng);
    const auto corpus = testing::random_corpus(2, 1, 3, 4, 6, 6, rng);
    ModelConfig mc;
    mc.relations = 3;
    mc.word_dim = 8;
    mc.entity_dim = 4;
    mc.months = 2;
    mc.final_dim = 6;
    mc.dropout = 0.0;
    const auto params = init_params(mc, ModelIndex::from_corpus(corpus), rng);
    const auto enc = encode_corpus(corpus, mc, params.index, emb);
    const std::vector<Vector> negs{testing::random_vector(8, rng), testing::random_vector(8, rng)};
    const auto report = grad_check(params, enc.at(0), emb, negs, 0.1);
    for (const auto& t : report.tensors) {
      worst = std::max(worst, t.max_rel_error);
      checked += t.checked;
      every_tensor_checked = every_tensor_checked && t.checked > 0;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0 && every_tensor_checked,
          "max rel error " + fmt("%.3g", worst) + " over " + std::to_string(checked) +
              " coordinates in 10 instances, " + fmt("%.2f", secs) + " s"};
}

// --- 2 ------------------------------------------------------------------------------
Outcome simplex_invariants() {
  std::size_t passes = 0;
  double worst = 0.0;
  bool nonneg = true;
  const auto check = [&](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
      nonneg = nonneg && x >= 0.0;
      s += x;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  };
  for (std::uint64_t seed = 0; passes < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    const auto emb = testing::random_embeddings(8, 8, 8, rng);
    const auto corpus = testing::random_corpus(3, 4, 3, 5, 8, 8, rng);
    ModelConfig mc;
    mc.relations = 4;
    mc.word_dim = 8;
    mc.entity_dim = 4;
    mc.months = 3;
    mc.final_dim = 6;
    const auto params = init_params(mc, ModelIndex::from_corpus(corpus), rng);
    for (const auto& enc : encode_corpus(corpus, mc, params.index, emb)) {
      const auto f = larn_forward(params.t, mc, enc, emb);
      check(f.dist);
      check(f.alpha);
      if (++passes == 1000) break;
    }
  }
  return {nonneg && worst <= 1e-6,
          std::to_string(passes) + " forward passes, max |sum - 1| " + fmt("%.3g", worst) +
              (nonneg ? ", all entries non-negative" : ", NEGATIVE ENTRY")};
}

// --- 3 ------------------------------------------------------------------------------
Outcome loss_identities() {
  std::mt19937_64 rng(3);
  bool hinge_exact = true;
  for (int i = 0; i < 200; ++i) {
    const auto r = testing::random_vector(10, rng), label = testing::random_vector(10, rng);
    const std::vector<Vector> negs(5, label);
    hinge_exact = hinge_exact && hinge_loss(r, label, negs) == 5.0;
  }

  double ortho = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix r(6, 12);
    for (std::size_t i = 0; i < 6; ++i) {
      auto v = testing::random_vector(12, rng);
      for (std::size_t j = 0; j < i; ++j) simd::axpy(-simd::dot(v, r.row(j)), r.row(j), v);
      const double n = norm(v);
      for (std::size_t c = 0; c < 12; ++c) r(i, c) = v[c] / n;
    }
    ortho = std::max(ortho, orthogonality_penalty(r));
  }

  const auto emb = testing::random_embeddings(8, 10, 10, rng);
  const auto corpus = testing::random_corpus(3, 10, 2, 3, 10, 10, rng);
  ModelConfig mc;
  mc.relations = 3;
  mc.word_dim = 8;
  mc.entity_dim = 4;
  mc.months = 3;
  mc.final_dim = 6;
  TrainConfig tc;
  tc.epochs = 4;
  tc.batch_size = 8;
  double total_gap = 0.0;
  for (double lambda : {0.0, 0.1, 2.5}) {
    tc.lambda = lambda;
    for (const auto& l : train(corpus, emb, mc, tc).log) {
      total_gap = std::max(total_gap, std::abs(l.total - (l.hinge + lambda * l.ortho)));
    }
  }
  return {hinge_exact && ortho < 1e-9 && total_gap <= 1e-9,
          std::string("hinge(neg = label) ") + (hinge_exact ? "exactly 1 per negative" : "INEXACT") +
              ", X(orthonormal) " + fmt("%.3g", ortho) + ", |total - (J + lambda X)| " +
              fmt("%.3g", total_gap)};
}

// --- 4 ------------------------------------------------------------------------------
TrendSeries series_of(const std::vector<Vector>& per_month, const Vector& overall) {
  TrendSeries s;
  s.mean = Matrix(per_month.front().size(), per_month.size());
  for (std::size_t t = 0; t < per_month.size(); ++t) {
    s.months.push_back(std::to_string(t));
    s.counts.push_back(1);
    for (std::size_t i = 0; i < per_month[t].size(); ++i) s.mean(i, t) = per_month[t][i];
  }
  for (std::size_t i = 0; i < overall.size(); ++i) s.names.push_back(std::to_string(i));
  s.overall = overall;
  return s;
}

Outcome change_rate_oracle() {
  // Hand evaluation: w = (0.6, 0.2, 0.2), delta = 0.6 * 0.5 = 0.30.
  const auto hand = change_rate(series_of({{0.2, 0.1, 0.1}, {0.3, 0.1, 0.1}}, {0.3, 0.1, 0.1}), 1);
  const double err = std::abs(hand.delta[1].value_or(-1.0) - 0.30);

  bool constant_zero = true;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v{u(rng), u(rng), u(rng)};
    const auto r = change_rate(series_of(std::vector<Vector>(20, v), v), 6);
    for (std::size_t t = 6; t < 20; ++t) constant_zero = constant_zero && r.delta[t] == 0.0;
  }

  bool scale_exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> m(20, Vector(3));
    for (auto& v : m) for (double& x : v) x = u(rng);
    const Vector overall{0.6, 0.5, 0.4};
    const auto base = change_rate(series_of(m, overall), 6);
    for (double c : {0.25, 0.5, 2.0, 16.0}) {
      auto scaled = m;
      for (auto& v : scaled) for (double& x : v) x *= c;
      const auto r = change_rate(series_of(scaled, overall), 6);
      scale_exact = scale_exact && r.delta == base.delta;
    }
  }
  return {err <= 1e-12 && constant_zero && scale_exact,
          "|delta - 0.30| " + fmt("%.3g", err) + ", constant series " +
              (constant_zero ? "all zero" : "NONZERO") + ", common scaling " +
              (scale_exact ? "exactly invariant" : "NOT invariant")};
}

// --- 5 and 6 share one trained model on the event spec -------------------------------
struct EventRun {
  SynthOutput synth;
  ModelParams params;
  double train_seconds = 0.0;
};

const EventRun& event_run() {
  static const EventRun run = [] {
    EventRun r{synth_fixture("events.json"), {}, 0.0};
    const auto t0 = Clock::now();
    r.params = train_default(r.synth);
    r.train_seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome descriptor_recovery() {
  const auto& run = event_run();
  const auto& s = run.synth;
  // Five most frequent lemmas per planted cluster, counted from the corpus.
  std::map<std::string, std::size_t> freq;
  for (const auto& a : s.corpus.articles) {
    for (const auto& p : a.predicates) ++freq[p];
  }
  const auto vocab = top_k_predicates(s.corpus, s.embeddings, 500);
  const auto dists = infer_distributions(AnyModel(run.params), s.corpus, s.embeddings);
  const auto desc = descriptors(run.params.t.relations, vocab, s.embeddings, dists, 5);

  bool all = true;
  std::string detail;
  for (std::size_t c = 0; c < s.truth.cluster_predicates.size(); ++c) {
    auto lemmas = s.truth.cluster_predicates[c];
    std::stable_sort(lemmas.begin(), lemmas.end(),
                     [&](const auto& a, const auto& b) { return freq[a] > freq[b]; });
    lemmas.resize(5);
    std::size_t best = 0, best_k = 0;
    for (std::size_t k = 0; k < desc.size(); ++k) {
      std::size_t hits = 0;
      for (const auto& [w, _] : desc[k].words) {
        hits += std::count(lemmas.begin(), lemmas.end(), w);
      }
      if (hits > best) {
        best = hits;
        best_k = k;
      }
    }
    all = all && best >= 3;
    detail += (c ? ", " : "") + std::string("cluster ") + std::to_string(c) + " -> relation " +
              std::to_string(best_k) + " (" + std::to_string(best) + "/5)";
  }
  return {all && run.train_seconds < 600.0,
          detail + "; default training took " + fmt("%.1f", run.train_seconds) + " s"};
}

Outcome event_detection() {
  const auto& run = event_run();
  const auto& s = run.synth;
  const auto dists = infer_distributions(AnyModel(run.params), s.corpus, s.embeddings);
  bool ok = true;
  std::string detail;
  for (const auto& [pair, events] : s.truth.event_months) {
    const auto report = change_rate(trend(s.corpus, pair, dists), 6);
    const auto peak = report.argmax();
    const std::set<std::size_t> keys(events.begin(), events.end());
    const auto a = key_event_alignment(report, keys);
    const bool near = peak && *peak + 1 >= 15 && *peak <= 16;
    ok = ok && near && a.relative_difference > 0.30;
    detail += (detail.empty() ? "" : "; ") + pair.str() + ": argmax month " +
              (peak ? std::to_string(*peak) : std::string("none")) + ", relative difference " +
              fmt("%+.1f%%", 100.0 * a.relative_difference);
  }
  return {ok, detail};
}

// --- 7 ------------------------------------------------------------------------------
Outcome regional_skew() {
  const auto s = synth_fixture("regional.json");
  const auto params = train_default(s);
  const auto dists = infer_distributions(AnyModel(params), s.corpus, s.embeddings);
  // The relation that carries cluster 0: highest mean weight over its articles.
  Vector weight(params.config.relations, 0.0);
  for (std::size_t i = 0; i < s.corpus.articles.size(); ++i) {
    if (s.truth.article_cluster[i] == 0 && dists[i]) simd::axpy(1.0, *dists[i], weight);
  }
  const auto target = static_cast<std::size_t>(
      std::max_element(weight.begin(), weight.end()) - weight.begin());
  const auto diff = regional_diff(s.corpus, EntityPair::make("US", "China"), dists,
                                  std::pair<std::string, std::string>{"US", "SG"});
  const auto& top = diff.rows.front();
  return {top.relation == target && top.diff > 0.0,
          "cluster-0 relation " + std::to_string(target) + ", top row relation " +
              std::to_string(top.relation) + " with US - SG = " + fmt("%+.4f", top.diff)};
}

// --- 8 ------------------------------------------------------------------------------
Outcome pipeline_round_trip() {
  const auto aliases = AliasMap::read_tsv_file(testing::fixture("aliases.tsv"));
  const auto antonyms = AntonymLexicon::read_tsv_file(testing::fixture("antonyms.tsv"));
  const auto corpus = build_corpus(read_conllu_dir(testing::fixture("conllu")), aliases, {}, antonyms);
  std::ostringstream out;
  write_jsonl(out, corpus);
  const auto golden = testing::slurp(testing::fixture("golden/corpus.jsonl"));
  const bool matches = out.str() == golden;

  // Hand-derived expectations, independent of the golden file.
  auto predicates_of = [&](const std::string& id, const EntityPair& pair) {
    for (const auto& a : corpus.articles) {
      if (a.article_id == id && a.pair == pair) return a.predicates;
    }
    return std::vector<std::string>{"<missing>"};
  };
  const bool hand =
      predicates_of("now-2016-10-0001", EntityPair::make("US", "Russia")) ==
          std::vector<std::string>{"denounce", "oppose"} &&
      predicates_of("now-2016-10-0002", EntityPair::make("US", "China")) ==
          std::vector<std::string>{"criticize"} &&
      predicates_of("now-2017-04-0001", EntityPair::make("US", "China")) ==
          std::vector<std::string>{"welcome", "warn"};

  std::stringstream io;
  write_jsonl(io, corpus);
  const bool lossless = read_jsonl(io) == corpus;

  const auto d = testing::scratch("accept_extract");
  const auto cli = testing::run_cli(
      "extract --conllu \"" + testing::fixture("conllu") + "\" --aliases \"" +
      testing::fixture("aliases.tsv") + "\" --antonyms \"" + testing::fixture("antonyms.tsv") +
      "\" --out \"" + (d / "corpus.jsonl").string() + "\"");
  const bool cli_matches = cli.code == 0 && testing::slurp((d / "corpus.jsonl").string()) == golden;
  return {matches && hand && lossless && cli_matches,
          std::to_string(corpus.articles.size()) + " articles; golden " +
              (matches ? "match" : "MISMATCH") + ", hand checks " + (hand ? "ok" : "FAILED") +
              ", JSONL reload " + (lossless ? "lossless" : "LOSSY") + ", CLI " +
              (cli_matches ? "match" : "MISMATCH")};
}

// --- 9 ------------------------------------------------------------------------------
std::vector<std::string> full_run(const std::filesystem::path& d) {
  auto q = [](const std::filesystem::path& p) { return "\"" + p.string() + "\""; };
  std::vector<std::string> artifacts;
  auto must = [&](const std::string& args) {
    const auto r = testing::run_cli(args);
    if (r.code != 0) throw std::runtime_error("relnet " + args + " failed: " + r.output);
  };

  // Real pipeline on the CoNLL-U fixtures.
  must("extract --conllu " + q(testing::fixture("conllu")) + " --aliases " +
       q(testing::fixture("aliases.tsv")) + " --antonyms " + q(testing::fixture("antonyms.tsv")) +
       " --out " + q(d / "corpus.jsonl"));
  const auto emb = q(testing::fixture("embeddings_small.txt"));
  must("train --corpus " + q(d / "corpus.jsonl") + " --embeddings " + emb + " --out " +
       q(d / "ck.json") + " --relations 3 --epochs 3 --seed 17");
  const std::string base = " --checkpoint " + q(d / "ck.json") + " --corpus " +
                           q(d / "corpus.jsonl") + " --embeddings " + emb;
  must("analyze descriptors" + base + " --out " + q(d / "descriptors.csv"));
  must("analyze trend" + base + " --pair US,China --out " + q(d / "trend.csv"));
  must("analyze change-rate" + base + " --pair US,China --window 1 --out " + q(d / "change.csv"));
  artifacts.insert(artifacts.end(), {"corpus.jsonl", "ck.json", "descriptors.csv", "trend.csv", "change.csv"});

  // Synthetic pipeline with the key-event path.
  must("synth --spec " + q(testing::fixture("synth/events.json")) + " --out " + q(d / "synth"));
  must("train --corpus " + q(d / "synth/corpus.jsonl") + " --embeddings " +
       q(d / "synth/embeddings.txt") + " --out " + q(d / "synth_ck.json") +
       " --relations 5 --epochs 2 --seed 17");
  {
    std::ofstream ev(d / "events.tsv");
    ev << "US,China\t2017-04\tplanted jump\nRussia,Syria\t2017-04\tplanted jump\n";
  }
  const std::string sbase = " --checkpoint " + q(d / "synth_ck.json") + " --corpus " +
                            q(d / "synth/corpus.jsonl") + " --embeddings " +
                            q(d / "synth/embeddings.txt");
  must("analyze trend" + sbase + " --pair US,China --events " + q(d / "events.tsv") + " --out " +
       q(d / "synth_trend.csv"));
  must("analyze change-rate" + sbase + " --pair US,China --events " + q(d / "events.tsv") +
       " --out " + q(d / "synth_change.csv"));
  artifacts.insert(artifacts.end(), {"synth/corpus.jsonl", "synth/embeddings.txt", "synth_ck.json",
                                     "synth_trend.csv", "synth_change.csv"});
  return artifacts;
}

Outcome determinism() {
  const auto a = testing::scratch("accept_det_a");
  const auto b = testing::scratch("accept_det_b");
  const auto files = full_run(a);
  full_run(b);
  std::size_t identical = 0;
  std::string differing;
  for (const auto& f : files) {
    const auto x = testing::slurp((a / f).string());
    if (!x.empty() && x == testing::slurp((b / f).string())) {
      ++identical;
    } else {
      differing += " " + f;
    }
  }
  return {identical == files.size(),
          std::to_string(identical) + "/" + std::to_string(files.size()) +
              " artifacts byte-identical across two runs" +
              (differing.empty() ? "" : " (differ:" + differing + ")")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 gradient correctness", gradient_correctness},
      {"2 simplex and attention invariants", simplex_invariants},
      {"3 loss identities", loss_identities},
      {"4 change-rate oracle", change_rate_oracle},
      {"5 synthetic descriptor recovery", descriptor_recovery},
      {"6 synthetic event detection", event_detection},
      {"7 regional skew recovery", regional_skew},
      {"8 pipeline round trip", pipeline_round_trip},
      {"9 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
