// relnet: extract -> train -> analyze, plus synthetic corpora.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relnet/analysis.hpp"
#include "relnet/annotate.hpp"
#include "relnet/checkpoint.hpp"
#include "relnet/conllu.hpp"
#include "relnet/corpus.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/error.hpp"
#include "relnet/manifest.hpp"
#include "relnet/simd.hpp"
#include "relnet/synth.hpp"
#include "relnet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace relnet;

namespace {

std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv("RELNET_SEED");
  if (!env || !*env) return flag;
  std::uint64_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  auto [p, ec] = std::from_chars(env, end, v);
  if (ec != std::errc{} || p != end) {
    throw InputError(std::string("RELNET_SEED must be an unsigned integer, got '") + env + "'");
  }
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

// --- Tabular output ------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json summary = json::object();
};

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.dump();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const Table& t, const std::string& format, const std::string& manifest) {
  std::ostringstream os;
  if (format == "json") {
    json j{{"manifest", manifest}, {"summary", t.summary}, {"rows", json::array()}};
    for (const auto& row : t.rows) {
      json r = json::object();
      for (std::size_t c = 0; c < t.columns.size(); ++c) r[t.columns[c]] = row[c];
      j["rows"].push_back(std::move(r));
    }
    os << j.dump(2) << "\n";
    return os.str();
  }
  if (format == "md") {
    os << "<!-- manifest=" << manifest << " -->\n\n";
    for (const auto& [k, v] : t.summary.items()) os << "- **" << k << "**: " << cell(v) << "\n";
    if (!t.summary.empty()) os << "\n";
    os << "|";
    for (const auto& c : t.columns) os << " " << c << " |";
    os << "\n|";
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << " --- |";
    os << "\n";
    for (const auto& row : t.rows) {
      os << "|";
      for (const auto& v : row) os << " " << cell(v) << " |";
      os << "\n";
    }
    return os.str();
  }
  os << "# manifest=" << manifest << "\n";
  for (const auto& [k, v] : t.summary.items()) os << "# " << k << "=" << cell(v) << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_escape(cell(row[c]));
    os << "\n";
  }
  return os.str();
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// --- extract -----------------------------------------------------------------------

struct ExtractArgs {
  std::string conllu, aliases, antonyms, entities, out;
};

int cmd_extract(const ExtractArgs& a) {
  const auto aliases = AliasMap::read_tsv_file(a.aliases);
  AntonymLexicon antonyms;
  if (!a.antonyms.empty()) antonyms = AntonymLexicon::read_tsv_file(a.antonyms);
  std::vector<std::string> entities;
  std::stringstream ss(a.entities);
  for (std::string e; std::getline(ss, e, ',');) {
    if (!e.empty()) entities.push_back(e);
  }
  const auto sentences = read_conllu_dir(a.conllu);
  if (sentences.empty()) throw InputError("no sentences in '" + a.conllu + "'");
  const Corpus corpus = build_corpus(sentences, aliases, entities, antonyms);
  write_jsonl_file(a.out, corpus);

  RunManifest m;
  m.command = "extract";
  m.config = {{"entities", entities}};
  m.inputs["aliases"] = file_hash(a.aliases);
  if (!a.antonyms.empty()) m.inputs["antonyms"] = file_hash(a.antonyms);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(a.conllu)) {
    if (e.path().extension() == ".conllu") files.push_back(e.path().filename().string());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) m.inputs["conllu/" + f] = file_hash((fs::path(a.conllu) / f).string());
  m.write(a.out + ".manifest.json");
  std::cerr << "extracted " << corpus.articles.size() << " articles over "
            << corpus.month_count() << " months from " << sentences.size() << " sentences\n";
  return 0;
}

// --- train --------------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, embeddings, out, log, model = "larn";
  TrainConfig train;
  ModelConfig larn;
  std::size_t hidden_dim = 300;
  double recurrence = 0.5;
  std::size_t stopwords = 500;
};

int cmd_train(TrainArgs a) {
  a.train.seed = effective_seed(a.train.seed);
  const Corpus corpus = read_jsonl_file(a.corpus);
  const EmbeddingTable emb = load_embeddings(a.embeddings);

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log, std::ios::binary);
    if (!log) throw InputError("cannot write '" + a.log + "'");
  }
  const auto on_epoch = [&](const LossBreakdown& l) {
    json j{{"epoch", l.epoch}, {"J", l.hinge}, {"X", l.ortho}, {"lambda", l.lambda}, {"total", l.total}};
    if (log) log << j.dump() << "\n" << std::flush;
    std::cerr << "epoch " << l.epoch << "  J=" << l.hinge << "  X=" << l.ortho
              << "  total=" << l.total << "\n";
  };

  RunManifest m;
  m.command = "train";
  m.seed = a.train.seed;
  m.inputs["corpus"] = file_hash(a.corpus);
  m.inputs["embeddings"] = file_hash(a.embeddings);
  m.config = {{"model", a.model},
              {"epochs", a.train.epochs},
              {"learning_rate", a.train.learning_rate},
              {"batch_size", a.train.batch_size},
              {"negatives", a.train.negatives},
              {"lambda", a.train.lambda},
              {"dropout", a.train.dropout},
              {"relations", a.larn.relations},
              {"entity_dim", a.larn.entity_dim}};

  Checkpoint ck;
  EncodeStats stats;
  if (a.model == "larn") {
    a.larn.word_dim = emb.dim();
    a.larn.dropout = a.train.dropout;
    m.config["months"] = a.larn.months;
    m.config["attention_dim"] = a.larn.resolved_attention_dim();
    m.config["final_dim"] = a.larn.final_dim;
    auto r = train(corpus, emb, a.larn, a.train, on_epoch);
    stats = r.stats;
    ck.model = std::move(r.params);
  } else if (a.model == "rmn") {
    RmnConfig rc;
    rc.relations = a.larn.relations;
    rc.word_dim = emb.dim();
    rc.entity_dim = a.larn.entity_dim;
    rc.hidden_dim = a.hidden_dim;
    rc.recurrence = a.recurrence;
    rc.stopword_count = a.stopwords;
    m.config["hidden_dim"] = rc.hidden_dim;
    m.config["recurrence"] = rc.recurrence;
    m.config["stopwords"] = rc.stopword_count;
    auto r = train_rmn(corpus, emb, rc, a.train, on_epoch);
    stats = r.stats;
    ck.model = std::move(r.params);
  } else {
    throw InputError("unknown model '" + a.model + "' (expected larn or rmn)");
  }
  ck.manifest_hash = m.hash();
  save_checkpoint(a.out, ck);
  m.write(a.out + ".manifest.json");
  std::cerr << "trained on " << stats.articles_in - stats.articles_skipped << " of "
            << stats.articles_in << " articles; checkpoint " << a.out << "\n";
  return 0;
}

// --- analyze ------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string checkpoint, corpus, embeddings, pair, events, format = "csv", out;
  std::size_t top = 3, window = 6, top_k = 5, vocab_limit = 500, relation = 0, top_words = 10,
              predicates = 10;
  double fraction = 0.1;
  std::string regions, source = "model";
};

struct Loaded {
  Corpus corpus;
  std::optional<EmbeddingTable> emb;
  std::optional<Checkpoint> ck;
  ArticleDistributions dists;
  RunManifest manifest;
};

Loaded load_inputs(const AnalyzeArgs& a, const std::string& sub, bool needs_model) {
  Loaded l;
  l.manifest.command = "analyze " + sub;
  if (a.corpus.empty()) throw InputError("--corpus is required");
  l.corpus = read_jsonl_file(a.corpus);
  l.manifest.inputs["corpus"] = file_hash(a.corpus);
  if (needs_model) {
    if (a.checkpoint.empty()) throw InputError("--checkpoint is required");
    if (a.embeddings.empty()) throw InputError("--embeddings is required");
    l.ck = load_checkpoint(a.checkpoint);
    l.emb = load_embeddings(a.embeddings);
    l.manifest.inputs["checkpoint"] = file_hash(a.checkpoint);
    l.manifest.inputs["embeddings"] = file_hash(a.embeddings);
    l.dists = infer_distributions(l.ck->model, l.corpus, *l.emb);
  }
  if (!a.events.empty()) l.manifest.inputs["events"] = file_hash(a.events);
  return l;
}

EntityPair require_pair(const AnalyzeArgs& a, const Corpus& corpus) {
  if (a.pair.empty()) throw InputError("--pair is required");
  const auto p = EntityPair::parse(a.pair);
  if (corpus.indices_of(p).empty()) throw InputError("pair '" + p.str() + "' not in corpus");
  return p;
}

// Nearest vocabulary lemma of every relation.
std::vector<std::string> heads(const Loaded& l, std::size_t vocab_limit) {
  const auto vocab = top_k_predicates(l.corpus, *l.emb, vocab_limit);
  const auto d = descriptors(relation_matrix(l.ck->model), vocab, *l.emb, l.dists, 1);
  std::vector<std::string> out;
  for (const auto& r : d) out.push_back(r.words.empty() ? "" : r.words.front().first);
  return out;
}

std::set<std::size_t> key_months(const AnalyzeArgs& a, const Corpus& corpus, const EntityPair& p) {
  if (a.events.empty()) return {};
  return key_months_for(read_key_events_file(a.events), p, corpus);
}

Table descriptors_table(const AnalyzeArgs& a, const Loaded& l) {
  const auto vocab = top_k_predicates(l.corpus, *l.emb, a.vocab_limit);
  const auto d = descriptors(relation_matrix(l.ck->model), vocab, *l.emb, l.dists, a.top_k);
  Table t{{"relation_id", "avg_weight", "rank", "lemma", "cosine"}, {}, {}};
  t.summary["vocab_size"] = vocab.size();
  for (std::size_t k = 0; k < d.size(); ++k) {
    for (std::size_t r = 0; r < d[k].words.size(); ++r) {
      t.rows.push_back({k, d[k].avg_weight, r + 1, d[k].words[r].first, d[k].words[r].second});
    }
  }
  return t;
}

Table trend_table(const AnalyzeArgs& a, const Loaded& l) {
  const auto pair = require_pair(a, l.corpus);
  const auto s = trend(l.corpus, pair, l.dists);
  const auto h = heads(l, a.vocab_limit);
  const auto keys = key_months(a, l.corpus, pair);
  Table t{{"pair", "relation_id", "descriptor_head", "month", "mean_weight", "n_articles"}, {}, {}};
  if (!a.events.empty()) t.columns.push_back("is_key_event");
  for (std::size_t k : s.top(a.top)) {
    for (std::size_t m = 0; m < s.month_count(); ++m) {
      std::vector<json> row{pair.str(), k, h[k], s.months[m],
                            s.present(m) ? json(s.mean(k, m)) : json(nullptr), s.counts[m]};
      if (!a.events.empty()) row.push_back(keys.count(m) ? 1 : 0);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table change_rate_table(const AnalyzeArgs& a, const Loaded& l) {
  const auto pair = require_pair(a, l.corpus);
  TrendSeries s;
  if (a.source == "tf") {
    s = tf_baseline_trend(l.corpus, pair);
  } else if (a.source == "model") {
    s = trend(l.corpus, pair, l.dists);
  } else {
    throw InputError("unknown --source '" + a.source + "' (expected model or tf)");
  }
  auto r = change_rate(s, a.window, a.top);
  const auto keys = key_months(a, l.corpus, pair);
  if (!a.events.empty()) annotate_key_events(r, keys);
  Table t{{"month", "delta", "is_key_event"}, {}, {}};
  t.summary["pair"] = pair.str();
  t.summary["source"] = a.source;
  t.summary["window"] = r.window;
  std::vector<std::string> top;
  for (std::size_t i : r.top) top.push_back(s.names[i]);
  t.summary["top"] = top;
  if (!a.events.empty()) {
    t.summary["key_mean"] = opt(r.key_mean);
    t.summary["other_mean"] = opt(r.other_mean);
    t.summary["relative_difference"] = opt(r.relative_difference);
  }
  for (std::size_t m = 0; m < r.delta.size(); ++m) {
    t.rows.push_back({r.months[m], opt(r.delta[m]), keys.count(m) ? 1 : 0});
  }
  return t;
}

Table context_table(const AnalyzeArgs& a, const Loaded& l) {
  const auto* params = std::get_if<ModelParams>(&l.ck->model);
  if (!params) throw InputError("context words need an attention-model checkpoint");
  const auto pair = require_pair(a, l.corpus);
  const auto c = context_words(l.corpus, pair, a.relation, *params, *l.emb, a.fraction, a.top_words);
  Table t{{"variant", "word", "month", "score"}, {}, {}};
  t.summary["pair"] = pair.str();
  t.summary["relation"] = a.relation;
  t.summary["articles"] = c.articles.size();
  const std::pair<const char*, const ContextRanking*> variants[] = {
      {"attention", &c.attention}, {"frequency", &c.frequency}, {"combined", &c.combined}};
  for (const auto& [name, rank] : variants) {
    t.summary[std::string(name) + "_degenerate"] = rank->degenerate;
    for (std::size_t w = 0; w < rank->words.size(); ++w) {
      for (std::size_t m = 0; m < rank->scores.cols(); ++m) {
        t.rows.push_back({name, rank->words[w], l.corpus.months[m], rank->scores(w, m)});
      }
    }
  }
  return t;
}

Table regional_table(const AnalyzeArgs& a, const Loaded& l) {
  const auto pair = require_pair(a, l.corpus);
  std::optional<std::pair<std::string, std::string>> regions;
  if (!a.regions.empty()) {
    const auto comma = a.regions.find(',');
    if (comma == std::string::npos) throw InputError("--regions expects A,B");
    regions = std::make_pair(a.regions.substr(0, comma), a.regions.substr(comma + 1));
  }
  const auto r = regional_diff(l.corpus, pair, l.dists, regions);
  const auto h = heads(l, a.vocab_limit);
  Table t{{"relation_id", "descriptor_head", "weight_a", "weight_b", "diff"}, {}, {}};
  t.summary["pair"] = pair.str();
  t.summary["region_a"] = r.region_a;
  t.summary["region_b"] = r.region_b;
  t.summary["articles_a"] = r.articles_a;
  t.summary["articles_b"] = r.articles_b;
  for (const auto& row : r.rows) {
    t.rows.push_back({row.relation, h[row.relation], row.weight_a, row.weight_b, row.diff});
  }
  return t;
}

Table tf_table(const AnalyzeArgs& a, const Loaded& l) {
  const auto pair = require_pair(a, l.corpus);
  const auto s = tf_baseline_trend(l.corpus, pair);
  Table t{{"pair", "predicate", "month", "mean_tf", "n_articles"}, {}, {}};
  for (std::size_t k : s.top(a.predicates)) {
    for (std::size_t m = 0; m < s.month_count(); ++m) {
      t.rows.push_back({pair.str(), s.names[k], s.months[m],
                        s.present(m) ? json(s.mean(k, m)) : json(nullptr), s.counts[m]});
    }
  }
  return t;
}

int cmd_analyze(const std::string& sub, const AnalyzeArgs& a) {
  if (a.format != "csv" && a.format != "json" && a.format != "md") {
    throw InputError("unknown --format '" + a.format + "'");
  }
  const bool tf_only = sub == "tf-baseline" || (sub == "change-rate" && a.source == "tf");
  Loaded l = load_inputs(a, sub, !tf_only);
  Table t;
  if (sub == "descriptors") t = descriptors_table(a, l);
  else if (sub == "trend") t = trend_table(a, l);
  else if (sub == "change-rate") t = change_rate_table(a, l);
  else if (sub == "context") t = context_table(a, l);
  else if (sub == "regional") t = regional_table(a, l);
  else t = tf_table(a, l);

  l.manifest.config = {{"pair", a.pair},     {"top", a.top},           {"window", a.window},
                       {"top_k", a.top_k},   {"vocab_limit", a.vocab_limit},
                       {"relation", a.relation}, {"fraction", a.fraction},
                       {"top_words", a.top_words}, {"predicates", a.predicates},
                       {"regions", a.regions}, {"source", a.source}, {"format", a.format}};
  if (l.ck) l.manifest.config["checkpoint_manifest"] = l.ck->manifest_hash;
  write_text(a.out, render(t, a.format, l.manifest.hash()));
  return 0;
}

// --- synth --------------------------------------------------------------------------

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  std::ifstream in(spec_path);
  if (!in) throw InputError("cannot open synthetic spec '" + spec_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("synthetic spec '" + spec_path + "' is not valid JSON: " + e.what());
  }
  auto spec = SynthSpec::from_json(j);
  spec.seed = effective_seed(spec.seed);
  const auto out = generate(spec);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_jsonl_file((dir / "corpus.jsonl").string(), out.corpus);
  save_embeddings((dir / "embeddings.txt").string(), out.embeddings);
  write_text((dir / "truth.json").string(), out.truth.to_json().dump(1) + "\n");
  RunManifest m;
  m.command = "synth";
  m.config = spec.to_json();
  m.seed = spec.seed;
  m.inputs["spec"] = file_hash(spec_path);
  m.write((dir / "manifest.json").string());
  std::cerr << "generated " << out.corpus.articles.size() << " articles in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation embeddings for entity pairs in news: extract, train, analyze."};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel backend: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "CoNLL-U directory to corpus JSONL");
  extract->add_option("--conllu", ex.conllu, "Directory of *.conllu files")->required();
  extract->add_option("--aliases", ex.aliases, "entity<TAB>alias TSV")->required();
  extract->add_option("--antonyms", ex.antonyms, "lemma<TAB>antonym TSV");
  extract->add_option("--entities", ex.entities, "Comma-separated entity ids (default: all)");
  extract->add_option("--out", ex.out, "Output corpus JSONL")->required();

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "Train a model and write a checkpoint");
  trn->add_option("--corpus", tr.corpus, "Corpus JSONL")->required();
  trn->add_option("--embeddings", tr.embeddings, "Text embeddings")->required();
  trn->add_option("--out", tr.out, "Checkpoint path")->required();
  trn->add_option("--log", tr.log, "JSON-lines loss log");
  trn->add_option("--model", tr.model, "larn or rmn")->capture_default_str();
  trn->add_option("--relations", tr.larn.relations, "Number of relations K")->capture_default_str();
  trn->add_option("--entity-dim", tr.larn.entity_dim)->capture_default_str();
  trn->add_option("--months", tr.larn.months, "Width of the month one-hot")->capture_default_str();
  trn->add_option("--attention-dim", tr.larn.attention_dim, "0 means word dim + months")
      ->capture_default_str();
  trn->add_option("--final-dim", tr.larn.final_dim)->capture_default_str();
  trn->add_option("--hidden-dim", tr.hidden_dim, "Baseline hidden layer")->capture_default_str();
  trn->add_option("--recurrence", tr.recurrence, "Baseline weight of the previous step")
      ->capture_default_str();
  trn->add_option("--stopwords", tr.stopwords, "Baseline frequent-word cutoff")->capture_default_str();
  trn->add_option("--epochs", tr.train.epochs)->capture_default_str();
  trn->add_option("--lr", tr.train.learning_rate)->capture_default_str();
  trn->add_option("--batch-size", tr.train.batch_size)->capture_default_str();
  trn->add_option("--negatives", tr.train.negatives)->capture_default_str();
  trn->add_option("--lambda", tr.train.lambda, "Orthogonality weight")->capture_default_str();
  trn->add_option("--dropout", tr.train.dropout, "Predicate dropout")->capture_default_str();
  trn->add_option("--seed", tr.train.seed, "RELNET_SEED overrides")->capture_default_str();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Post-training analyses");
  analyze->require_subcommand(1);
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> kinds[] = {
      {"descriptors", "Nearest predicates to each relation vector"},
      {"trend", "Monthly mean relation weights for a pair"},
      {"change-rate", "Month-over-month change of the top relations"},
      {"context", "Words that distinguish a relation's strongest articles"},
      {"regional", "Relation weights compared across two source countries"},
      {"tf-baseline", "Monthly predicate term frequency for a pair"},
  };
  for (const auto& [name, about] : kinds) {
    auto* s = analyze->add_subcommand(name, about);
    s->add_option("--corpus", an.corpus, "Corpus JSONL");
    s->add_option("--format", an.format, "csv, json or md")->capture_default_str();
    s->add_option("--out", an.out, "Output file (default stdout)");
    if (std::string(name) != "tf-baseline") {
      s->add_option("--checkpoint", an.checkpoint);
      s->add_option("--embeddings", an.embeddings);
      s->add_option("--vocab-limit", an.vocab_limit, "Most common predicates considered")
          ->capture_default_str();
    }
    if (std::string(name) != "descriptors") s->add_option("--pair", an.pair, "e.g. US,China");
    subs.push_back(s);
  }
  subs[0]->add_option("--top-k", an.top_k, "Descriptors per relation")->capture_default_str();
  subs[1]->add_option("--top", an.top, "Relations to emit")->capture_default_str();
  subs[1]->add_option("--events", an.events, "Key-event TSV");
  subs[2]->add_option("--window", an.window)->capture_default_str();
  subs[2]->add_option("--top", an.top, "Series in the change rate")->capture_default_str();
  subs[2]->add_option("--events", an.events, "Key-event TSV");
  subs[2]->add_option("--source", an.source, "model or tf")->capture_default_str();
  subs[3]->add_option("--relation", an.relation)->required();
  subs[3]->add_option("--fraction", an.fraction, "Share of articles kept")->capture_default_str();
  subs[3]->add_option("--top", an.top_words, "Words per ranking")->capture_default_str();
  subs[4]->add_option("--regions", an.regions, "A,B (default: two largest)");
  subs[5]->add_option("--top", an.predicates, "Predicates to emit")->capture_default_str();

  std::string spec_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  synth->add_option("--spec", spec_path, "Spec JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kInputError);
  }

  try {
    if (simd == "scalar") simd::set_backend(simd::Backend::kScalar);
    if (simd == "avx2") simd::set_backend(simd::Backend::kAvx2);
    if (*extract) return cmd_extract(ex);
    if (*trn) return cmd_train(tr);
    if (*synth) return cmd_synth(spec_path, synth_out);
    for (auto* s : subs) {
      if (*s) return cmd_analyze(s->get_name(), an);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
