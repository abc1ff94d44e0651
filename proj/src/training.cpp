#include "relnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "relnet/error.hpp"
#include "relnet/math.hpp"
#include "relnet/simd.hpp"

namespace relnet {

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || negatives == 0) {
    throw ConfigError("epochs, batch size and negatives must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

namespace {

// d cos(r, y) / d r, accumulated with weight `sign`.
void add_cosine_grad(std::span<const double> r, double r_norm, std::span<const double> y,
                     double sign, std::span<double> out) {
  const double y_norm = std::max(norm(y), kNormFloor);
  const double cos = simd::dot(r, y) / (r_norm * y_norm);
  simd::axpy(sign / (r_norm * y_norm), y, out);
  simd::axpy(-sign * cos / (r_norm * r_norm), r, out);
}

}  // namespace

double hinge_loss(std::span<const double> recon, std::span<const double> label,
                  std::span<const Vector> negatives) {
  const double pos = cosine(recon, label);
  double j = 0.0;
  for (const auto& neg : negatives) j += std::max(0.0, 1.0 + (cosine(recon, neg) - pos));
  return j;
}

double hinge_loss_grad(std::span<const double> recon, std::span<const double> label,
                       std::span<const Vector> negatives, std::span<double> grad_recon) {
  std::fill(grad_recon.begin(), grad_recon.end(), 0.0);
  const double r_norm = std::max(norm(recon), kNormFloor);
  const double pos = cosine(recon, label);
  double j = 0.0;
  std::size_t active = 0;
  for (const auto& neg : negatives) {
    const double margin = 1.0 + (cosine(recon, neg) - pos);
    if (margin <= 0.0) continue;
    j += margin;
    ++active;
    add_cosine_grad(recon, r_norm, neg, 1.0, grad_recon);
  }
  if (active > 0) add_cosine_grad(recon, r_norm, label, -static_cast<double>(active), grad_recon);
  return j;
}

namespace {

Matrix gram_minus_identity(const Matrix& r) {
  const std::size_t k = r.rows();
  Matrix a(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double v = simd::dot(r.row(i), r.row(j)) - (i == j ? 1.0 : 0.0);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

}  // namespace

double orthogonality_penalty(const Matrix& relations) {
  const Matrix a = gram_minus_identity(relations);
  return norm(a.flat());
}

double orthogonality_grad(const Matrix& relations, double scale, Matrix& grad) {
  const Matrix a = gram_minus_identity(relations);
  const double x = norm(a.flat());
  if (x == 0.0 || scale == 0.0) return x;
  // dX/dR = 2 A R / X with A symmetric.
  const double c = 2.0 * scale / x;
  for (std::size_t i = 0; i < relations.rows(); ++i) {
    for (std::size_t j = 0; j < relations.rows(); ++j) {
      if (a(i, j) != 0.0) simd::axpy(c * a(i, j), relations.row(j), grad.row(i));
    }
  }
  return x;
}

std::vector<std::size_t> sample_negative_indices(std::size_t pool, std::size_t exclude,
                                                 std::size_t count, std::mt19937_64& rng) {
  if (pool < 2) throw InputError("negative sampling needs at least two articles");
  std::uniform_int_distribution<std::size_t> pick(0, pool - 2);
  std::vector<std::size_t> out(count);
  for (auto& i : out) {
    i = pick(rng);
    if (i >= exclude) ++i;
  }
  return out;
}

std::vector<Vector> sample_negatives(std::span<const Vector> labels, std::size_t exclude,
                                     std::size_t count, std::mt19937_64& rng) {
  std::vector<Vector> out;
  for (std::size_t i : sample_negative_indices(labels.size(), exclude, count, rng)) {
    out.push_back(labels[i]);
  }
  return out;
}

ModelParams init_params(const ModelConfig& config, ModelIndex index, std::mt19937_64& rng) {
  auto p = ModelParams::shaped(config, std::move(index));
  p.t.for_each([&](const char*, Matrix& m) { xavier_init(m, rng); });
  return p;
}

RmnParams init_params(const RmnConfig& config, ModelIndex index,
                      std::vector<std::string> stopwords, std::mt19937_64& rng) {
  auto p = RmnParams::shaped(config, std::move(index));
  p.stopwords = std::move(stopwords);
  p.t.for_each([&](const char*, Matrix& m) { xavier_init(m, rng); });
  return p;
}

namespace {

template <typename Tensors>
void zero(Tensors& t) {
  t.for_each([](const char*, Matrix& m) { m.fill(0.0); });
}

// Shared minibatch loop. `step(i, negatives, grads, rng)` runs forward and
// backward for encoded article i and returns its hinge loss.
template <typename Tensors, typename Step, typename EpochBegin>
std::vector<LossBreakdown> run_epochs(Tensors& params, const std::vector<Vector>& labels,
                                      const std::vector<std::string>& ids, const TrainConfig& c,
                                      std::mt19937_64& rng, Step&& step,
                                      EpochBegin&& epoch_begin, const EpochCallback& on_epoch) {
  const std::size_t n = labels.size();
  Adam<Tensors> adam(params, c);
  Tensors grads = params.zeros_like();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<LossBreakdown> log;
  std::size_t iteration = 0;

  for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
    epoch_begin();
    std::shuffle(order.begin(), order.end(), rng);
    double j_sum = 0.0;
    double x_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += c.batch_size) {
      const std::size_t stop = std::min(n, start + c.batch_size);
      zero(grads);
      double j_batch = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto negatives = sample_negatives(labels, i, c.negatives, rng);
        const double j = step(i, negatives, grads, rng);
        if (!std::isfinite(j)) {
          throw NumericError("non-finite loss at iteration " + std::to_string(iteration) +
                             " (epoch " + std::to_string(epoch) + "), article '" + ids[i] + "'");
        }
        j_batch += j;
      }
      const double x = orthogonality_grad(params.relations, c.lambda, grads.relations);
      if (!std::isfinite(x)) {
        throw NumericError("non-finite orthogonality penalty at iteration " +
                           std::to_string(iteration));
      }
      adam.step(params, grads);
      j_sum += j_batch;
      x_sum += x;
      ++batches;
      ++iteration;
    }
    LossBreakdown lb;
    lb.epoch = epoch + 1;
    lb.hinge = j_sum / static_cast<double>(batches);
    lb.ortho = x_sum / static_cast<double>(batches);
    lb.lambda = c.lambda;
    lb.total = lb.hinge + c.lambda * lb.ortho;
    if (!std::isfinite(lb.total)) {
      throw NumericError("non-finite epoch loss in epoch " + std::to_string(epoch + 1));
    }
    log.push_back(lb);
    if (on_epoch) on_epoch(lb);
  }
  return log;
}

}  // namespace

TrainResult train(const Corpus& corpus, const EmbeddingTable& emb, const ModelConfig& model,
                  const TrainConfig& c, const EpochCallback& on_epoch) {
  c.validate();
  if (corpus.articles.empty()) throw InputError("corpus is empty");
  ModelConfig mc = model;
  mc.dropout = c.dropout;
  mc.validate();

  TrainResult result;
  const auto index = ModelIndex::from_corpus(corpus);
  const auto encoded = encode_corpus(corpus, mc, index, emb, &result.stats);
  if (encoded.size() < 2) {
    throw InputError("corpus too small: " + std::to_string(encoded.size()) +
                     " usable article(s); negative sampling needs at least two");
  }

  std::mt19937_64 rng(c.seed);
  result.params = init_params(mc, index, rng);
  auto& params = result.params;

  std::vector<Vector> labels;
  std::vector<std::string> ids;
  for (const auto& e : encoded) {
    labels.push_back(e.label);
    ids.push_back(corpus.articles[e.article].article_id);
  }

  std::bernoulli_distribution keep_draw(1.0 - c.dropout);
  std::vector<std::uint8_t> keep;
  Vector grad_recon(mc.word_dim);
  auto step = [&](std::size_t i, const std::vector<Vector>& negatives, LarnTensors& grads,
                  std::mt19937_64& g) {
    const auto& a = encoded[i];
    keep.resize(a.predicates.size());
    for (auto& k : keep) k = keep_draw(g) ? 1 : 0;
    const auto fwd = larn_forward(params.t, mc, a, emb, keep);
    const double j = hinge_loss_grad(fwd.recon, a.label, negatives, grad_recon);
    if (j > 0.0) larn_backward(params.t, mc, a, emb, fwd, grad_recon, grads);
    return j;
  };
  result.log = run_epochs(params.t, labels, ids, c, rng, step, [] {}, on_epoch);
  return result;
}

RmnTrainResult train_rmn(const Corpus& corpus, const EmbeddingTable& emb, const RmnConfig& model,
                         const TrainConfig& c, const EpochCallback& on_epoch) {
  c.validate();
  model.validate();
  if (corpus.articles.empty()) throw InputError("corpus is empty");

  RmnTrainResult result;
  std::mt19937_64 rng(c.seed);
  result.params = init_params(model, ModelIndex::from_corpus(corpus),
                              rmn_stopwords(corpus, model.stopword_count), rng);
  auto& params = result.params;
  const auto encoded = rmn_encode_corpus(corpus, params, emb, &result.stats);
  if (encoded.size() < 2) {
    throw InputError("corpus too small: " + std::to_string(encoded.size()) +
                     " usable article(s); negative sampling needs at least two");
  }
  const auto prev_of = rmn_predecessors(corpus, encoded);

  std::vector<Vector> labels;
  std::vector<std::string> ids;
  for (const auto& e : encoded) {
    labels.push_back(e.label);
    ids.push_back(corpus.articles[e.article].article_id);
  }

  std::vector<RelationDistribution> cached;
  auto epoch_begin = [&] { cached = rmn_infer(corpus, encoded, params, emb); };
  Vector grad_recon(model.word_dim);
  auto step = [&](std::size_t i, const std::vector<Vector>& negatives, RmnTensors& grads,
                  std::mt19937_64&) {
    std::span<const double> prev;
    if (prev_of[i]) prev = cached[*prev_of[i]];
    const auto fwd = rmn_forward(params.t, params.config, encoded[i], emb, prev);
    const double j = hinge_loss_grad(fwd.recon, encoded[i].label, negatives, grad_recon);
    if (j > 0.0) rmn_backward(params.t, params.config, encoded[i], emb, fwd, grad_recon, grads);
    return j;
  };
  result.log = run_epochs(params.t, labels, ids, c, rng, step, epoch_begin, on_epoch);
  return result;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

double finite_difference_error(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> x, std::span<const double> analytic,
                               std::span<const std::size_t> coords, double eps) {
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t c : coords) {
    probe[c] = x[c] + eps;
    const double up = f(probe);
    probe[c] = x[c] - eps;
    const double down = f(probe);
    probe[c] = x[c];
    worst = std::max(worst, relative_error(analytic[c], (up - down) / (2.0 * eps)));
  }
  return worst;
}

namespace {

// Loss value plus the on/off pattern of every ReLU unit and hinge term; a
// finite difference is only meaningful when the pattern is unchanged.
struct Probe {
  double loss = 0.0;
  std::vector<bool> pattern;
};

void append_pattern(std::vector<bool>& pattern, std::span<const double> pre_relu,
                    std::span<const double> recon, std::span<const double> label,
                    std::span<const Vector> negatives) {
  for (double v : pre_relu) pattern.push_back(v > 0.0);
  const double pos = cosine(recon, label);
  for (const auto& n : negatives) pattern.push_back(1.0 + (cosine(recon, n) - pos) > 0.0);
}

template <typename Tensors, typename ProbeFn, typename AnalyticFn>
GradCheckReport check_tensors(const Tensors& base, ProbeFn&& probe, AnalyticFn&& analytic,
                              double eps, std::size_t samples, std::uint64_t seed) {
  GradCheckReport report;
  const Tensors grad = analytic();
  const Probe at_base = probe(base);
  std::mt19937_64 rng(seed);

  std::vector<const Matrix*> grads;
  grad.for_each([&](const char*, const Matrix& m) { grads.push_back(&m); });

  Tensors work = base;
  std::size_t ti = 0;
  work.for_each([&](const char* name, Matrix& m) {
    GradCheckReport::Tensor entry;
    entry.name = name;
    const Matrix& g = *grads[ti++];
    std::vector<std::size_t> coords(m.size());
    std::iota(coords.begin(), coords.end(), 0);
    std::shuffle(coords.begin(), coords.end(), rng);
    for (std::size_t c : coords) {
      if (entry.checked >= samples) break;
      double& x = m.flat()[c];
      const double saved = x;
      x = saved + eps;
      const Probe up = probe(work);
      x = saved - eps;
      const Probe down = probe(work);
      x = saved;
      if (up.pattern != at_base.pattern || down.pattern != at_base.pattern) {
        ++entry.skipped;
        continue;
      }
      const double numeric = (up.loss - down.loss) / (2.0 * eps);
      entry.max_rel_error = std::max(entry.max_rel_error, relative_error(g.flat()[c], numeric));
      ++entry.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.tensors.push_back(entry);
  });
  return report;
}

}  // namespace

GradCheckReport grad_check(const ModelParams& params, const EncodedArticle& article,
                           const EmbeddingTable& emb, std::span<const Vector> negatives,
                           double lambda, double eps, std::size_t samples, std::uint64_t seed) {
  const ModelConfig& mc = params.config;
  auto probe = [&](const LarnTensors& t) {
    const auto f = larn_forward(t, mc, article, emb);
    Probe p;
    p.loss = hinge_loss(f.recon, article.label, negatives) +
             lambda * orthogonality_penalty(t.relations);
    append_pattern(p.pattern, f.pre_relu, f.recon, article.label, negatives);
    return p;
  };
  auto analytic = [&] {
    LarnTensors g = params.t.zeros_like();
    const auto f = larn_forward(params.t, mc, article, emb);
    Vector grad_recon(mc.word_dim);
    hinge_loss_grad(f.recon, article.label, negatives, grad_recon);
    larn_backward(params.t, mc, article, emb, f, grad_recon, g);
    orthogonality_grad(params.t.relations, lambda, g.relations);
    return g;
  };
  return check_tensors(params.t, probe, analytic, eps, samples, seed);
}

GradCheckReport grad_check(const RmnParams& params, const RmnArticle& article,
                           const EmbeddingTable& emb, std::span<const Vector> negatives,
                           double lambda, std::span<const double> prev_dist, double eps,
                           std::size_t samples, std::uint64_t seed) {
  const RmnConfig& rc = params.config;
  auto probe = [&](const RmnTensors& t) {
    const auto f = rmn_forward(t, rc, article, emb, prev_dist);
    Probe p;
    p.loss = hinge_loss(f.recon, article.label, negatives) +
             lambda * orthogonality_penalty(t.relations);
    append_pattern(p.pattern, f.pre_relu, f.recon, article.label, negatives);
    return p;
  };
  auto analytic = [&] {
    RmnTensors g = params.t.zeros_like();
    const auto f = rmn_forward(params.t, rc, article, emb, prev_dist);
    Vector grad_recon(rc.word_dim);
    hinge_loss_grad(f.recon, article.label, negatives, grad_recon);
    rmn_backward(params.t, rc, article, emb, f, grad_recon, g);
    orthogonality_grad(params.t.relations, lambda, g.relations);
    return g;
  };
  return check_tensors(params.t, probe, analytic, eps, samples, seed);
}

}  // namespace relnet
