#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relnet/corpus.hpp"
#include "relnet/embeddings.hpp"
#include "relnet/model.hpp"
#include "relnet/rmn.hpp"
#include "relnet/simd.hpp"

namespace relnet {

struct TrainConfig {
  std::size_t epochs = 15;
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::size_t negatives = 15;
  double lambda = 0.1;  // weight of the orthogonality penalty
  double dropout = 0.5;  // probability of zeroing a predicate
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct LossBreakdown {
  std::size_t epoch = 0;
  double hinge = 0.0;  // J
  double ortho = 0.0;  // X
  double lambda = 0.0;
  double total = 0.0;  // J + lambda * X
};

/// sum over negatives of max(0, 1 - cos(r, label) + cos(r, neg)).
double hinge_loss(std::span<const double> recon, std::span<const double> label,
                  std::span<const Vector> negatives);
/// As hinge_loss, and writes dJ/dr into grad_recon (overwritten).
double hinge_loss_grad(std::span<const double> recon, std::span<const double> label,
                       std::span<const Vector> negatives, std::span<double> grad_recon);

/// Frobenius norm of R R^T - I.
double orthogonality_penalty(const Matrix& relations);
/// Adds scale * dX/dR to grad and returns X. The gradient is taken as zero
/// at X = 0.
double orthogonality_grad(const Matrix& relations, double scale, Matrix& grad);

/// `count` indices drawn uniformly from [0, pool) \ {exclude}. Throws
/// InputError when pool < 2.
std::vector<std::size_t> sample_negative_indices(std::size_t pool, std::size_t exclude,
                                                 std::size_t count, std::mt19937_64& rng);
std::vector<Vector> sample_negatives(std::span<const Vector> labels, std::size_t exclude,
                                     std::size_t count, std::mt19937_64& rng);

/// Adam over a tensor bundle (LarnTensors or RmnTensors).
template <typename Tensors>
class Adam {
 public:
  Adam(const Tensors& like, const TrainConfig& c)
      : m_(like.zeros_like()), v_(like.zeros_like()), config_(c) {}

  void step(Tensors& params, const Tensors& grads) {
    ++t_;
    const simd::AdamStep s{config_.learning_rate, config_.beta1, config_.beta2, config_.adam_eps,
                           1.0 - std::pow(config_.beta1, static_cast<double>(t_)),
                           1.0 - std::pow(config_.beta2, static_cast<double>(t_))};
    std::vector<Matrix*> p, m, v;
    std::vector<const Matrix*> g;
    params.for_each([&](const char*, Matrix& x) { p.push_back(&x); });
    grads.for_each([&](const char*, const Matrix& x) { g.push_back(&x); });
    m_.for_each([&](const char*, Matrix& x) { m.push_back(&x); });
    v_.for_each([&](const char*, Matrix& x) { v.push_back(&x); });
    for (std::size_t i = 0; i < p.size(); ++i) {
      simd::adam(p[i]->flat(), g[i]->flat(), m[i]->flat(), v[i]->flat(), s);
    }
  }

  std::size_t steps() const { return t_; }

 private:
  Tensors m_;
  Tensors v_;
  TrainConfig config_;
  std::size_t t_ = 0;
};

using EpochCallback = std::function<void(const LossBreakdown&)>;

struct TrainResult {
  ModelParams params;
  std::vector<LossBreakdown> log;
  EncodeStats stats;
};

/// Minibatch Adam on J + lambda X with word dropout and fresh negatives for
/// every article of every minibatch. Word embeddings stay frozen. Throws
/// InputError when fewer than two articles survive encoding and
/// NumericError on a non-finite loss.
TrainResult train(const Corpus& corpus, const EmbeddingTable& emb, const ModelConfig& model,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

struct RmnTrainResult {
  RmnParams params;
  std::vector<LossBreakdown> log;
  EncodeStats stats;
};

/// Same objective for the baseline. Each article's previous-step
/// distribution is recomputed at the start of every epoch and held constant
/// within it.
RmnTrainResult train_rmn(const Corpus& corpus, const EmbeddingTable& emb, const RmnConfig& model,
                         const TrainConfig& config, const EpochCallback& on_epoch = {});

struct GradCheckReport {
  double max_rel_error = 0.0;
  struct Tensor {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // a ReLU or hinge kink lay inside +-eps
  };
  std::vector<Tensor> tensors;
};

/// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

/// Central-difference check of an arbitrary function at the listed
/// coordinates of x.
double finite_difference_error(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> x, std::span<const double> analytic,
                               std::span<const std::size_t> coords, double eps = 1e-5);

/// Compares the analytic gradient of J + lambda X for one article against
/// central differences on at least `samples` coordinates per tensor (all of
/// them if fewer). Dropout is off.
GradCheckReport grad_check(const ModelParams& params, const EncodedArticle& article,
                           const EmbeddingTable& emb, std::span<const Vector> negatives,
                           double lambda, double eps = 1e-5, std::size_t samples = 20,
                           std::uint64_t seed = 0);
GradCheckReport grad_check(const RmnParams& params, const RmnArticle& article,
                           const EmbeddingTable& emb, std::span<const Vector> negatives,
                           double lambda, std::span<const double> prev_dist = {},
                           double eps = 1e-5, std::size_t samples = 20, std::uint64_t seed = 0);

/// Random parameters, Xavier-initialized in tensor declaration order.
ModelParams init_params(const ModelConfig& config, ModelIndex index, std::mt19937_64& rng);
RmnParams init_params(const RmnConfig& config, ModelIndex index,
                      std::vector<std::string> stopwords, std::mt19937_64& rng);

}  // namespace relnet
