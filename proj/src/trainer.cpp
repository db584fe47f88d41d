#include "mvfill/trainer.hpp"

#include <cmath>
#include <fstream>

#include "mvfill/errors.hpp"
#include "mvfill/random.hpp"
#include "mvfill/triplet.hpp"

namespace mvfill {

void validate(const TrainConfig& c) {
  if (c.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(c.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(c.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(c.adam_beta1 > 0.0 && c.adam_beta1 < 1.0) ||
      !(c.adam_beta2 > 0.0 && c.adam_beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (c.batch_per_epoch < 0) {
    throw ConfigError("batch_per_epoch must be non-negative");
  }
  if (c.d_out == 0) throw ConfigError("d_out must be positive");
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0),
      v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  beta1_pow_ *= beta1_;
  beta2_pow_ *= beta2_;
  const double c1 = 1.0 - beta1_pow_;
  const double c2 = 1.0 - beta2_pow_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

std::pair<ProjectionHead, ProjectionHead> initial_heads(
    const EmbeddingSet& train_set, const TrainConfig& config) {
  return {ProjectionHead::random(train_set.dim(), config.d_out, ViewId{0},
                                 derive_seed(config.seed, 0)),
          ProjectionHead::random(train_set.dim(), config.d_out, ViewId{1},
                                 derive_seed(config.seed, 1))};
}

TrainResult train(const EmbeddingSet& train_set, const TrainConfig& config) {
  validate(config);
  auto [anchor, positive] = initial_heads(train_set, config);
  TrainResult result{anchor, positive, {}};
  if (config.epochs == 0) return result;

  const BatchSampler sampler(train_set);
  if (sampler.classes() < 2) throw DegenerateBatch(sampler.classes());

  int batches = config.batch_per_epoch;
  if (batches == 0) {
    std::size_t n_anchor = 0;
    for (const auto& r : train_set.records()) n_anchor += r.view.tag == 0;
    batches = static_cast<int>((n_anchor + sampler.classes() - 1) /
                               sampler.classes());
  }

  Rng rng(derive_seed(config.seed, 2));
  Adam adam_a(anchor.weights().size(), config.learning_rate, config.adam_beta1,
              config.adam_beta2, config.adam_epsilon);
  Adam adam_p(positive.weights().size(), config.learning_rate,
              config.adam_beta1, config.adam_beta2, config.adam_epsilon);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double sum = 0.0;
    for (int b = 0; b < batches; ++b) {
      const TripletBatch batch = sampler.sample(rng);
      const LossGradient lg = loss_gradient(batch, anchor, positive, config.gamma);
      if (!std::isfinite(lg.loss)) {
        throw NumericError("training loss became non-finite at epoch " +
                           std::to_string(epoch));
      }
      sum += lg.loss;
      adam_a.step(anchor.mutable_weights(), lg.anchor_head);
      adam_p.step(positive.mutable_weights(), lg.positive_head);
    }
    result.loss_trace.push_back(sum / batches);
  }
  anchor.round_to_float();
  positive.round_to_float();
  result.anchor_head = std::move(anchor);
  result.positive_head = std::move(positive);
  return result;
}

void write_loss_trace(const std::vector<double>& trace,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t e = 0; e < trace.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, trace[e]);
    out << buf;
  }
}

}  // namespace mvfill
