#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvfill/core.hpp"
#include "mvfill/projection_head.hpp"

namespace mvfill {

struct TrainConfig {
  int epochs = 200;
  double gamma = 10.0;
  double learning_rate = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  // 0 means ceil(N_train / C), N_train counted in the anchor view.
  int batch_per_epoch = 0;
  std::uint32_t d_out = 128;
};

// Throws ConfigError on out-of-domain values.
void validate(const TrainConfig& config);

// Adam over one flat parameter vector.
class Adam {
 public:
  Adam(std::size_t size, double lr, double beta1, double beta2, double eps);

  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
};

struct TrainResult {
  ProjectionHead anchor_head;    // view 0
  ProjectionHead positive_head;  // view 1
  std::vector<double> loss_trace;  // mean batch loss per epoch
};

// Heads initialized for a training set, as train() would do it.
std::pair<ProjectionHead, ProjectionHead> initial_heads(
    const EmbeddingSet& train_set, const TrainConfig& config);

// Trains both heads with Adam on random one-pair-per-class batches.
// Single-threaded and bit-reproducible for a given seed. The returned
// weights are rounded to f32, matching what a checkpoint stores.
TrainResult train(const EmbeddingSet& train_set, const TrainConfig& config);

void write_loss_trace(const std::vector<double>& trace,
                      const std::filesystem::path& path);

}  // namespace mvfill
