#pragma once

#include <array>
#include <cstdint>

#include "mvfill/core.hpp"

namespace mvfill {

// Two-view Gaussian cluster data with simulated per-view classifiers.
//
// Each class has a latent unit direction shared by both views. A view's class
// center is normalize(rho * Q_v s_c + sqrt(1 - rho^2) t_vc), where Q_v is a
// random orthonormal embedding of the latent space and t_vc is a
// view-specific random unit vector. Samples add isotropic noise of total
// scale sigma. Independently in each view, a sample is ambiguous with
// probability confuse_prob: it is additionally shifted toward a random other
// class's center by confuse_scale * sigma * U(0.5, 1.5). Ambiguous samples
// mislead both retrieval and classification in that view only, so the true
// counterpart carries information that retrieved neighbours do not.
//
// The simulated classifier of view v looks at the sample through extra noise
// of scale score_noise[v] and emits
// softmax(-score_sharpness * squared distance to each class center).
struct SyntheticConfig {
  int classes = 8;
  int per_class = 50;  // samples per class, each present in both views
  std::uint32_t dim_v1 = 32;
  std::uint32_t dim_v2 = 32;
  double rho = 0.9;
  double sigma = 0.3;
  double confuse_prob = 0.08;
  double confuse_scale = 2.2;
  std::array<double, 2> score_noise = {1.6, 1.6};
  double score_sharpness = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SyntheticConfig& config);

struct SyntheticData {
  std::array<EmbeddingSet, 2> views;
  std::array<ScoreSet, 2> scores;
};

SyntheticData generate_synthetic(const SyntheticConfig& config);

}  // namespace mvfill
