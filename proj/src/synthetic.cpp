#include "mvfill/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mvfill/errors.hpp"
#include "mvfill/random.hpp"

namespace mvfill {
namespace {

using Vec = std::vector<double>;

Vec gaussian(Rng& rng, std::size_t n) {
  Vec v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

Vec random_unit(Rng& rng, std::size_t n) {
  return l2_normalize(std::span<const double>(gaussian(rng, n)));
}

// dim x latent matrix with orthonormal columns (Gram-Schmidt on Gaussians),
// stored column-major.
std::vector<Vec> orthonormal_columns(Rng& rng, std::size_t dim,
                                     std::size_t latent) {
  std::vector<Vec> cols;
  while (cols.size() < latent) {
    Vec v = gaussian(rng, dim);
    for (const auto& c : cols) {
      const double p = dot(v, c);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= p * c[i];
    }
    const double n = norm(v);
    if (n < 1e-8) continue;
    for (double& x : v) x /= n;
    cols.push_back(std::move(v));
  }
  return cols;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

}  // namespace

void validate(const SyntheticConfig& c) {
  if (c.classes < 2 || c.classes >= kUnknownLabel) {
    throw ConfigError("synthetic data needs at least 2 classes");
  }
  if (c.per_class < 4) throw ConfigError("synthetic data needs per_class >= 4");
  if (c.dim_v1 == 0 || c.dim_v2 == 0) {
    throw ConfigError("synthetic dimensions must be positive");
  }
  if (!(c.rho >= 0.0 && c.rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  if (!(c.sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (!(c.confuse_prob >= 0.0 && c.confuse_prob <= 1.0)) {
    throw ConfigError("confuse_prob must lie in [0, 1]");
  }
  if (!(c.confuse_scale >= 0.0)) throw ConfigError("confuse_scale must be non-negative");
  if (!(c.score_noise[0] >= 0.0 && c.score_noise[1] >= 0.0)) {
    throw ConfigError("score_noise must be non-negative");
  }
  if (!(c.score_sharpness > 0.0)) {
    throw ConfigError("score_sharpness must be positive");
  }
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  validate(config);
  const std::array<std::uint32_t, 2> dims = {config.dim_v1, config.dim_v2};
  const std::size_t latent = std::min(config.dim_v1, config.dim_v2);
  const auto classes = static_cast<std::uint16_t>(config.classes);

  Rng structure(derive_seed(config.seed, 0));
  std::vector<Vec> shared;
  for (int c = 0; c < config.classes; ++c) {
    shared.push_back(random_unit(structure, latent));
  }

  std::array<std::vector<Vec>, 2> centers;
  for (int v = 0; v < 2; ++v) {
    const auto q = orthonormal_columns(structure, dims[v], latent);
    for (int c = 0; c < config.classes; ++c) {
      const Vec own = random_unit(structure, dims[v]);
      Vec center(dims[v], 0.0);
      for (std::size_t l = 0; l < latent; ++l) {
        for (std::size_t i = 0; i < dims[v]; ++i) {
          center[i] += config.rho * shared[c][l] * q[l][i];
        }
      }
      const double keep = std::sqrt(1.0 - config.rho * config.rho);
      for (std::size_t i = 0; i < dims[v]; ++i) center[i] += keep * own[i];
      centers[v].push_back(l2_normalize(std::span<const double>(center)));
    }
  }

  SyntheticData data;
  for (int v = 0; v < 2; ++v) {
    data.views[v] = EmbeddingSet(dims[v], 2, classes);
    data.scores[v] = ScoreSet(classes);
  }

  Rng samples(derive_seed(config.seed, 1));
  char id[32];
  for (int c = 0; c < config.classes; ++c) {
    for (int s = 0; s < config.per_class; ++s) {
      std::snprintf(id, sizeof id, "c%02d-%04d", c, s);
      for (int v = 0; v < 2; ++v) {
        const double per_dim = config.sigma / std::sqrt(static_cast<double>(dims[v]));
        Vec x = centers[v][c];
        for (double& xi : x) xi += per_dim * samples.normal();
        if (samples.uniform() < config.confuse_prob) {
          auto other = static_cast<int>(samples.index(config.classes - 1));
          if (other >= c) ++other;
          Vec toward(dims[v]);
          for (std::size_t i = 0; i < dims[v]; ++i) {
            toward[i] = centers[v][other][i] - centers[v][c][i];
          }
          toward = l2_normalize(std::span<const double>(toward));
          const double shift =
              config.confuse_scale * config.sigma * samples.uniform(0.5, 1.5);
          for (std::size_t i = 0; i < dims[v]; ++i) x[i] += shift * toward[i];
        }

        const double obs_dim =
            config.score_noise[v] / std::sqrt(static_cast<double>(dims[v]));
        Vec seen = x;
        for (double& yi : seen) yi += obs_dim * samples.normal();
        Vec logits(config.classes);
        for (int k = 0; k < config.classes; ++k) {
          logits[k] = -config.score_sharpness * squared_distance(seen, centers[v][k]);
        }

        EmbeddingRecord rec{id, ClassLabel{static_cast<std::uint16_t>(c)},
                            ViewId{static_cast<std::uint16_t>(v)},
                            std::vector<float>(x.begin(), x.end())};
        data.views[v].add(std::move(rec));

        ScoreVector sv{id, static_cast<std::uint16_t>(c), softmax(logits)};
        // Match what a score file stores so in-memory and on-disk data agree.
        for (double& p : sv.probs) p = static_cast<float>(p);
        data.scores[v].add(std::move(sv));
      }
    }
  }
  return data;
}

}  // namespace mvfill
