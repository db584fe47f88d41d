#include "mvfill/triplet.hpp"

#include <cmath>

#include "mvfill/errors.hpp"

namespace mvfill {
namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_alpha(const DistanceMatrix& alpha, double gamma) {
  if (alpha.classes() < 2) throw DegenerateBatch(alpha.classes());
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
}

struct Forward {
  std::vector<std::vector<double>> anchor_raw;  // x
  std::vector<std::vector<double>> positive_raw;
  std::vector<std::vector<double>> f;  // normalized anchor-view outputs
  std::vector<std::vector<double>> g;
  std::vector<double> f_norm;  // ||W^T x|| before normalization
  std::vector<double> g_norm;
  DistanceMatrix alpha;
};

Forward forward(const TripletBatch& batch, const ProjectionHead& anchor_head,
                const ProjectionHead& positive_head) {
  validate_batch(batch);
  if (anchor_head.d_out() != positive_head.d_out()) {
    throw DimensionMismatch(anchor_head.d_out(), positive_head.d_out());
  }
  Forward fw;
  for (const auto& pair : batch.pairs) {
    auto run = [](const ProjectionHead& head, const EmbeddingRecord& rec,
                  auto& raw, auto& out, auto& norms) {
      raw.push_back(to_double(rec.vector));
      const auto u = head.project(raw.back());
      const double n = norm(u);
      if (!(n >= 1e-12)) throw ZeroVector();
      std::vector<double> unit(u);
      for (double& v : unit) v /= n;
      out.push_back(std::move(unit));
      norms.push_back(n);
    };
    run(anchor_head, *pair.anchor, fw.anchor_raw, fw.f, fw.f_norm);
    run(positive_head, *pair.positive, fw.positive_raw, fw.g, fw.g_norm);
  }
  fw.alpha = distance_matrix(fw.f, fw.g);
  return fw;
}

// dL/dW for one head: sum over samples of x (dL/du)^T, where
// dL/du = (I - f f^T) dL/df / ||u||.
std::vector<double> head_gradient(const ProjectionHead& head,
                                  const std::vector<std::vector<double>>& raw,
                                  const std::vector<std::vector<double>>& unit,
                                  const std::vector<double>& norms,
                                  const std::vector<std::vector<double>>& dunit) {
  const std::size_t d_in = head.d_in();
  const std::size_t d_out = head.d_out();
  std::vector<double> grad(d_in * d_out, 0.0);
  std::vector<double> du(d_out);
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const double proj = dot(unit[s], dunit[s]);
    for (std::size_t o = 0; o < d_out; ++o) {
      du[o] = (dunit[s][o] - unit[s][o] * proj) / norms[s];
    }
    for (std::size_t i = 0; i < d_in; ++i) {
      const double xi = raw[s][i];
      double* row = grad.data() + i * d_out;
      for (std::size_t o = 0; o < d_out; ++o) row[o] += xi * du[o];
    }
  }
  return grad;
}

}  // namespace

DistanceMatrix DistanceMatrix::transposed() const {
  DistanceMatrix t(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

DistanceMatrix distance_matrix(std::span<const std::vector<double>> anchors,
                               std::span<const std::vector<double>> positives) {
  if (anchors.size() != positives.size()) {
    throw LengthMismatch(anchors.size(), positives.size());
  }
  DistanceMatrix alpha(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = 0; j < positives.size(); ++j) {
      alpha(i, j) = 2.0 * (1.0 - dot(anchors[i], positives[j]));
    }
  }
  return alpha;
}

double triplet_loss(const DistanceMatrix& alpha, double gamma) {
  check_alpha(alpha, gamma);
  const std::size_t n = alpha.classes();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d_ap = alpha(i, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      total += softplus(gamma * (d_ap - alpha(i, j)));
      total += softplus(gamma * (d_ap - alpha(j, i)));
    }
  }
  return total / static_cast<double>(2 * n * (n - 1));
}

DistanceMatrix triplet_loss_grad_alpha(const DistanceMatrix& alpha,
                                       double gamma) {
  check_alpha(alpha, gamma);
  const std::size_t n = alpha.classes();
  const double scale = gamma / static_cast<double>(2 * n * (n - 1));
  DistanceMatrix grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d_ap = alpha(i, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      // alpha(i,j) is a negative for anchor-view sample i and for
      // positive-view sample j.
      const double w_row = scale * sigmoid(gamma * (d_ap - alpha(i, j)));
      const double w_col = scale * sigmoid(gamma * (d_ap - alpha(j, i)));
      grad(i, i) += w_row + w_col;
      grad(i, j) -= w_row;
      grad(j, i) -= w_col;
    }
  }
  return grad;
}

void validate_batch(const TripletBatch& batch) {
  if (batch.pairs.size() < 2) throw DegenerateBatch(batch.pairs.size());
  for (std::size_t i = 0; i < batch.pairs.size(); ++i) {
    const auto& p = batch.pairs[i];
    if (p.anchor == nullptr || p.positive == nullptr) {
      throw DataError("triplet batch has an empty slot");
    }
    if (p.anchor->label.index != i || p.positive->label.index != i) {
      throw DataError("triplet batch pair " + std::to_string(i) +
                      " is not labeled with its own class");
    }
    if (p.anchor->view == p.positive->view) {
      throw DataError("triplet batch pair " + std::to_string(i) +
                      " does not cross views");
    }
  }
}

LossGradient loss_gradient(const TripletBatch& batch,
                           const ProjectionHead& anchor_head,
                           const ProjectionHead& positive_head, double gamma) {
  const Forward fw = forward(batch, anchor_head, positive_head);
  const std::size_t n = fw.f.size();
  const std::size_t d_out = anchor_head.d_out();
  const DistanceMatrix ga = triplet_loss_grad_alpha(fw.alpha, gamma);

  // alpha_ij = 2 - 2 f_i.g_j
  std::vector<std::vector<double>> df(n, std::vector<double>(d_out, 0.0));
  std::vector<std::vector<double>> dg(n, std::vector<double>(d_out, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = -2.0 * ga(i, j);
      for (std::size_t o = 0; o < d_out; ++o) {
        df[i][o] += w * fw.g[j][o];
        dg[j][o] += w * fw.f[i][o];
      }
    }
  }

  LossGradient out;
  out.loss = triplet_loss(fw.alpha, gamma);
  out.anchor_head =
      head_gradient(anchor_head, fw.anchor_raw, fw.f, fw.f_norm, df);
  out.positive_head =
      head_gradient(positive_head, fw.positive_raw, fw.g, fw.g_norm, dg);
  return out;
}

double batch_loss(const TripletBatch& batch, const ProjectionHead& anchor_head,
                  const ProjectionHead& positive_head, double gamma) {
  return triplet_loss(forward(batch, anchor_head, positive_head).alpha, gamma);
}

BatchSampler::BatchSampler(const EmbeddingSet& train_set, ViewId anchor_view,
                           ViewId positive_view)
    : by_class_(train_set.classes()) {
  for (const auto& r : train_set.records()) {
    if (r.view == anchor_view) by_class_[r.label.index].anchor.push_back(&r);
    if (r.view == positive_view) by_class_[r.label.index].positive.push_back(&r);
  }
  for (std::size_t c = 0; c < by_class_.size(); ++c) {
    if (by_class_[c].anchor.empty()) {
      throw MissingClassView(static_cast<int>(c), anchor_view.tag);
    }
    if (by_class_[c].positive.empty()) {
      throw MissingClassView(static_cast<int>(c), positive_view.tag);
    }
  }
}

TripletBatch BatchSampler::sample(Rng& rng) const {
  TripletBatch batch;
  batch.pairs.reserve(by_class_.size());
  for (const auto& cls : by_class_) {
    TripletPair pair;
    pair.anchor = cls.anchor[rng.index(cls.anchor.size())];
    pair.positive = cls.positive[rng.index(cls.positive.size())];
    batch.pairs.push_back(pair);
  }
  return batch;
}

TripletBatch sample_batch(const EmbeddingSet& train_set, Rng& rng) {
  return BatchSampler(train_set).sample(rng);
}

std::vector<double> fuse_available_views(
    std::span<const std::vector<double>> features) {
  if (features.empty()) throw EmptyList();
  std::vector<double> mean(features.front().size(), 0.0);
  for (const auto& f : features) {
    if (f.size() != mean.size()) throw DimensionMismatch(mean.size(), f.size());
    for (std::size_t i = 0; i < f.size(); ++i) mean[i] += f[i];
  }
  for (double& x : mean) x /= static_cast<double>(features.size());
  return l2_normalize(std::span<const double>(mean));
}

}  // namespace mvfill
