#pragma once

#include <span>
#include <vector>

#include "mvfill/core.hpp"
#include "mvfill/projection_head.hpp"
#include "mvfill/random.hpp"

namespace mvfill {

// alpha[i][j] = 2 (1 - f_i . g_j) between the i-th anchor-view embedding
// and the j-th positive-view embedding. For unit inputs every entry is in
// [0, 4] and equals the squared Euclidean distance.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t classes)
      : n_(classes), values_(classes * classes, 0.0) {}

  std::size_t classes() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

  DistanceMatrix transposed() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

DistanceMatrix distance_matrix(std::span<const std::vector<double>> anchors,
                               std::span<const std::vector<double>> positives);

// Weighted soft-margin triplet loss ln(1 + e^{gamma (d_ap - d_an)}), averaged
// over all 2 C (C - 1) ordered triplets. Each class pair is used in both
// directions: the anchor-view sample against the other classes' positive-view
// samples, and the positive-view sample against the other classes'
// anchor-view samples.
double triplet_loss(const DistanceMatrix& alpha, double gamma);

// dLoss/dalpha for triplet_loss.
DistanceMatrix triplet_loss_grad_alpha(const DistanceMatrix& alpha,
                                       double gamma);

// One cross-view pair per class; pairs[i] holds class i.
struct TripletPair {
  const EmbeddingRecord* anchor = nullptr;
  const EmbeddingRecord* positive = nullptr;
};

struct TripletBatch {
  std::vector<TripletPair> pairs;
};

// Throws DataError unless the batch has one cross-view pair per class.
void validate_batch(const TripletBatch& batch);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> anchor_head;    // same layout as the head weights
  std::vector<double> positive_head;
};

// Analytic gradient of triplet_loss with respect to both heads' weights,
// through the linear distance and the normalization Jacobian
// (I - f f^T) / ||W^T x||.
LossGradient loss_gradient(const TripletBatch& batch,
                           const ProjectionHead& anchor_head,
                           const ProjectionHead& positive_head, double gamma);

// Loss only; shares the forward path with loss_gradient.
double batch_loss(const TripletBatch& batch, const ProjectionHead& anchor_head,
                  const ProjectionHead& positive_head, double gamma);

// Draws random within-class cross-view pairs. The per-class record lists are
// built once, so repeated draws are cheap.
class BatchSampler {
 public:
  BatchSampler(const EmbeddingSet& train_set, ViewId anchor_view = {0},
               ViewId positive_view = {1});

  TripletBatch sample(Rng& rng) const;
  std::size_t classes() const { return by_class_.size(); }

 private:
  struct ClassRecords {
    std::vector<const EmbeddingRecord*> anchor;
    std::vector<const EmbeddingRecord*> positive;
  };
  std::vector<ClassRecords> by_class_;
};

TripletBatch sample_batch(const EmbeddingSet& train_set, Rng& rng);

// Unit-normalized mean of the available views' embeddings.
std::vector<double> fuse_available_views(
    std::span<const std::vector<double>> features);

}  // namespace mvfill
