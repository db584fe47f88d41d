#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mvfill/core.hpp"

namespace mvfill {

// Linear map followed by L2 normalization. Weights are held as a
// D_in x D_out row-major matrix W, and apply() computes normalize(W^T x).
class ProjectionHead {
 public:
  ProjectionHead() = default;
  ProjectionHead(std::uint32_t d_in, std::uint32_t d_out, ViewId view,
                 std::vector<double> weights);

  // Entries uniform in [-1/sqrt(d_in), 1/sqrt(d_in)].
  static ProjectionHead random(std::uint32_t d_in, std::uint32_t d_out,
                               ViewId view, std::uint64_t seed);
  static ProjectionHead identity(std::uint32_t dim, ViewId view);

  std::uint32_t d_in() const { return d_in_; }
  std::uint32_t d_out() const { return d_out_; }
  ViewId view() const { return view_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }
  double weight(std::size_t in, std::size_t out) const {
    return weights_[in * d_out_ + out];
  }

  // Un-normalized projection W^T x.
  std::vector<double> project(std::span<const double> x) const;

  // Rounds every weight to the nearest f32 so that a checkpoint
  // round-trip is lossless.
  void round_to_float();

  friend bool operator==(const ProjectionHead&, const ProjectionHead&) = default;

 private:
  std::uint32_t d_in_ = 0;
  std::uint32_t d_out_ = 0;
  ViewId view_;
  std::vector<double> weights_;
};

std::vector<double> apply_head(const ProjectionHead& head,
                               std::span<const double> x);
std::vector<double> apply_head(const ProjectionHead& head,
                               const EmbeddingRecord& record);

// Checkpoint "MVPH": magic, version u16, D_in u32, D_out u32, view u16,
// then D_in*D_out f32 weights in row-major order.
std::vector<std::uint8_t> encode_checkpoint(const ProjectionHead& head);
ProjectionHead decode_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const ProjectionHead& head,
                      const std::filesystem::path& path);
ProjectionHead read_checkpoint(const std::filesystem::path& path);

// FNV-1a of the encoded checkpoint; keys the index cache.
std::uint64_t checkpoint_checksum(const ProjectionHead& head);

}  // namespace mvfill
