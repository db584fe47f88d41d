#include "mvfill/projection_head.hpp"

#include <cmath>

#include "mvfill/binary.hpp"
#include "mvfill/errors.hpp"
#include "mvfill/io.hpp"
#include "mvfill/random.hpp"

namespace mvfill {

ProjectionHead::ProjectionHead(std::uint32_t d_in, std::uint32_t d_out,
                               ViewId view, std::vector<double> weights)
    : d_in_(d_in), d_out_(d_out), view_(view), weights_(std::move(weights)) {
  if (weights_.size() != std::size_t{d_in} * d_out) {
    throw DimensionMismatch(std::size_t{d_in} * d_out, weights_.size());
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw NumericError("non-finite projection weight");
  }
}

ProjectionHead ProjectionHead::random(std::uint32_t d_in, std::uint32_t d_out,
                                      ViewId view, std::uint64_t seed) {
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  std::vector<double> w(std::size_t{d_in} * d_out);
  for (double& x : w) {
    x = static_cast<float>(rng.uniform(-bound, bound));
  }
  return {d_in, d_out, view, std::move(w)};
}

ProjectionHead ProjectionHead::identity(std::uint32_t dim, ViewId view) {
  std::vector<double> w(std::size_t{dim} * dim, 0.0);
  for (std::uint32_t i = 0; i < dim; ++i) w[std::size_t{i} * dim + i] = 1.0;
  return {dim, dim, view, std::move(w)};
}

std::vector<double> ProjectionHead::project(std::span<const double> x) const {
  if (x.size() != d_in_) throw DimensionMismatch(d_in_, x.size());
  std::vector<double> out(d_out_, 0.0);
  for (std::uint32_t i = 0; i < d_in_; ++i) {
    const double xi = x[i];
    const double* row = weights_.data() + std::size_t{i} * d_out_;
    for (std::uint32_t j = 0; j < d_out_; ++j) out[j] += xi * row[j];
  }
  return out;
}

void ProjectionHead::round_to_float() {
  for (double& w : weights_) w = static_cast<float>(w);
}

std::vector<double> apply_head(const ProjectionHead& head,
                               std::span<const double> x) {
  const auto u = head.project(x);
  return l2_normalize(std::span<const double>(u));
}

std::vector<double> apply_head(const ProjectionHead& head,
                               const EmbeddingRecord& record) {
  return apply_head(head, to_double(record.vector));
}

std::vector<std::uint8_t> encode_checkpoint(const ProjectionHead& head) {
  ByteWriter w;
  w.bytes("MVPH");
  w.u16(kFormatVersion);
  w.u32(head.d_in());
  w.u32(head.d_out());
  w.u16(head.view().tag);
  for (double x : head.weights()) w.f32(static_cast<float>(x));
  return w.buffer();
}

ProjectionHead decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("MVPH");
  const auto version_at = r.offset();
  if (r.u16() != kFormatVersion) {
    throw FormatError("unsupported checkpoint version", version_at);
  }
  const std::uint32_t d_in = r.u32();
  const std::uint32_t d_out = r.u32();
  const ViewId view{r.u16()};
  const std::uint64_t n = std::uint64_t{d_in} * d_out;
  if (r.remaining() != n * 4) {
    throw FormatError("checkpoint weight block has wrong size", r.offset());
  }
  std::vector<double> w(n);
  for (double& x : w) x = r.f32();
  return {d_in, d_out, view, std::move(w)};
}

void write_checkpoint(const ProjectionHead& head,
                      const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(head));
}

ProjectionHead read_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_checkpoint(bytes);
}

std::uint64_t checkpoint_checksum(const ProjectionHead& head) {
  return fnv1a64(encode_checkpoint(head));
}

}  // namespace mvfill
