#include "mvfill/io.hpp"

#include "mvfill/binary.hpp"
#include "mvfill/errors.hpp"

namespace mvfill {

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set) {
  ByteWriter w;
  w.bytes("MVEB");
  w.u16(kFormatVersion);
  w.u32(set.dim());
  w.u16(set.views());
  w.u16(set.classes());
  w.u64(set.size());
  for (const auto& r : set.records()) {
    w.short_string(r.id);
    w.u16(r.label.index);
    w.u16(r.view.tag);
    w.f32s(r.vector);
  }
  return w.buffer();
}

EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("MVEB");
  const auto version_at = r.offset();
  if (r.u16() != kFormatVersion) {
    throw FormatError("unsupported embedding file version", version_at);
  }
  const std::uint32_t dim = r.u32();
  const std::uint16_t views = r.u16();
  const std::uint16_t classes = r.u16();
  const std::uint64_t count = r.u64();

  EmbeddingSet set(dim, views, classes);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto record_at = r.offset();
    EmbeddingRecord rec;
    rec.id = r.short_string();
    rec.label.index = r.u16();
    rec.view.tag = r.u16();
    const std::uint64_t need = std::uint64_t{dim} * 4;
    // A short final record is reported as a dimension error rather than a
    // generic truncation.
    if (r.remaining() < need && i + 1 == count && r.remaining() % 4 == 0) {
      throw DimensionMismatch(dim, r.remaining() / 4);
    }
    rec.vector.resize(dim);
    for (auto& x : rec.vector) x = r.f32();
    try {
      set.add(std::move(rec));
    } catch (const DimensionMismatch&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(e.what(), record_at);
    }
  }
  r.expect_end();
  return set;
}

void write_embedding_file(const EmbeddingSet& set,
                          const std::filesystem::path& path) {
  write_file_bytes(path, encode_embeddings(set));
}

EmbeddingSet read_embedding_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_embeddings(bytes);
}

std::vector<std::uint8_t> encode_scores(const ScoreSet& scores) {
  ByteWriter w;
  w.bytes("MVSC");
  w.u16(kFormatVersion);
  w.u16(scores.classes());
  w.u64(scores.size());
  for (const auto& s : scores.records()) {
    w.short_string(s.id);
    w.u16(s.label);
    for (double p : s.probs) w.f32(static_cast<float>(p));
  }
  return w.buffer();
}

ScoreSet decode_scores(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("MVSC");
  const auto version_at = r.offset();
  if (r.u16() != kFormatVersion) {
    throw FormatError("unsupported score file version", version_at);
  }
  const std::uint16_t classes = r.u16();
  const std::uint64_t count = r.u64();
  ScoreSet set(classes);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto record_at = r.offset();
    ScoreVector s;
    s.id = r.short_string();
    s.label = r.u16();
    s.probs.resize(classes);
    for (auto& p : s.probs) p = r.f32();
    try {
      set.add(std::move(s));
    } catch (const Error& e) {
      throw FormatError(e.what(), record_at);
    }
  }
  r.expect_end();
  return set;
}

void write_score_file(const ScoreSet& scores,
                      const std::filesystem::path& path) {
  write_file_bytes(path, encode_scores(scores));
}

ScoreSet read_score_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_scores(bytes);
}

}  // namespace mvfill
