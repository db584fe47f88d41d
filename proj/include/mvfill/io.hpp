#pragma once

#include <filesystem>

#include "mvfill/core.hpp"

namespace mvfill {

inline constexpr std::uint16_t kFormatVersion = 1;

// Embedding file "MVEB". Vectors are stored as f32, so a write/read
// round-trip is bit-exact.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set);
EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes);
void write_embedding_file(const EmbeddingSet& set,
                          const std::filesystem::path& path);
EmbeddingSet read_embedding_file(const std::filesystem::path& path);

// Score file "MVSC". Label 0xFFFF marks an unknown ground truth.
std::vector<std::uint8_t> encode_scores(const ScoreSet& scores);
ScoreSet decode_scores(std::span<const std::uint8_t> bytes);
void write_score_file(const ScoreSet& scores, const std::filesystem::path& path);
ScoreSet read_score_file(const std::filesystem::path& path);

}  // namespace mvfill
