#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvfill/core.hpp"
#include "mvfill/projection_head.hpp"

namespace mvfill {

struct IndexEntry {
  std::string id;
  ClassLabel label;
  std::vector<float> vector;  // unit norm
};

// Projected embeddings of the auxiliary database (the missing view).
// Immutable once built; queries may run concurrently.
class RetrievalIndex {
 public:
  RetrievalIndex() = default;
  RetrievalIndex(ViewId view, std::uint32_t dim, std::vector<IndexEntry> entries);

  ViewId view() const { return view_; }
  std::uint32_t dim() const { return dim_; }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const RetrievalIndex& a, const RetrievalIndex& b);

 private:
  ViewId view_;
  std::uint32_t dim_ = 0;
  std::vector<IndexEntry> entries_;
};

struct RankedItem {
  std::string id;
  ClassLabel label;
  double distance = 0.0;
};

// Sorted by ascending distance, ties by ascending id.
struct RankedList {
  std::string query_id;
  std::vector<RankedItem> items;
};

// Projects every record of `set` with `head`. All records must carry the
// head's view.
RetrievalIndex build_index(const EmbeddingSet& set, const ProjectionHead& head);

// Exhaustive scan with alpha = 2 (1 - q . e).
RankedList rank(std::span<const double> query, const RetrievalIndex& index,
                std::string query_id = {});

struct TopK {
  RankedList list;
  std::optional<std::string> warning;  // set when k exceeded the list size
};

TopK top_k(const RankedList& list, std::size_t k);

// Index cache "MVIX": magic, version u16, head checksum u64, view u16,
// dim u32, entry count u64, then per entry id/label/f32 vector.
void write_index_cache(const RetrievalIndex& index, std::uint64_t head_checksum,
                       const std::filesystem::path& path);
// Throws StaleCache when the stored checksum differs from `head_checksum`.
RetrievalIndex read_index_cache(const std::filesystem::path& path,
                                std::uint64_t head_checksum);

// Loads the cache when it is present and current, otherwise builds the index
// and writes the cache.
RetrievalIndex load_or_build_index(const EmbeddingSet& set,
                                   const ProjectionHead& head,
                                   const std::filesystem::path& cache_path);

}  // namespace mvfill
