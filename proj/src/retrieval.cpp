#include "mvfill/retrieval.hpp"

#include <algorithm>
#include <bit>

#include "mvfill/binary.hpp"
#include "mvfill/errors.hpp"
#include "mvfill/io.hpp"

namespace mvfill {

RetrievalIndex::RetrievalIndex(ViewId view, std::uint32_t dim,
                               std::vector<IndexEntry> entries)
    : view_(view), dim_(dim), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.vector.size() != dim_) throw DimensionMismatch(dim_, e.vector.size());
  }
}

bool operator==(const RetrievalIndex& a, const RetrievalIndex& b) {
  if (a.view_ != b.view_ || a.dim_ != b.dim_ ||
      a.entries_.size() != b.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.id != y.id || x.label != y.label || x.vector != y.vector) return false;
  }
  return true;
}

RetrievalIndex build_index(const EmbeddingSet& set, const ProjectionHead& head) {
  std::vector<IndexEntry> entries;
  entries.reserve(set.size());
  for (const auto& r : set.records()) {
    if (r.view != head.view()) {
      throw DataError("record '" + r.id + "' is in view " +
                      std::to_string(r.view.tag) + ", index head is view " +
                      std::to_string(head.view().tag));
    }
    const auto unit = apply_head(head, r);
    entries.push_back({r.id, r.label, {unit.begin(), unit.end()}});
  }
  return {head.view(), head.d_out(), std::move(entries)};
}

RankedList rank(std::span<const double> query, const RetrievalIndex& index,
                std::string query_id) {
  if (index.empty()) throw EmptyIndex();
  if (query.size() != index.dim()) {
    throw DimensionMismatch(index.dim(), query.size());
  }
  RankedList out{std::move(query_id), {}};
  out.items.reserve(index.size());
  for (const auto& e : index.entries()) {
    out.items.push_back({e.id, e.label, 2.0 * (1.0 - dot(e.vector, query))});
  }
  std::sort(out.items.begin(), out.items.end(),
            [](const RankedItem& a, const RankedItem& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.id < b.id;
            });
  return out;
}

TopK top_k(const RankedList& list, std::size_t k) {
  if (k == 0) throw ConfigError("top-k needs k >= 1");
  TopK out;
  out.list.query_id = list.query_id;
  const std::size_t n = std::min(k, list.items.size());
  out.list.items.assign(list.items.begin(), list.items.begin() + n);
  if (k > list.items.size()) {
    out.warning = "k=" + std::to_string(k) + " exceeds ranked list size " +
                  std::to_string(list.items.size()) + "; clamped";
  }
  return out;
}

void write_index_cache(const RetrievalIndex& index, std::uint64_t head_checksum,
                       const std::filesystem::path& path) {
  ByteWriter w;
  w.bytes("MVIX");
  w.u16(kFormatVersion);
  w.u64(head_checksum);
  w.u16(index.view().tag);
  w.u32(index.dim());
  w.u64(index.size());
  for (const auto& e : index.entries()) {
    w.short_string(e.id);
    w.u16(e.label.index);
    w.f32s(e.vector);
  }
  write_file_bytes(path, w.buffer());
}

RetrievalIndex read_index_cache(const std::filesystem::path& path,
                                std::uint64_t head_checksum) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes);
  r.expect_magic("MVIX");
  const auto version_at = r.offset();
  if (r.u16() != kFormatVersion) {
    throw FormatError("unsupported index cache version", version_at);
  }
  if (r.u64() != head_checksum) throw StaleCache();
  const ViewId view{r.u16()};
  const std::uint32_t dim = r.u32();
  const std::uint64_t count = r.u64();
  std::vector<IndexEntry> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    IndexEntry e;
    e.id = r.short_string();
    e.label.index = r.u16();
    e.vector.resize(dim);
    for (auto& x : e.vector) x = r.f32();
    entries.push_back(std::move(e));
  }
  r.expect_end();
  return {view, dim, std::move(entries)};
}

RetrievalIndex load_or_build_index(const EmbeddingSet& set,
                                   const ProjectionHead& head,
                                   const std::filesystem::path& cache_path) {
  const std::uint64_t checksum = checkpoint_checksum(head);
  if (std::filesystem::exists(cache_path)) {
    try {
      return read_index_cache(cache_path, checksum);
    } catch (const StaleCache&) {
      // fall through and rebuild
    }
  }
  RetrievalIndex index = build_index(set, head);
  write_index_cache(index, checksum, cache_path);
  return index;
}

}  // namespace mvfill
