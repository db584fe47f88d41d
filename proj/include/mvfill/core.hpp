#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mvfill {

// View tag. 0 and 1 are the two views of a pair; larger values are only
// meaningful for datasets that declare more views.
struct ViewId {
  std::uint16_t tag = 0;

  friend auto operator<=>(const ViewId&, const ViewId&) = default;
};

// Dense class index in [0, C).
struct ClassLabel {
  std::uint16_t index = 0;

  friend auto operator<=>(const ClassLabel&, const ClassLabel&) = default;
};

inline constexpr std::uint16_t kUnknownLabel = 0xFFFF;

struct EmbeddingRecord {
  std::string id;
  ClassLabel label;
  ViewId view;
  std::vector<float> vector;
};

// A collection of records sharing one dimension. A multi-view sample keeps
// the same id in every view, so uniqueness is on (view, id).
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  EmbeddingSet(std::uint32_t dim, std::uint16_t views, std::uint16_t classes);

  // Validates dimension, finiteness, view range and (view, id) uniqueness.
  void add(EmbeddingRecord record);

  std::uint32_t dim() const { return dim_; }
  std::uint16_t views() const { return views_; }
  std::uint16_t classes() const { return classes_; }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // True when every vector has unit Euclidean norm within 1e-6.
  bool normalized() const;

  // Records of one view, in insertion order.
  EmbeddingSet view_subset(ViewId view) const;
  // Records whose id is in `ids` (sorted), in insertion order.
  EmbeddingSet id_subset(std::span<const std::string> sorted_ids) const;

  const EmbeddingRecord* find(ViewId view, const std::string& id) const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&);

 private:
  std::uint32_t dim_ = 0;
  std::uint16_t views_ = 0;
  std::uint16_t classes_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::map<std::pair<std::uint16_t, std::string>, std::size_t> by_key_;
};

bool operator==(const EmbeddingRecord& a, const EmbeddingRecord& b);

// Merges per-view sets into one multi-view set. Dimensions must agree.
EmbeddingSet merge_views(std::span<const EmbeddingSet> parts);

struct ScoreVector {
  std::string id;
  std::uint16_t label = kUnknownLabel;  // ground truth when known
  std::vector<double> probs;

  bool has_label() const { return label != kUnknownLabel; }
};

// Throws DataError unless entries lie in [0,1] and sum to 1 within 1e-5.
void validate_scores(const ScoreVector& scores);

// Per-view classifier outputs keyed by sample id.
class ScoreSet {
 public:
  ScoreSet() = default;
  explicit ScoreSet(std::uint16_t classes) : classes_(classes) {}

  // Validates length, simplex membership and id uniqueness.
  void add(ScoreVector scores);

  std::uint16_t classes() const { return classes_; }
  const std::vector<ScoreVector>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const ScoreVector* find(const std::string& id) const;

 private:
  std::uint16_t classes_ = 0;
  std::vector<ScoreVector> records_;
  std::map<std::string, std::size_t> by_id_;
};

// ---- vector math; accumulation is always in double ----

double dot(std::span<const double> a, std::span<const double> b);
double dot(std::span<const float> a, std::span<const double> b);
double norm(std::span<const double> v);

// Throws ZeroVector when the norm is below 1e-12.
std::vector<double> l2_normalize(std::span<const double> v);
std::vector<double> l2_normalize(std::span<const float> v);

std::vector<double> to_double(std::span<const float> v);

}  // namespace mvfill
