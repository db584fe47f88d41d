#include "mvfill/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mvfill/errors.hpp"

namespace mvfill {

EmbeddingSet::EmbeddingSet(std::uint32_t dim, std::uint16_t views,
                           std::uint16_t classes)
    : dim_(dim), views_(views), classes_(classes) {}

void EmbeddingSet::add(EmbeddingRecord record) {
  if (record.vector.size() != dim_) {
    throw DimensionMismatch(dim_, record.vector.size());
  }
  if (record.view.tag >= views_) {
    throw DataError("record '" + record.id + "' has view " +
                    std::to_string(record.view.tag) + " but the set declares " +
                    std::to_string(views_) + " views");
  }
  if (record.label.index >= classes_) {
    throw DataError("record '" + record.id + "' has label " +
                    std::to_string(record.label.index) +
                    " outside the declared class count " +
                    std::to_string(classes_));
  }
  for (float x : record.vector) {
    if (!std::isfinite(x)) {
      throw DataError("record '" + record.id + "' has a non-finite entry");
    }
  }
  if (find(record.view, record.id) != nullptr) {
    throw DataError("duplicate id '" + record.id + "' in view " +
                    std::to_string(record.view.tag));
  }
  by_key_.emplace(std::pair{record.view.tag, record.id}, records_.size());
  records_.push_back(std::move(record));
}

bool EmbeddingSet::normalized() const {
  return std::all_of(records_.begin(), records_.end(), [](const auto& r) {
    return std::abs(norm(to_double(r.vector)) - 1.0) <= 1e-6;
  });
}

EmbeddingSet EmbeddingSet::view_subset(ViewId view) const {
  EmbeddingSet out(dim_, views_, classes_);
  for (const auto& r : records_) {
    if (r.view == view) out.add(r);
  }
  return out;
}

EmbeddingSet EmbeddingSet::id_subset(
    std::span<const std::string> sorted_ids) const {
  EmbeddingSet out(dim_, views_, classes_);
  for (const auto& r : records_) {
    if (std::binary_search(sorted_ids.begin(), sorted_ids.end(), r.id)) {
      out.add(r);
    }
  }
  return out;
}

const EmbeddingRecord* EmbeddingSet::find(ViewId view,
                                          const std::string& id) const {
  const auto it = by_key_.find(std::pair{view.tag, id});
  return it == by_key_.end() ? nullptr : &records_[it->second];
}

bool operator==(const EmbeddingRecord& a, const EmbeddingRecord& b) {
  if (a.id != b.id || a.label != b.label || a.view != b.view ||
      a.vector.size() != b.vector.size()) {
    return false;
  }
  // Bitwise comparison so that round-trips are checked exactly.
  return std::equal(a.vector.begin(), a.vector.end(), b.vector.begin(),
                    [](float x, float y) {
                      return std::bit_cast<std::uint32_t>(x) ==
                             std::bit_cast<std::uint32_t>(y);
                    });
}

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
  return a.dim_ == b.dim_ && a.views_ == b.views_ &&
         a.classes_ == b.classes_ && a.records_ == b.records_;
}

EmbeddingSet merge_views(std::span<const EmbeddingSet> parts) {
  if (parts.empty()) return {};
  std::uint16_t views = 0;
  std::uint16_t classes = 0;
  for (const auto& p : parts) {
    if (p.dim() != parts.front().dim()) {
      throw DimensionMismatch(parts.front().dim(), p.dim());
    }
    views = std::max(views, p.views());
    classes = std::max(classes, p.classes());
  }
  EmbeddingSet out(parts.front().dim(), views, classes);
  for (const auto& p : parts) {
    for (const auto& r : p.records()) out.add(r);
  }
  return out;
}

void validate_scores(const ScoreVector& scores) {
  double sum = 0.0;
  for (double p : scores.probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError("score vector '" + scores.id +
                      "' has an entry outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-5) {
    throw DataError("score vector '" + scores.id + "' sums to " +
                    std::to_string(sum));
  }
}

void ScoreSet::add(ScoreVector scores) {
  if (scores.probs.size() != classes_) {
    throw LengthMismatch(classes_, scores.probs.size());
  }
  if (scores.has_label() && scores.label >= classes_) {
    throw DataError("score vector '" + scores.id + "' has label " +
                    std::to_string(scores.label) + " outside [0, " +
                    std::to_string(classes_) + ")");
  }
  validate_scores(scores);
  if (!by_id_.emplace(scores.id, records_.size()).second) {
    throw DataError("duplicate score id '" + scores.id + "'");
  }
  records_.push_back(std::move(scores));
}

const ScoreVector* ScoreSet::find(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double dot(std::span<const float> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * b[i];
  }
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

std::vector<double> l2_normalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n >= 1e-12)) throw ZeroVector();
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

std::vector<double> l2_normalize(std::span<const float> v) {
  return l2_normalize(std::span<const double>(to_double(v)));
}

std::vector<double> to_double(std::span<const float> v) {
  return {v.begin(), v.end()};
}

}  // namespace mvfill
