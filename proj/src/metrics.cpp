#include "mvfill/metrics.hpp"

#include <algorithm>
#include <map>

#include "mvfill/errors.hpp"

namespace mvfill {

double average_precision_at_k(const std::vector<bool>& relevance, std::size_t k) {
  if (k == 0) throw ConfigError("AP@K needs K >= 1");
  const auto total_relevant =
      static_cast<std::size_t>(std::count(relevance.begin(), relevance.end(), true));
  if (total_relevant == 0) return 0.0;
  const std::size_t depth = std::min(k, relevance.size());
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (relevance[i]) {
      hits += 1.0;
      sum += hits / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(k, total_relevant));
}

std::vector<bool> relevance(const RankedList& list, ClassLabel query_label) {
  std::vector<bool> rel;
  rel.reserve(list.items.size());
  for (const auto& item : list.items) rel.push_back(item.label == query_label);
  return rel;
}

double map_at_k(std::span<const LabeledRanking> queries, std::size_t k) {
  if (queries.empty()) throw EmptyQuerySet();
  double sum = 0.0;
  for (const auto& q : queries) {
    sum += average_precision_at_k(relevance(*q.list, q.query_label), k);
  }
  return sum / static_cast<double>(queries.size());
}

double macro_f1(std::span<const std::uint16_t> predictions,
                std::span<const std::uint16_t> truths) {
  if (predictions.size() != truths.size()) {
    throw LengthMismatch(predictions.size(), truths.size());
  }
  if (predictions.empty()) throw EmptyQuerySet();
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::uint16_t, Counts> per_class;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (predictions[i] == truths[i]) {
      ++per_class[truths[i]].tp;
    } else {
      ++per_class[predictions[i]].fp;
      ++per_class[truths[i]].fn;
    }
  }
  double sum = 0.0;
  for (const auto& [label, c] : per_class) {
    const double denom = 2.0 * c.tp + c.fp + c.fn;
    sum += denom > 0.0 ? 2.0 * c.tp / denom : 0.0;
  }
  return sum / static_cast<double>(per_class.size());
}

double micro_f1(std::span<const std::uint16_t> predictions,
                std::span<const std::uint16_t> truths) {
  if (predictions.size() != truths.size()) {
    throw LengthMismatch(predictions.size(), truths.size());
  }
  if (predictions.empty()) throw EmptyQuerySet();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    correct += predictions[i] == truths[i];
  }
  return static_cast<double>(correct) / static_cast<double>(truths.size());
}

}  // namespace mvfill
