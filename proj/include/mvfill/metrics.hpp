#pragma once

#include <span>
#include <vector>

#include "mvfill/core.hpp"
#include "mvfill/retrieval.hpp"

namespace mvfill {

// AP@K = (sum of precision@i over relevant i <= K) / min(K, total relevant),
// where "total relevant" counts the whole list. 0 when nothing is relevant.
double average_precision_at_k(const std::vector<bool>& relevance, std::size_t k);

// Relevance of each ranked item: same class as the query.
std::vector<bool> relevance(const RankedList& list, ClassLabel query_label);

struct LabeledRanking {
  const RankedList* list = nullptr;
  ClassLabel query_label;
};

// Mean of AP@K over queries. Throws EmptyQuerySet.
double map_at_k(std::span<const LabeledRanking> queries, std::size_t k);

// Unweighted mean of per-class F1 over classes that occur in either input.
double macro_f1(std::span<const std::uint16_t> predictions,
                std::span<const std::uint16_t> truths);

// Micro-averaged F1; equals accuracy for single-label predictions.
double micro_f1(std::span<const std::uint16_t> predictions,
                std::span<const std::uint16_t> truths);

}  // namespace mvfill
