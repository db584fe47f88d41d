#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mvfill/core.hpp"
#include "mvfill/retrieval.hpp"

namespace mvfill {

// Zero factors are replaced by this value before the log-domain product.
inline constexpr double kZeroProbabilityFloor = 1e-12;

struct FusionResult {
  std::string query_id;
  ScoreVector sigma_f1;  // available-view prediction
  ScoreVector sigma_f2;  // fused prediction for the missing view
  std::vector<double> final_probs;  // renormalized product
  ClassLabel predicted;
};

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Entrywise mean of k score vectors.
ScoreVector mean_fuse(std::span<const ScoreVector> scores);

// Product late fusion, computed as a sum of logs and renormalized.
FusionResult product_fuse(const ScoreVector& sigma_f1,
                          const ScoreVector& sigma_f2);

// product_fuse(query, mean_fuse(scores of the top-k retrieved ids)).
FusionResult classify_missing(const ScoreVector& query_scores,
                              const RankedList& ranked,
                              const ScoreSet& db_scores, std::size_t k);

// CSV: query_id,true_label,predicted,p0..p{C-1}. Unknown labels are blank.
void write_fusion_csv(std::span<const FusionResult> results,
                      const std::filesystem::path& path);

}  // namespace mvfill
