#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mvfill/core.hpp"
#include "mvfill/folds.hpp"
#include "mvfill/fusion.hpp"
#include "mvfill/projection_head.hpp"
#include "mvfill/retrieval.hpp"
#include "mvfill/stats.hpp"
#include "mvfill/trainer.hpp"

namespace mvfill {

// Both views' embeddings (merged, keyed by (view, sample id)) and the two
// per-view classifier score sets.
struct ExperimentData {
  EmbeddingSet embeddings;
  std::array<ScoreSet, 2> scores;
};

// Labels come from view-0 records; every sample must exist in both views.
std::vector<LabeledId> labeled_samples(const EmbeddingSet& embeddings);

enum class F1Average { kMacro, kMicro };

struct ExperimentSettings {
  TrainConfig train;
  std::vector<std::size_t> k_list = {1, 2, 3, 4, 5, 10, 50, 100};
  // k reported as "fused" and used for the t-test; must be in k_list.
  std::size_t primary_k = 5;
  ViewId missing_view{1};
  std::uint64_t seed = 0;
  bool fully_paired = true;
  F1Average f1_average = F1Average::kMacro;
};

void validate(const ExperimentSettings& settings);

ViewId available_view(ViewId missing);

// Seed used to train fold `fold` under run seed `seed`.
std::uint64_t fold_train_seed(std::uint64_t seed, int fold);

struct FoldModel {
  std::array<ProjectionHead, 2> heads;
  std::vector<double> loss_trace;
};

FoldModel train_fold(const ExperimentData& data, const FoldSplit& split,
                     TrainConfig config);

// Test queries from the available view ranked against the validation set of
// the missing view.
struct FoldRanking {
  std::vector<RankedList> rankings;  // in test-id order
  std::vector<ClassLabel> query_labels;
};

// When `cache_path` is given the index goes through load_or_build_index.
FoldRanking rank_fold(const ExperimentData& data, const FoldSplit& split,
                      const std::array<ProjectionHead, 2>& heads,
                      ViewId missing_view,
                      const std::optional<std::filesystem::path>& cache_path = {});

double fold_map_at_k(const FoldRanking& ranking, std::size_t k);

std::vector<FusionResult> classify_fold(const ExperimentData& data,
                                        const FoldRanking& ranking,
                                        ViewId missing_view, std::size_t k);

// Available-view prediction alone (lower bound).
std::vector<std::uint16_t> no_fusion_predictions(const ExperimentData& data,
                                                 const FoldSplit& split,
                                                 ViewId missing_view);

// Product fusion with the true counterpart's scores (upper bound).
std::vector<std::uint16_t> fully_paired_predictions(const ExperimentData& data,
                                                    const FoldSplit& split,
                                                    ViewId missing_view);

std::vector<std::uint16_t> true_labels(const ExperimentData& data,
                                       const FoldSplit& split);

double f1_score(std::span<const std::uint16_t> predictions,
                std::span<const std::uint16_t> truths, F1Average average);

struct FoldResult {
  int fold = 0;
  std::vector<double> loss_trace;
  std::map<std::size_t, double> map_at_k;  // K -> mAP@K
  std::map<std::size_t, double> fused_f1;  // k -> F1
  double no_fusion_f1 = 0.0;
  std::optional<double> fully_paired_f1;
};

// Scores an existing ranking: mAP@K and fused F1 for every k in the k list,
// plus the No-Fusion and (optionally) Fully-Paired references.
FoldResult evaluate_ranking(const ExperimentData& data, const FoldSplit& split,
                            const FoldRanking& ranking,
                            const ExperimentSettings& settings);

FoldResult evaluate_fold(const ExperimentData& data, const FoldSplit& split,
                         const FoldModel& model,
                         const ExperimentSettings& settings);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd summarize(std::span<const double> values);

struct EvalReport {
  std::vector<FoldResult> folds;
  std::vector<double> per_fold_f1;  // fused F1 at primary_k
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  std::map<std::size_t, MeanStd> map_at_k;
  std::map<std::size_t, MeanStd> fused_f1_by_k;
  MeanStd no_fusion_f1;
  std::optional<MeanStd> fully_paired_f1;
  std::optional<TTestResult> ttest;  // fused (primary_k) vs No-Fusion
};

EvalReport assemble_report(std::vector<FoldResult> folds,
                           const ExperimentSettings& settings);

// Trains, ranks and classifies every fold; folds run on up to `jobs` threads
// and are assembled in fold order.
EvalReport run_experiment(const ExperimentData& data,
                          const ExperimentSettings& settings, int jobs = 1);

// Runs fn(fold) for every fold on up to `jobs` threads. The first exception
// is rethrown after all workers finish.
void parallel_folds(int jobs, const std::function<void(int)>& fn);

// ---- files ----

void write_rankings_csv(const FoldRanking& ranking,
                        const std::filesystem::path& path);
FoldRanking read_rankings_csv(const std::filesystem::path& path);

void write_report(const EvalReport& report, const ExperimentSettings& settings,
                  const std::filesystem::path& dir);

}  // namespace mvfill
