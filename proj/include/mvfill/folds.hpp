#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvfill {

inline constexpr int kNumFolds = 5;

struct LabeledId {
  std::string id;
  std::uint16_t label = 0;
};

// One 80/10/10 split. Id lists are sorted.
struct FoldSplit {
  int fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
};

// Stratified 5-fold protocol. Each class is shuffled and cut into ten
// near-equal chunks; fold f tests on chunk 2f and validates on chunk 2f+1,
// so test sets (and validation sets) are disjoint across folds. Requires at
// least 10 samples per class.
std::array<FoldSplit, kNumFolds> make_folds(std::span<const LabeledId> samples,
                                            std::uint64_t seed);

}  // namespace mvfill
