#include "mvfill/folds.hpp"

#include <algorithm>
#include <map>

#include "mvfill/errors.hpp"
#include "mvfill/random.hpp"

namespace mvfill {

std::array<FoldSplit, kNumFolds> make_folds(std::span<const LabeledId> samples,
                                            std::uint64_t seed) {
  std::map<std::uint16_t, std::vector<std::string>> by_class;
  for (const auto& s : samples) by_class[s.label].push_back(s.id);

  std::array<FoldSplit, kNumFolds> folds;
  for (int f = 0; f < kNumFolds; ++f) folds[f].fold_index = f;

  constexpr std::size_t kChunks = 2 * kNumFolds;
  for (auto& [label, ids] : by_class) {
    if (ids.size() < kChunks) throw ClassTooSmall(label, ids.size());
    // Sorting first makes the split independent of input order.
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw DataError("duplicate sample id in class " + std::to_string(label));
    }
    Rng rng(derive_seed(seed, label));
    rng.shuffle(ids.begin(), ids.end());

    const std::size_t n = ids.size();
    for (std::size_t chunk = 0; chunk < kChunks; ++chunk) {
      const std::size_t lo = chunk * n / kChunks;
      const std::size_t hi = (chunk + 1) * n / kChunks;
      for (int f = 0; f < kNumFolds; ++f) {
        auto& dst = chunk == 2u * f       ? folds[f].test_ids
                    : chunk == 2u * f + 1 ? folds[f].val_ids
                                          : folds[f].train_ids;
        dst.insert(dst.end(), ids.begin() + lo, ids.begin() + hi);
      }
    }
  }
  for (auto& fold : folds) {
    std::sort(fold.train_ids.begin(), fold.train_ids.end());
    std::sort(fold.val_ids.begin(), fold.val_ids.end());
    std::sort(fold.test_ids.begin(), fold.test_ids.end());
  }
  return folds;
}

}  // namespace mvfill
