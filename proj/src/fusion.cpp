#include "mvfill/fusion.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "mvfill/errors.hpp"

namespace mvfill {

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw EmptyList();
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ScoreVector mean_fuse(std::span<const ScoreVector> scores) {
  if (scores.empty()) throw EmptyList();
  ScoreVector out;
  out.probs.assign(scores.front().probs.size(), 0.0);
  for (const auto& s : scores) {
    if (s.probs.size() != out.probs.size()) {
      throw LengthMismatch(out.probs.size(), s.probs.size());
    }
    for (std::size_t c = 0; c < s.probs.size(); ++c) out.probs[c] += s.probs[c];
  }
  for (double& p : out.probs) p /= static_cast<double>(scores.size());
  return out;
}

FusionResult product_fuse(const ScoreVector& sigma_f1,
                          const ScoreVector& sigma_f2) {
  const auto& a = sigma_f1.probs;
  const auto& b = sigma_f2.probs;
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  if (a.empty()) throw EmptyList();

  bool any_nonzero = false;
  for (std::size_t c = 0; c < a.size(); ++c) {
    any_nonzero = any_nonzero || (a[c] > 0.0 && b[c] > 0.0);
  }
  if (!any_nonzero) throw AllZeroProduct();

  auto floored_log = [](double p) {
    return std::log(p > 0.0 ? p : kZeroProbabilityFloor);
  };
  std::vector<double> log_prod(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    log_prod[c] = floored_log(a[c]) + floored_log(b[c]);
  }

  FusionResult out;
  out.query_id = sigma_f1.id;
  out.sigma_f1 = sigma_f1;
  out.sigma_f2 = sigma_f2;
  const std::size_t best = argmax(log_prod);
  out.predicted = ClassLabel{static_cast<std::uint16_t>(best)};

  const double top = log_prod[best];
  double total = 0.0;
  out.final_probs.resize(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    out.final_probs[c] = std::exp(log_prod[c] - top);
    total += out.final_probs[c];
  }
  for (double& p : out.final_probs) p /= total;
  return out;
}

FusionResult classify_missing(const ScoreVector& query_scores,
                              const RankedList& ranked,
                              const ScoreSet& db_scores, std::size_t k) {
  const TopK best = top_k(ranked, k);
  std::vector<ScoreVector> retrieved;
  retrieved.reserve(best.list.items.size());
  for (const auto& item : best.list.items) {
    const ScoreVector* s = db_scores.find(item.id);
    if (s == nullptr) throw MissingScore(item.id);
    retrieved.push_back(*s);
  }
  ScoreVector fused = mean_fuse(retrieved);
  fused.id = ranked.query_id;
  FusionResult out = product_fuse(query_scores, fused);
  out.query_id = ranked.query_id.empty() ? query_scores.id : ranked.query_id;
  return out;
}

void write_fusion_csv(std::span<const FusionResult> results,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const std::size_t classes =
      results.empty() ? 0 : results.front().final_probs.size();
  out << "query_id,true_label,predicted";
  for (std::size_t c = 0; c < classes; ++c) out << ",p" << c;
  out << '\n';
  char buf[40];
  for (const auto& r : results) {
    out << r.query_id << ',';
    if (r.sigma_f1.has_label()) out << r.sigma_f1.label;
    out << ',' << r.predicted.index;
    for (double p : r.final_probs) {
      std::snprintf(buf, sizeof buf, ",%.9g", p);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace mvfill
