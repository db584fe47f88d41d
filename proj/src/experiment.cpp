#include "mvfill/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mvfill/errors.hpp"
#include "mvfill/metrics.hpp"
#include "mvfill/random.hpp"

namespace mvfill {
namespace {

const ScoreVector& require_score(const ScoreSet& set, const std::string& id) {
  const ScoreVector* s = set.find(id);
  if (s == nullptr) throw MissingScore(id);
  return *s;
}

const EmbeddingRecord& require_record(const EmbeddingSet& set, ViewId view,
                                      const std::string& id) {
  const EmbeddingRecord* r = set.find(view, id);
  if (r == nullptr) {
    throw DataError("sample '" + id + "' has no record in view " +
                    std::to_string(view.tag));
  }
  return *r;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

void check_csv_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw DataError("id '" + s + "' cannot be written to CSV");
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<LabeledId> labeled_samples(const EmbeddingSet& embeddings) {
  std::vector<LabeledId> out;
  for (const auto& r : embeddings.records()) {
    if (r.view.tag != 0) continue;
    const EmbeddingRecord* other = embeddings.find(ViewId{1}, r.id);
    if (other == nullptr) {
      throw DataError("sample '" + r.id + "' is missing from view 1");
    }
    if (other->label != r.label) {
      throw DataError("sample '" + r.id + "' has different labels per view");
    }
    out.push_back({r.id, r.label.index});
  }
  std::size_t view1 = 0;
  for (const auto& r : embeddings.records()) view1 += r.view.tag == 1;
  if (view1 != out.size()) {
    throw DataError("view 1 has samples that are missing from view 0");
  }
  return out;
}

void validate(const ExperimentSettings& s) {
  validate(s.train);
  if (s.k_list.empty()) throw ConfigError("k list is empty");
  for (std::size_t i = 0; i < s.k_list.size(); ++i) {
    if (s.k_list[i] < 1) throw ConfigError("k values must be >= 1");
    if (i > 0 && s.k_list[i] <= s.k_list[i - 1]) {
      throw ConfigError("k list must be strictly increasing");
    }
  }
  if (std::find(s.k_list.begin(), s.k_list.end(), s.primary_k) == s.k_list.end()) {
    throw ConfigError("primary k " + std::to_string(s.primary_k) +
                      " is not in the k list");
  }
  if (s.missing_view.tag > 1) throw ConfigError("missing view must be 0 or 1");
}

ViewId available_view(ViewId missing) {
  return ViewId{static_cast<std::uint16_t>(missing.tag == 0 ? 1 : 0)};
}

std::uint64_t fold_train_seed(std::uint64_t seed, int fold) {
  return derive_seed(seed, 1000 + static_cast<std::uint64_t>(fold));
}

FoldModel train_fold(const ExperimentData& data, const FoldSplit& split,
                     TrainConfig config) {
  const EmbeddingSet train_set = data.embeddings.id_subset(split.train_ids);
  TrainResult trained = train(train_set, config);
  return {{std::move(trained.anchor_head), std::move(trained.positive_head)},
          std::move(trained.loss_trace)};
}

FoldRanking rank_fold(const ExperimentData& data, const FoldSplit& split,
                      const std::array<ProjectionHead, 2>& heads,
                      ViewId missing_view,
                      const std::optional<std::filesystem::path>& cache_path) {
  const ViewId avail = available_view(missing_view);
  const EmbeddingSet database =
      data.embeddings.id_subset(split.val_ids).view_subset(missing_view);
  const ProjectionHead& db_head = heads[missing_view.tag];
  const RetrievalIndex index = cache_path
                                   ? load_or_build_index(database, db_head, *cache_path)
                                   : build_index(database, db_head);
  if (split.test_ids.empty()) throw EmptyQuerySet();

  FoldRanking out;
  for (const auto& id : split.test_ids) {
    const EmbeddingRecord& rec = require_record(data.embeddings, avail, id);
    const auto query = apply_head(heads[avail.tag], rec);
    out.rankings.push_back(rank(query, index, id));
    out.query_labels.push_back(rec.label);
  }
  return out;
}

double fold_map_at_k(const FoldRanking& ranking, std::size_t k) {
  std::vector<LabeledRanking> queries;
  for (std::size_t i = 0; i < ranking.rankings.size(); ++i) {
    queries.push_back({&ranking.rankings[i], ranking.query_labels[i]});
  }
  return map_at_k(queries, k);
}

std::vector<FusionResult> classify_fold(const ExperimentData& data,
                                        const FoldRanking& ranking,
                                        ViewId missing_view, std::size_t k) {
  const ViewId avail = available_view(missing_view);
  std::vector<FusionResult> out;
  out.reserve(ranking.rankings.size());
  for (const auto& list : ranking.rankings) {
    const ScoreVector& query = require_score(data.scores[avail.tag], list.query_id);
    out.push_back(classify_missing(query, list, data.scores[missing_view.tag], k));
  }
  return out;
}

std::vector<std::uint16_t> no_fusion_predictions(const ExperimentData& data,
                                                 const FoldSplit& split,
                                                 ViewId missing_view) {
  const ViewId avail = available_view(missing_view);
  std::vector<std::uint16_t> out;
  for (const auto& id : split.test_ids) {
    const auto& s = require_score(data.scores[avail.tag], id);
    out.push_back(static_cast<std::uint16_t>(argmax(s.probs)));
  }
  return out;
}

std::vector<std::uint16_t> fully_paired_predictions(const ExperimentData& data,
                                                    const FoldSplit& split,
                                                    ViewId missing_view) {
  const ViewId avail = available_view(missing_view);
  std::vector<std::uint16_t> out;
  for (const auto& id : split.test_ids) {
    const auto& a = require_score(data.scores[avail.tag], id);
    const auto& m = require_score(data.scores[missing_view.tag], id);
    out.push_back(product_fuse(a, m).predicted.index);
  }
  return out;
}

std::vector<std::uint16_t> true_labels(const ExperimentData& data,
                                       const FoldSplit& split) {
  std::vector<std::uint16_t> out;
  for (const auto& id : split.test_ids) {
    out.push_back(require_record(data.embeddings, ViewId{0}, id).label.index);
  }
  return out;
}

double f1_score(std::span<const std::uint16_t> predictions,
                std::span<const std::uint16_t> truths, F1Average average) {
  return average == F1Average::kMacro ? macro_f1(predictions, truths)
                                      : micro_f1(predictions, truths);
}

FoldResult evaluate_ranking(const ExperimentData& data, const FoldSplit& split,
                            const FoldRanking& ranking,
                            const ExperimentSettings& settings) {
  FoldResult r;
  r.fold = split.fold_index;
  const auto truths = true_labels(data, split);
  if (ranking.rankings.size() != truths.size()) {
    throw DataError("ranking has " + std::to_string(ranking.rankings.size()) +
                    " queries but fold " + std::to_string(split.fold_index) +
                    " has " + std::to_string(truths.size()) + " test samples");
  }
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (ranking.rankings[i].query_id != split.test_ids[i]) {
      throw DataError("ranking query '" + ranking.rankings[i].query_id +
                      "' does not match test sample '" + split.test_ids[i] + "'");
    }
  }

  for (std::size_t k : settings.k_list) {
    r.map_at_k[k] = fold_map_at_k(ranking, k);
    const auto fused = classify_fold(data, ranking, settings.missing_view, k);
    std::vector<std::uint16_t> predicted;
    for (const auto& f : fused) predicted.push_back(f.predicted.index);
    r.fused_f1[k] = f1_score(predicted, truths, settings.f1_average);
  }
  r.no_fusion_f1 = f1_score(no_fusion_predictions(data, split, settings.missing_view),
                            truths, settings.f1_average);
  if (settings.fully_paired) {
    r.fully_paired_f1 =
        f1_score(fully_paired_predictions(data, split, settings.missing_view),
                 truths, settings.f1_average);
  }
  return r;
}

FoldResult evaluate_fold(const ExperimentData& data, const FoldSplit& split,
                         const FoldModel& model,
                         const ExperimentSettings& settings) {
  const FoldRanking ranking =
      rank_fold(data, split, model.heads, settings.missing_view);
  FoldResult r = evaluate_ranking(data, split, ranking, settings);
  r.loss_trace = model.loss_trace;
  return r;
}

MeanStd summarize(std::span<const double> values) {
  return {mean(values), sample_std(values)};
}

EvalReport assemble_report(std::vector<FoldResult> folds,
                           const ExperimentSettings& settings) {
  EvalReport report;
  report.folds = std::move(folds);
  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const auto& f : report.folds) v.push_back(getter(f));
    return v;
  };
  std::vector<std::size_t> ks;
  if (!report.folds.empty()) {
    for (const auto& [k, _] : report.folds.front().fused_f1) ks.push_back(k);
  }
  for (std::size_t k : ks) {
    report.map_at_k[k] =
        summarize(collect([k](const FoldResult& f) { return f.map_at_k.at(k); }));
    report.fused_f1_by_k[k] =
        summarize(collect([k](const FoldResult& f) { return f.fused_f1.at(k); }));
  }
  report.per_fold_f1 = collect(
      [&](const FoldResult& f) { return f.fused_f1.at(settings.primary_k); });
  report.mean_f1 = mean(report.per_fold_f1);
  report.std_f1 = sample_std(report.per_fold_f1);
  const auto no_fusion = collect([](const FoldResult& f) { return f.no_fusion_f1; });
  report.no_fusion_f1 = summarize(no_fusion);
  if (!report.folds.empty() && report.folds.front().fully_paired_f1) {
    report.fully_paired_f1 = summarize(
        collect([](const FoldResult& f) { return *f.fully_paired_f1; }));
  }
  if (report.folds.size() >= 2) {
    report.ttest = paired_t_test(report.per_fold_f1, no_fusion);
  }
  return report;
}

void parallel_folds(int jobs, const std::function<void(int)>& fn) {
  const int workers = std::clamp(jobs, 1, kNumFolds);
  if (workers == 1) {
    for (int f = 0; f < kNumFolds; ++f) fn(f);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int f = next++; f < kNumFolds; f = next++) {
        try {
          fn(f);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

EvalReport run_experiment(const ExperimentData& data,
                          const ExperimentSettings& settings, int jobs) {
  validate(settings);
  const auto samples = labeled_samples(data.embeddings);
  const auto splits = make_folds(samples, settings.seed);
  std::vector<FoldResult> results(kNumFolds);
  parallel_folds(jobs, [&](int f) {
    TrainConfig config = settings.train;
    config.seed = fold_train_seed(settings.seed, f);
    const FoldModel model = train_fold(data, splits[f], config);
    results[f] = evaluate_fold(data, splits[f], model, settings);
  });
  return assemble_report(std::move(results), settings);
}

void write_rankings_csv(const FoldRanking& ranking,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "query_id,query_label,rank,item_id,item_label,distance\n";
  for (std::size_t q = 0; q < ranking.rankings.size(); ++q) {
    const auto& list = ranking.rankings[q];
    check_csv_field(list.query_id);
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      const auto& item = list.items[i];
      check_csv_field(item.id);
      out << list.query_id << ',' << ranking.query_labels[q].index << ','
          << i + 1 << ',' << item.id << ',' << item.label.index << ','
          << fmt("%.17g", item.distance) << '\n';
    }
  }
}

FoldRanking read_rankings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "query_id,query_label,rank,item_id,item_label,distance") {
    throw DataError(path.string() + ": unexpected rankings header");
  }
  FoldRanking out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) fields.push_back(field);
    if (fields.size() != 6) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 6 fields");
    }
    try {
      const auto query_label = static_cast<std::uint16_t>(std::stoul(fields[1]));
      const std::size_t position = std::stoul(fields[2]);
      if (out.rankings.empty() || out.rankings.back().query_id != fields[0]) {
        out.rankings.push_back({fields[0], {}});
        out.query_labels.push_back(ClassLabel{query_label});
      }
      auto& items = out.rankings.back().items;
      if (position != items.size() + 1) {
        throw DataError("ranks out of order");
      }
      items.push_back({fields[3],
                       ClassLabel{static_cast<std::uint16_t>(std::stoul(fields[4]))},
                       std::stod(fields[5])});
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed number");
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

void write_report(const EvalReport& report, const ExperimentSettings& settings,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const char* avg = settings.f1_average == F1Average::kMacro ? "macro" : "micro";

  {
    auto out = open_out(dir / "report.csv");
    out << "fold,metric,value\n";
    for (const auto& f : report.folds) {
      if (!f.loss_trace.empty()) {
        out << f.fold << ",loss_first_epoch," << fmt("%.10g", f.loss_trace.front()) << '\n';
        out << f.fold << ",loss_final_epoch," << fmt("%.10g", f.loss_trace.back()) << '\n';
      }
      for (const auto& [k, v] : f.map_at_k) {
        out << f.fold << ",map@" << k << ',' << fmt("%.10g", v) << '\n';
      }
      for (const auto& [k, v] : f.fused_f1) {
        out << f.fold << ",fused_f1@" << k << ',' << fmt("%.10g", v) << '\n';
      }
      out << f.fold << ",no_fusion_f1," << fmt("%.10g", f.no_fusion_f1) << '\n';
      if (f.fully_paired_f1) {
        out << f.fold << ",fully_paired_f1," << fmt("%.10g", *f.fully_paired_f1) << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "map_at_k.csv");
    out << "K,mean,std\n";
    for (const auto& [k, ms] : report.map_at_k) {
      out << k << ',' << fmt("%.10g", ms.mean) << ',' << fmt("%.10g", ms.std) << '\n';
    }
  }
  {
    auto out = open_out(dir / "f1_by_k.csv");
    out << "k,mean,std";
    for (const auto& f : report.folds) out << ",fold" << f.fold;
    out << '\n';
    for (const auto& [k, ms] : report.fused_f1_by_k) {
      out << k << ',' << fmt("%.10g", ms.mean) << ',' << fmt("%.10g", ms.std);
      for (const auto& f : report.folds) out << ',' << fmt("%.10g", f.fused_f1.at(k));
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "report.txt");
    out << "missing view: " << settings.missing_view.tag
        << "   available view: " << available_view(settings.missing_view).tag
        << "   F1 average: " << avg << "\n\n";
    out << "retrieval mAP@K (mean +- std over folds)\n";
    for (const auto& [k, ms] : report.map_at_k) {
      out << "  K=" << k << "\t" << fmt("%.4f", ms.mean) << " +- "
          << fmt("%.4f", ms.std) << '\n';
    }
    out << "\nclassification F1 (mean +- std over folds)\n";
    out << "  No-Fusion\t" << fmt("%.4f", report.no_fusion_f1.mean) << " +- "
        << fmt("%.4f", report.no_fusion_f1.std) << '\n';
    for (const auto& [k, ms] : report.fused_f1_by_k) {
      out << "  top-" << k << "\t" << fmt("%.4f", ms.mean) << " +- "
          << fmt("%.4f", ms.std) << (k == settings.primary_k ? "  (primary)" : "")
          << '\n';
    }
    if (report.fully_paired_f1) {
      out << "  Fully-Paired\t" << fmt("%.4f", report.fully_paired_f1->mean)
          << " +- " << fmt("%.4f", report.fully_paired_f1->std) << '\n';
    }
    if (report.ttest) {
      const auto& t = *report.ttest;
      out << "\npaired t-test, top-" << settings.primary_k
          << " vs No-Fusion (df=" << t.df << "): t=" << fmt("%.6g", t.t)
          << " p=" << fmt("%.6g", t.p)
          << (t.significant ? "  significant at 95%" : "  not significant at 95%")
          << (t.zero_variance ? "  [zero-variance differences]" : "") << '\n';
    }
  }
}

}  // namespace mvfill
