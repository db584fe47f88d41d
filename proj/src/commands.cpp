#include "mvfill/commands.hpp"

#include <fstream>
#include <ostream>

#include "mvfill/errors.hpp"
#include "mvfill/io.hpp"

namespace mvfill {
namespace {

std::string view_suffix(ViewId view) { return "v" + std::to_string(view.tag); }

void write_resolved(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::ofstream out(config.out_dir / "resolved_config.txt", std::ios::trunc);
  if (!out) throw DataError("cannot write to " + config.out_dir.string());
  out << to_text(config);
}

std::vector<int> selected_folds(const RunConfig& config) {
  if (config.fold) return {*config.fold};
  std::vector<int> all;
  for (int f = 0; f < kNumFolds; ++f) all.push_back(f);
  return all;
}

// Runs fn over the selected folds using the configured thread budget.
void for_each_fold(const RunConfig& config, const std::function<void(int)>& fn) {
  const auto folds = selected_folds(config);
  if (folds.size() == 1) {
    fn(folds.front());
    return;
  }
  parallel_folds(config.jobs, fn);
}

std::array<FoldSplit, kNumFolds> splits_for(const RunConfig& config,
                                            const ExperimentData& data) {
  return make_folds(labeled_samples(data.embeddings), config.settings.seed);
}

void write_folds_csv(const std::array<FoldSplit, kNumFolds>& splits,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "fold,split,id\n";
  for (const auto& s : splits) {
    for (const auto& id : s.train_ids) out << s.fold_index << ",train," << id << '\n';
    for (const auto& id : s.val_ids) out << s.fold_index << ",val," << id << '\n';
    for (const auto& id : s.test_ids) out << s.fold_index << ",test," << id << '\n';
  }
}

std::filesystem::path head_path(const RunConfig& c, int fold, int view) {
  return fold_dir(c, fold) / ("head_v" + std::to_string(view) + ".mvph");
}

std::filesystem::path rankings_path(const RunConfig& c, int fold) {
  return fold_dir(c, fold) /
         ("rankings_missing_" + view_suffix(c.settings.missing_view) + ".csv");
}

std::array<ProjectionHead, 2> load_heads(const RunConfig& c, int fold) {
  std::array<ProjectionHead, 2> heads;
  for (int v = 0; v < 2; ++v) {
    const auto p = head_path(c, fold, v);
    if (!std::filesystem::exists(p)) {
      throw DataError("missing checkpoint " + p.string() + " (run 'train' first)");
    }
    heads[v] = read_checkpoint(p);
  }
  return heads;
}

FoldRanking load_ranking(const RunConfig& c, int fold) {
  const auto p = rankings_path(c, fold);
  if (!std::filesystem::exists(p)) {
    throw DataError("missing rankings " + p.string() + " (run 'rank' first)");
  }
  return read_rankings_csv(p);
}

std::vector<double> read_loss_trace(const std::filesystem::path& path) {
  std::vector<double> trace;
  std::ifstream in(path);
  if (!in) return trace;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    trace.push_back(std::stod(line.substr(comma + 1)));
  }
  return trace;
}

void train_one(const RunConfig& config, const ExperimentData& data,
               const FoldSplit& split) {
  TrainConfig tc = config.settings.train;
  tc.seed = fold_train_seed(config.settings.seed, split.fold_index);
  const FoldModel model = train_fold(data, split, tc);
  const auto dir = fold_dir(config, split.fold_index);
  std::filesystem::create_directories(dir);
  for (int v = 0; v < 2; ++v) {
    write_checkpoint(model.heads[v], head_path(config, split.fold_index, v));
  }
  write_loss_trace(model.loss_trace, dir / "loss_trace.csv");
}

void rank_one(const RunConfig& config, const ExperimentData& data,
              const FoldSplit& split) {
  const auto heads = load_heads(config, split.fold_index);
  const ViewId missing = config.settings.missing_view;
  const auto cache = fold_dir(config, split.fold_index) /
                     ("index_" + view_suffix(missing) + ".mvix");
  const FoldRanking ranking = rank_fold(data, split, heads, missing, cache);
  write_rankings_csv(ranking, rankings_path(config, split.fold_index));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::filesystem::path fold_dir(const RunConfig& config, int fold) {
  return config.out_dir / ("fold" + std::to_string(fold));
}

ExperimentData load_experiment_data(const RunConfig& config, bool need_scores) {
  check_inputs_exist(config, need_scores);
  ExperimentData data;
  const std::array<EmbeddingSet, 2> views = {
      read_embedding_file(config.embeddings[0]),
      read_embedding_file(config.embeddings[1])};
  data.embeddings = merge_views(views);
  if (need_scores) {
    for (int v = 0; v < 2; ++v) data.scores[v] = read_score_file(config.scores[v]);
  }
  return data;
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  validate(config.settings);
  const ExperimentData data = load_experiment_data(config, false);
  const auto splits = splits_for(config, data);
  write_resolved(config);
  write_folds_csv(splits, config.out_dir / "folds.csv");
  for_each_fold(config, [&](int f) { train_one(config, data, splits[f]); });
  for (int f : selected_folds(config)) {
    const auto trace = read_loss_trace(fold_dir(config, f) / "loss_trace.csv");
    log << "fold " << f << ": trained "
        << config.settings.train.epochs << " epochs";
    if (!trace.empty()) {
      log << ", loss " << fmt(trace.front()) << " -> " << fmt(trace.back());
    }
    log << '\n';
  }
}

void cmd_rank(const RunConfig& config, std::ostream& log) {
  validate(config.settings);
  const ExperimentData data = load_experiment_data(config, false);
  const auto splits = splits_for(config, data);
  write_resolved(config);
  for_each_fold(config, [&](int f) { rank_one(config, data, splits[f]); });

  std::ofstream out(config.out_dir / "map_at_k.csv", std::ios::trunc);
  if (!out) throw DataError("cannot write map_at_k.csv");
  out << "K,mean,std\n";
  std::vector<FoldRanking> rankings;
  for (int f : selected_folds(config)) rankings.push_back(load_ranking(config, f));
  for (std::size_t k : config.settings.k_list) {
    std::vector<double> per_fold;
    for (const auto& r : rankings) per_fold.push_back(fold_map_at_k(r, k));
    const MeanStd ms = summarize(per_fold);
    out << k << ',' << fmt(ms.mean) << ',' << fmt(ms.std) << '\n';
    log << "mAP@" << k << " = " << fmt(ms.mean) << " +- " << fmt(ms.std) << '\n';
  }
}

void cmd_classify(const RunConfig& config, std::ostream& log) {
  validate(config.settings);
  const ExperimentData data = load_experiment_data(config, true);
  const auto splits = splits_for(config, data);
  write_resolved(config);
  const auto& settings = config.settings;
  const auto folds = selected_folds(config);

  std::map<std::size_t, std::vector<double>> f1;
  for (int f : folds) {
    const FoldRanking ranking = load_ranking(config, f);
    const auto truths = true_labels(data, splits[f]);
    const std::size_t db_size =
        ranking.rankings.empty() ? 0 : ranking.rankings.front().items.size();
    for (std::size_t k : settings.k_list) {
      if (k > db_size) {
        log << "warning: fold " << f << ": k=" << k
            << " exceeds the database size " << db_size << "; clamped\n";
      }
      const auto results = classify_fold(data, ranking, settings.missing_view, k);
      write_fusion_csv(results, fold_dir(config, f) /
                                    ("fusion_missing_" +
                                     view_suffix(settings.missing_view) + "_k" +
                                     std::to_string(k) + ".csv"));
      std::vector<std::uint16_t> predicted;
      for (const auto& r : results) predicted.push_back(r.predicted.index);
      f1[k].push_back(f1_score(predicted, truths, settings.f1_average));
    }
  }

  std::ofstream out(config.out_dir / "f1_by_k.csv", std::ios::trunc);
  if (!out) throw DataError("cannot write f1_by_k.csv");
  out << "k,mean,std";
  for (int f : folds) out << ",fold" << f;
  out << '\n';
  for (std::size_t k : settings.k_list) {
    const MeanStd ms = summarize(f1[k]);
    out << k << ',' << fmt(ms.mean) << ',' << fmt(ms.std);
    for (double v : f1[k]) out << ',' << fmt(v);
    out << '\n';
    log << "top-" << k << " F1 = " << fmt(ms.mean) << " +- " << fmt(ms.std) << '\n';
  }
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  validate(config.settings);
  const ExperimentData data = load_experiment_data(config, true);
  const auto splits = splits_for(config, data);
  write_resolved(config);
  write_folds_csv(splits, config.out_dir / "folds.csv");

  const auto folds = selected_folds(config);
  std::vector<FoldResult> results(kNumFolds);
  for_each_fold(config, [&](int f) {
    // Reuse artifacts from earlier stages when they exist.
    if (!std::filesystem::exists(head_path(config, f, 0)) ||
        !std::filesystem::exists(head_path(config, f, 1))) {
      train_one(config, data, splits[f]);
    }
    if (!std::filesystem::exists(rankings_path(config, f))) {
      rank_one(config, data, splits[f]);
    }
    results[f] = evaluate_ranking(data, splits[f], load_ranking(config, f),
                                  config.settings);
    results[f].loss_trace =
        read_loss_trace(fold_dir(config, f) / "loss_trace.csv");
  });
  std::vector<FoldResult> selected;
  for (int f : folds) selected.push_back(std::move(results[f]));
  const EvalReport report = assemble_report(std::move(selected), config.settings);
  write_report(report, config.settings, config.out_dir);

  std::ifstream text(config.out_dir / "report.txt");
  log << text.rdbuf();
}

void cmd_synth(const SyntheticConfig& synth, const std::filesystem::path& out,
               std::ostream& log) {
  const SyntheticData data = generate_synthetic(synth);
  std::filesystem::create_directories(out);
  for (int v = 0; v < 2; ++v) {
    write_embedding_file(data.views[v], out / ("view" + std::to_string(v) + ".mveb"));
    write_score_file(data.scores[v], out / ("view" + std::to_string(v) + ".mvsc"));
  }
  std::ofstream cfg(out / "experiment.cfg", std::ios::trunc);
  if (!cfg) throw DataError("cannot write " + (out / "experiment.cfg").string());
  cfg << "# synthetic two-view dataset\n"
      << "embeddings_v0 = view0.mveb\n"
      << "embeddings_v1 = view1.mveb\n"
      << "scores_v0 = view0.mvsc\n"
      << "scores_v1 = view1.mvsc\n"
      << "out = run\n"
      << "seed = " << synth.seed << '\n';
  log << "wrote " << synth.classes * synth.per_class << " samples x 2 views to "
      << out.string() << '\n';
}

int exit_code(const Error& error) {
  switch (error.category()) {
    case Error::Category::kConfig:
      return 2;
    case Error::Category::kData:
      return 3;
    case Error::Category::kNumeric:
      return 4;
  }
  return 3;
}

}  // namespace mvfill
