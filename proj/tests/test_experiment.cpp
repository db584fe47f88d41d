#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mvfill/config.hpp"
#include "mvfill/errors.hpp"
#include "mvfill/experiment.hpp"
#include "mvfill/folds.hpp"
#include "mvfill/fusion.hpp"
#include "mvfill/metrics.hpp"
#include "mvfill/stats.hpp"
#include "mvfill/synthetic.hpp"

using namespace mvfill;

namespace {

ExperimentData to_experiment(const SyntheticData& d) {
  return {merge_views(d.views), d.scores};
}

ExperimentData small_data(std::uint64_t seed = 1) {
  SyntheticConfig sc;
  sc.classes = 4;
  sc.per_class = 20;
  sc.dim_v1 = sc.dim_v2 = 8;
  sc.seed = seed;
  return to_experiment(generate_synthetic(sc));
}

ExperimentSettings quick_settings() {
  ExperimentSettings s;
  s.train.epochs = 5;
  s.train.d_out = 8;
  s.train.learning_rate = 1e-3;
  s.k_list = {1, 3, 5};
  s.primary_k = 3;
  return s;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mvfill_experiment_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double fold_map1(const ExperimentData& data, const ExperimentSettings& s, int fold) {
  const auto folds = make_folds(labeled_samples(data.embeddings), s.seed);
  auto cfg = s.train;
  cfg.seed = fold_train_seed(s.seed, fold);
  const auto model = train_fold(data, folds[fold], cfg);
  const auto ranking = rank_fold(data, folds[fold], model.heads, s.missing_view);
  return fold_map_at_k(ranking, 1);
}

}  // namespace

TEST(Synthetic, ShapeAndDeterminism) {
  SyntheticConfig sc;
  const auto a = generate_synthetic(sc);
  const auto b = generate_synthetic(sc);
  for (int v = 0; v < 2; ++v) {
    EXPECT_EQ(a.views[v].size(), 400u);
    EXPECT_EQ(a.views[v].dim(), 32u);
    EXPECT_TRUE(a.views[v] == b.views[v]);
    EXPECT_EQ(a.scores[v].size(), 400u);
    for (const auto& s : a.scores[v].records()) EXPECT_NO_THROW(validate_scores(s));
  }
  sc.seed = 1;
  EXPECT_FALSE(generate_synthetic(sc).views[0] == a.views[0]);
}

TEST(Synthetic, NoiselessSamplesSitOnCenters) {
  SyntheticConfig sc;
  sc.sigma = 0.0;
  sc.rho = 1.0;
  const auto d = generate_synthetic(sc);
  for (int v = 0; v < 2; ++v) {
    const auto& recs = d.views[v].records();
    for (const auto& r : recs) {
      const auto& first = recs[static_cast<std::size_t>(r.label.index) * sc.per_class];
      EXPECT_EQ(r.vector, first.vector);
    }
  }
}

TEST(Synthetic, ParameterDomain) {
  SyntheticConfig sc;
  sc.classes = 1;
  EXPECT_THROW(generate_synthetic(sc), ConfigError);
  sc = {};
  sc.per_class = 3;
  EXPECT_THROW(generate_synthetic(sc), ConfigError);
  sc = {};
  sc.rho = 1.5;
  EXPECT_THROW(generate_synthetic(sc), ConfigError);
  sc = {};
  sc.sigma = -1;
  EXPECT_THROW(generate_synthetic(sc), ConfigError);
}

TEST(Synthetic, NoiselessLimitRetrievesPerfectly) {
  SyntheticConfig sc;
  sc.sigma = 0.0;
  sc.rho = 1.0;
  const auto data = to_experiment(generate_synthetic(sc));
  ExperimentSettings s;
  s.train.epochs = 50;
  const auto folds = make_folds(labeled_samples(data.embeddings), s.seed);
  auto cfg = s.train;
  cfg.seed = fold_train_seed(s.seed, 0);
  const auto model = train_fold(data, folds[0], cfg);
  const auto ranking = rank_fold(data, folds[0], model.heads, s.missing_view);
  for (std::size_t k = 1; k <= static_cast<std::size_t>(sc.per_class); ++k)
    EXPECT_DOUBLE_EQ(fold_map_at_k(ranking, k), 1.0) << "K=" << k;
}

TEST(Synthetic, HeavyNoiseApproachesChance) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticConfig sc;
    sc.sigma = 2.0;
    sc.seed = seed;
    const auto data = to_experiment(generate_synthetic(sc));
    ExperimentSettings s;
    s.train.epochs = 10;
    s.seed = seed;
    total += fold_map1(data, s, 0);
  }
  EXPECT_NEAR(total / 10.0, 1.0 / 8.0, 0.1);
}

TEST(Experiment, LabeledSamplesRequiresBothViews) {
  auto data = small_data();
  EXPECT_EQ(labeled_samples(data.embeddings).size(), 80u);
  EmbeddingSet broken(2, 2, 2);
  broken.add({"a", {0}, {0}, {1, 0}});
  EXPECT_THROW(labeled_samples(broken), DataError);
}

TEST(Experiment, SettingsValidation) {
  auto s = quick_settings();
  s.primary_k = 4;
  EXPECT_THROW(validate(s), ConfigError);
  s = quick_settings();
  s.k_list = {3, 1};
  EXPECT_THROW(validate(s), ConfigError);
  s = quick_settings();
  s.missing_view = {2};
  EXPECT_THROW(validate(s), ConfigError);
}

TEST(Experiment, NoFusionIsArgmaxOfQueryScores) {
  const auto data = small_data();
  const auto folds = make_folds(labeled_samples(data.embeddings), 0);
  for (int m = 0; m < 2; ++m) {
    const ViewId missing{static_cast<std::uint16_t>(m)};
    const auto preds = no_fusion_predictions(data, folds[2], missing);
    ASSERT_EQ(preds.size(), folds[2].test_ids.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto* s = data.scores[available_view(missing).tag].find(folds[2].test_ids[i]);
      EXPECT_EQ(preds[i], argmax(s->probs));
    }
  }
}

TEST(Experiment, TopOneColumnEqualsTopOnePairing) {
  const auto data = small_data();
  const auto s = quick_settings();
  const auto folds = make_folds(labeled_samples(data.embeddings), s.seed);
  auto cfg = s.train;
  cfg.seed = fold_train_seed(s.seed, 1);
  const auto model = train_fold(data, folds[1], cfg);
  const auto ranking = rank_fold(data, folds[1], model.heads, s.missing_view);
  const auto fused = classify_fold(data, ranking, s.missing_view, 1);
  ASSERT_EQ(fused.size(), ranking.rankings.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    const auto& list = ranking.rankings[i];
    const auto* q = data.scores[0].find(list.query_id);
    const auto* best = data.scores[1].find(list.items.front().id);
    EXPECT_EQ(fused[i].predicted, product_fuse(*q, *best).predicted);
  }
}

TEST(Experiment, CachedRankingMatchesDirect) {
  const auto data = small_data();
  const auto s = quick_settings();
  const auto folds = make_folds(labeled_samples(data.embeddings), s.seed);
  auto cfg = s.train;
  cfg.seed = fold_train_seed(s.seed, 0);
  const auto model = train_fold(data, folds[0], cfg);
  const auto dir = temp_dir("cache");
  const auto direct = rank_fold(data, folds[0], model.heads, s.missing_view);
  const auto cold = rank_fold(data, folds[0], model.heads, s.missing_view, dir / "i.mvix");
  const auto warm = rank_fold(data, folds[0], model.heads, s.missing_view, dir / "i.mvix");
  ASSERT_EQ(direct.rankings.size(), warm.rankings.size());
  for (std::size_t i = 0; i < direct.rankings.size(); ++i) {
    for (std::size_t j = 0; j < direct.rankings[i].items.size(); ++j) {
      EXPECT_EQ(direct.rankings[i].items[j].id, cold.rankings[i].items[j].id);
      EXPECT_EQ(direct.rankings[i].items[j].id, warm.rankings[i].items[j].id);
      EXPECT_EQ(direct.rankings[i].items[j].distance, warm.rankings[i].items[j].distance);
    }
  }
}

TEST(Experiment, RankingsCsvRoundTrip) {
  const auto data = small_data();
  const auto s = quick_settings();
  const auto folds = make_folds(labeled_samples(data.embeddings), s.seed);
  auto cfg = s.train;
  cfg.seed = 3;
  const auto model = train_fold(data, folds[3], cfg);
  const auto ranking = rank_fold(data, folds[3], model.heads, ViewId{0});
  const auto path = temp_dir("csv") / "r.csv";
  write_rankings_csv(ranking, path);
  const auto back = read_rankings_csv(path);
  ASSERT_EQ(back.rankings.size(), ranking.rankings.size());
  EXPECT_EQ(back.query_labels, ranking.query_labels);
  for (std::size_t i = 0; i < ranking.rankings.size(); ++i) {
    EXPECT_EQ(back.rankings[i].query_id, ranking.rankings[i].query_id);
    ASSERT_EQ(back.rankings[i].items.size(), ranking.rankings[i].items.size());
    for (std::size_t j = 0; j < ranking.rankings[i].items.size(); ++j) {
      EXPECT_EQ(back.rankings[i].items[j].id, ranking.rankings[i].items[j].id);
      EXPECT_EQ(back.rankings[i].items[j].label, ranking.rankings[i].items[j].label);
      EXPECT_EQ(back.rankings[i].items[j].distance, ranking.rankings[i].items[j].distance);
    }
  }
  EXPECT_DOUBLE_EQ(fold_map_at_k(back, 5), fold_map_at_k(ranking, 5));
}

TEST(Experiment, ReportIsConsistentWithFolds) {
  const auto data = small_data();
  const auto s = quick_settings();
  const auto report = run_experiment(data, s, 1);
  ASSERT_EQ(report.folds.size(), static_cast<std::size_t>(kNumFolds));
  ASSERT_EQ(report.per_fold_f1.size(), static_cast<std::size_t>(kNumFolds));
  for (int f = 0; f < kNumFolds; ++f) {
    EXPECT_EQ(report.folds[f].fold, f);
    EXPECT_EQ(report.per_fold_f1[f], report.folds[f].fused_f1.at(s.primary_k));
    EXPECT_EQ(report.folds[f].loss_trace.size(), 5u);
    EXPECT_TRUE(report.folds[f].fully_paired_f1.has_value());
    for (std::size_t k : s.k_list) {
      EXPECT_TRUE(report.folds[f].map_at_k.count(k));
      EXPECT_TRUE(report.folds[f].fused_f1.count(k));
    }
  }
  EXPECT_NEAR(report.mean_f1, mean(report.per_fold_f1), 1e-9);
  EXPECT_NEAR(report.std_f1, sample_std(report.per_fold_f1), 1e-9);
  for (std::size_t k : s.k_list) {
    std::vector<double> v;
    for (const auto& f : report.folds) v.push_back(f.map_at_k.at(k));
    EXPECT_NEAR(report.map_at_k.at(k).mean, mean(v), 1e-9);
    EXPECT_NEAR(report.map_at_k.at(k).std, sample_std(v), 1e-9);
  }
  ASSERT_TRUE(report.ttest.has_value());
  std::vector<double> nf;
  for (const auto& f : report.folds) nf.push_back(f.no_fusion_f1);
  const auto t = paired_t_test(report.per_fold_f1, nf);
  EXPECT_EQ(report.ttest->t, t.t);
  EXPECT_EQ(report.ttest->p, t.p);
}

TEST(Experiment, ParallelFoldsMatchSerial) {
  const auto data = small_data(4);
  const auto s = quick_settings();
  const auto serial = run_experiment(data, s, 1);
  const auto parallel = run_experiment(data, s, 5);
  for (int f = 0; f < kNumFolds; ++f) {
    EXPECT_EQ(serial.folds[f].loss_trace, parallel.folds[f].loss_trace);
    EXPECT_EQ(serial.folds[f].map_at_k, parallel.folds[f].map_at_k);
    EXPECT_EQ(serial.folds[f].fused_f1, parallel.folds[f].fused_f1);
  }
}

TEST(Experiment, ParallelFoldsRethrow) {
  EXPECT_THROW(parallel_folds(3,
                              [](int f) {
                                if (f == 2) throw DataError("boom");
                              }),
               DataError);
}

TEST(Experiment, WriteReportFiles) {
  const auto data = small_data();
  const auto s = quick_settings();
  const auto report = run_experiment(data, s, 2);
  const auto dir = temp_dir("report");
  write_report(report, s, dir);
  for (const char* name : {"report.csv", "report.txt", "map_at_k.csv", "f1_by_k.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  std::ifstream in(dir / "map_at_k.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "K,mean,std");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Config, ParseKList) {
  EXPECT_EQ(parse_k_list("1,2,3,4,5,10,50,100"),
            (std::vector<std::size_t>{1, 2, 3, 4, 5, 10, 50, 100}));
  EXPECT_EQ(parse_k_list(" 7 "), (std::vector<std::size_t>{7}));
  EXPECT_THROW(parse_k_list("0,1"), ConfigError);
  EXPECT_THROW(parse_k_list("3,2"), ConfigError);
  EXPECT_THROW(parse_k_list("2,2"), ConfigError);
  EXPECT_THROW(parse_k_list("a"), ConfigError);
  EXPECT_THROW(parse_k_list(""), ConfigError);
}

TEST(Config, LoadResolvesPathsAndRoundTrips) {
  const auto dir = temp_dir("config");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# comment\n"
        << "embeddings_v0 = a.mveb\n"
        << "embeddings_v1 = /abs/b.mveb\n"
        << "scores_v0 = a.mvsc\n"
        << "scores_v1 = b.mvsc   # trailing comment\n"
        << "out = results\n"
        << "seed = 9\n"
        << "epochs = 12\n"
        << "gamma = 5.5\n"
        << "learning_rate = 0.001\n"
        << "k = 1,5,20\n"
        << "primary_k = 5\n"
        << "missing_view = 0\n"
        << "fully_paired = false\n"
        << "f1_average = micro\n"
        << "jobs = 3\n";
  }
  const auto c = load_run_config(dir / "run.cfg");
  EXPECT_EQ(c.embeddings[0], dir / "a.mveb");
  EXPECT_EQ(c.embeddings[1], std::filesystem::path("/abs/b.mveb"));
  EXPECT_EQ(c.scores[1], dir / "b.mvsc");
  EXPECT_EQ(c.out_dir, dir / "results");
  EXPECT_EQ(c.settings.seed, 9u);
  EXPECT_EQ(c.settings.train.epochs, 12);
  EXPECT_EQ(c.settings.train.gamma, 5.5);
  EXPECT_EQ(c.settings.train.learning_rate, 0.001);
  EXPECT_EQ(c.settings.k_list, (std::vector<std::size_t>{1, 5, 20}));
  EXPECT_EQ(c.settings.missing_view.tag, 0);
  EXPECT_FALSE(c.settings.fully_paired);
  EXPECT_EQ(c.settings.f1_average, F1Average::kMicro);
  EXPECT_EQ(c.jobs, 3);

  {
    std::ofstream again(dir / "again.cfg");
    again << to_text(c);
  }
  const auto c2 = load_run_config(dir / "again.cfg");
  EXPECT_EQ(to_text(c2), to_text(c));
}

TEST(Config, Errors) {
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "nonsense", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "epochs", "many"), ConfigError);
  EXPECT_THROW(apply_setting(c, "missing_view", "2"), ConfigError);
  EXPECT_THROW(apply_setting(c, "fully_paired", "maybe"), ConfigError);
  EXPECT_THROW(apply_setting(c, "jobs", "0"), ConfigError);
  EXPECT_THROW(apply_setting(c, "fold", "5"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/run.cfg"), ConfigError);
  const auto dir = temp_dir("config_err");
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "epochs 12\n";
  }
  EXPECT_THROW(load_run_config(dir / "bad.cfg"), ConfigError);
  c.embeddings = {dir / "missing0.mveb", dir / "missing1.mveb"};
  try {
    check_inputs_exist(c, false);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("missing0.mveb"), std::string::npos);
  }
}
