#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mvfill/commands.hpp"
#include "mvfill/config.hpp"
#include "mvfill/experiment.hpp"
#include "mvfill/fusion.hpp"
#include "mvfill/io.hpp"
#include "mvfill/metrics.hpp"

using namespace mvfill;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "mvfill_cli_test";

struct CliRun {
  int code = -1;
  std::string output;
};

CliRun run(const std::string& args) {
  fs::create_directories(kRoot);
  const auto log = kRoot / "last_output.txt";
  const std::string cmd = std::string(MVFILL_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small dataset plus a config tuned for a quick run.
fs::path make_dataset(const std::string& name) {
  const auto dir = kRoot / name;
  fs::remove_all(dir);
  const CliRun r = run("synth --out " + dir.string() +
                    " --classes 4 --per-class 20 --dim-v0 8 --dim-v1 8 --seed 5");
  EXPECT_EQ(r.code, 0) << r.output;
  std::ofstream cfg(dir / "experiment.cfg", std::ios::app);
  cfg << "epochs = 5\nd_out = 16\nlearning_rate = 0.001\nk = 1,3,5,50\nprimary_k = 3\n";
  return dir;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST(Cli, SynthWritesInputs) {
  const auto dir = make_dataset("synth");
  for (const char* f : {"view0.mveb", "view1.mveb", "view0.mvsc", "view1.mvsc", "experiment.cfg"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(read_embedding_file(dir / "view0.mveb").size(), 80u);
}

TEST(Cli, TrainWritesCheckpoints) {
  const auto dir = make_dataset("train");
  const CliRun r = run("train --config " + (dir / "experiment.cfg").string());
  ASSERT_EQ(r.code, 0) << r.output;
  for (int f = 0; f < 5; ++f) {
    for (int v = 0; v < 2; ++v) {
      const auto p = dir / "run" / ("fold" + std::to_string(f)) / ("head_v" + std::to_string(v) + ".mvph");
      ASSERT_TRUE(fs::exists(p));
      EXPECT_EQ(slurp(p).substr(0, 4), "MVPH");
    }
    EXPECT_TRUE(fs::exists(dir / "run" / ("fold" + std::to_string(f)) / "loss_trace.csv"));
  }
  EXPECT_TRUE(fs::exists(dir / "run" / "resolved_config.txt"));
}

TEST(Cli, ExitCodes) {
  const auto dir = make_dataset("codes");
  const auto cfg = (dir / "experiment.cfg").string();

  EXPECT_EQ(run("train").code, 2);
  EXPECT_EQ(run("bogus --config " + cfg).code, 2);
  EXPECT_EQ(run("train --config " + (dir / "nope.cfg").string()).code, 2);
  EXPECT_EQ(run("train --config " + cfg + " --k 3,1").code, 2);
  EXPECT_EQ(run("train --config " + cfg + " --missing-view 7").code, 2);
  EXPECT_EQ(run("train --config " + cfg + " --set unknown=1").code, 2);

  fs::copy_file(dir / "view0.mveb", dir / "view0.bak");
  fs::remove(dir / "view0.mveb");
  const CliRun missing = run("train --config " + cfg);
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.output.find("view0.mveb"), std::string::npos) << missing.output;

  {
    std::ofstream bad(dir / "view0.mveb", std::ios::binary);
    bad << "MVEB garbage";
  }
  EXPECT_EQ(run("train --config " + cfg).code, 3);

  // A zero embedding cannot be projected onto the unit sphere.
  auto set = read_embedding_file(dir / "view0.bak");
  EmbeddingSet zeroed(set.dim(), set.views(), set.classes());
  for (auto rec : set.records()) {
    if (rec.id == set.records().front().id) std::fill(rec.vector.begin(), rec.vector.end(), 0.0f);
    zeroed.add(rec);
  }
  write_embedding_file(zeroed, dir / "view0.mveb");
  EXPECT_EQ(run("train --config " + cfg + " --fold 0").code, 4);

  fs::remove(dir / "view0.mveb");
  fs::copy_file(dir / "view0.bak", dir / "view0.mveb");
  EXPECT_EQ(run("rank --config " + cfg + " --out " + (dir / "fresh").string()).code, 3);
}

TEST(Cli, RunsAreByteIdentical) {
  const auto dir = make_dataset("determinism");
  const auto cfg = (dir / "experiment.cfg").string();
  auto pipeline = [&] {
    fs::remove_all(dir / "run");
    EXPECT_EQ(run("train --config " + cfg + " --jobs 3").code, 0);
    EXPECT_EQ(run("rank --config " + cfg + " --jobs 2").code, 0);
    EXPECT_EQ(run("classify --config " + cfg).code, 0);
    EXPECT_EQ(run("eval --config " + cfg).code, 0);
    return snapshot(dir / "run");
  };
  const auto first = pipeline();
  const auto second = pipeline();
  EXPECT_GT(first.size(), 30u);
  ASSERT_EQ(first.size(), second.size());
  for (const auto& [name, bytes] : first) {
    ASSERT_TRUE(second.count(name)) << name;
    EXPECT_TRUE(second.at(name) == bytes) << name;
  }

  // eval from scratch produces the same report as the staged pipeline.
  fs::remove_all(dir / "run");
  EXPECT_EQ(run("eval --config " + cfg + " --jobs 5").code, 0);
  EXPECT_EQ(slurp(dir / "run" / "report.csv"), first.at("report.csv"));
  EXPECT_EQ(slurp(dir / "run" / "report.txt"), first.at("report.txt"));
}

TEST(Cli, MatchesLibraryCalls) {
  const auto dir = make_dataset("library");
  const auto cfg_path = dir / "experiment.cfg";
  ASSERT_EQ(run("train --config " + cfg_path.string()).code, 0);
  ASSERT_EQ(run("rank --config " + cfg_path.string()).code, 0);

  const RunConfig config = load_run_config(cfg_path);
  const ExperimentData data = load_experiment_data(config, true);
  const auto splits = make_folds(labeled_samples(data.embeddings), config.settings.seed);
  const auto lib_dir = kRoot / "library_out";
  fs::create_directories(lib_dir);
  for (int f = 0; f < 5; ++f) {
    auto tc = config.settings.train;
    tc.seed = fold_train_seed(config.settings.seed, f);
    const auto model = train_fold(data, splits[f], tc);
    const auto fdir = fold_dir(config, f);
    EXPECT_EQ(encode_checkpoint(model.heads[0]), encode_checkpoint(read_checkpoint(fdir / "head_v0.mvph")));
    EXPECT_EQ(encode_checkpoint(model.heads[1]), encode_checkpoint(read_checkpoint(fdir / "head_v1.mvph")));
    const auto ranking = rank_fold(data, splits[f], model.heads, config.settings.missing_view);
    const auto lib_csv = lib_dir / ("rankings" + std::to_string(f) + ".csv");
    write_rankings_csv(ranking, lib_csv);
    EXPECT_EQ(slurp(lib_csv), slurp(fdir / "rankings_missing_v1.csv")) << "fold " << f;
  }
}

TEST(Cli, ClassifyEqualsComposingRankOutput) {
  const auto dir = make_dataset("compose");
  const auto cfg_path = dir / "experiment.cfg";
  ASSERT_EQ(run("train --config " + cfg_path.string()).code, 0);
  ASSERT_EQ(run("rank --config " + cfg_path.string()).code, 0);
  const CliRun classify = run("classify --config " + cfg_path.string());
  ASSERT_EQ(classify.code, 0) << classify.output;
  // k=50 exceeds the 8-entry database of each fold.
  EXPECT_NE(classify.output.find("warning"), std::string::npos);

  const RunConfig config = load_run_config(cfg_path);
  const ExperimentData data = load_experiment_data(config, true);
  const auto lib_dir = kRoot / "compose_out";
  fs::create_directories(lib_dir);
  for (int f = 0; f < 5; ++f) {
    const auto ranking = read_rankings_csv(fold_dir(config, f) / "rankings_missing_v1.csv");
    for (std::size_t k : config.settings.k_list) {
      std::vector<FusionResult> results;
      for (const auto& list : ranking.rankings) {
        auto r = classify_missing(*data.scores[0].find(list.query_id), list, data.scores[1], k);
        r.sigma_f1.label = data.scores[0].find(list.query_id)->label;
        results.push_back(r);
      }
      const auto lib_csv = lib_dir / "fusion.csv";
      write_fusion_csv(results, lib_csv);
      EXPECT_EQ(slurp(lib_csv),
                slurp(fold_dir(config, f) / ("fusion_missing_v1_k" + std::to_string(k) + ".csv")))
          << "fold " << f << " k " << k;
    }
  }

  std::ifstream table(config.out_dir / "f1_by_k.csv");
  std::string line;
  std::getline(table, line);
  std::vector<std::size_t> ks;
  while (std::getline(table, line)) ks.push_back(std::stoul(line.substr(0, line.find(','))));
  EXPECT_EQ(ks, config.settings.k_list);
}

TEST(Cli, FlagsOverrideConfig) {
  const auto dir = make_dataset("flags");
  const auto out = dir / "elsewhere";
  const CliRun r = run("train --config " + (dir / "experiment.cfg").string() + " --seed 42 --k 1,3 --missing-view 0 --out " +
                    out.string() + " --fold 1 --set epochs=2");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto resolved = slurp(out / "resolved_config.txt");
  EXPECT_NE(resolved.find("seed = 42"), std::string::npos);
  EXPECT_NE(resolved.find("k = 1,3"), std::string::npos);
  EXPECT_NE(resolved.find("missing_view = 0"), std::string::npos);
  EXPECT_NE(resolved.find("epochs = 2"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "fold1" / "head_v0.mvph"));
  EXPECT_FALSE(fs::exists(out / "fold0"));
}
