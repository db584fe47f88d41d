// Command-line front end: synth, train, rank, classify, eval.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mvfill/commands.hpp"
#include "mvfill/errors.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string k;
  std::optional<int> missing_view;
  std::optional<int> jobs;
  std::string out;
  std::optional<int> fold;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Run configuration file")->required();
  cmd->add_option("--seed", flags.seed, "Run seed (folds and training)");
  cmd->add_option("--k", flags.k, "Comma-separated top-k list, e.g. 1,5,10");
  cmd->add_option("--missing-view", flags.missing_view, "View treated as missing (0 or 1)");
  cmd->add_option("--jobs", flags.jobs, "Folds processed in parallel");
  cmd->add_option("--out", flags.out, "Output directory");
  cmd->add_option("--fold", flags.fold, "Run a single fold (0-4)");
  cmd->add_option("--set", flags.overrides, "Override any config key: key=value");
}

mvfill::RunConfig resolve(const CommonFlags& flags) {
  mvfill::RunConfig config = mvfill::load_run_config(flags.config);
  if (flags.seed) mvfill::apply_setting(config, "seed", std::to_string(*flags.seed));
  if (!flags.k.empty()) mvfill::apply_setting(config, "k", flags.k);
  if (flags.missing_view) {
    mvfill::apply_setting(config, "missing_view", std::to_string(*flags.missing_view));
  }
  if (flags.jobs) mvfill::apply_setting(config, "jobs", std::to_string(*flags.jobs));
  if (!flags.out.empty()) mvfill::apply_setting(config, "out", flags.out);
  if (flags.fold) mvfill::apply_setting(config, "fold", std::to_string(*flags.fold));
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw mvfill::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    mvfill::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Missing-view classification by cross-view retrieval and late fusion"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* train = app.add_subcommand("train", "Train the two projection heads per fold");
  auto* rank = app.add_subcommand("rank", "Rank test queries against the validation database");
  auto* classify = app.add_subcommand("classify", "Fuse top-k scores and classify");
  auto* eval = app.add_subcommand("eval", "Full report with No-Fusion / Fully-Paired baselines");
  for (auto* cmd : {train, rank, classify, eval}) add_common(cmd, flags);

  mvfill::SyntheticConfig synth;
  std::string synth_out = "synthetic";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic two-view dataset");
  synth_cmd->add_option("--out", synth_out, "Output directory");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--classes", synth.classes, "Number of classes");
  synth_cmd->add_option("--per-class", synth.per_class, "Samples per class");
  synth_cmd->add_option("--dim-v0", synth.dim_v1, "Feature dimension of view 0");
  synth_cmd->add_option("--dim-v1", synth.dim_v2, "Feature dimension of view 1");
  synth_cmd->add_option("--rho", synth.rho, "Cross-view correlation of class centers");
  synth_cmd->add_option("--sigma", synth.sigma, "Sample noise scale");
  synth_cmd->add_option("--confuse-prob", synth.confuse_prob, "Probability a sample is ambiguous in a view");
  synth_cmd->add_option("--confuse-scale", synth.confuse_scale, "Ambiguity shift, in units of sigma");
  synth_cmd->add_option("--score-noise-v0", synth.score_noise[0], "Classifier noise, view 0");
  synth_cmd->add_option("--score-noise-v1", synth.score_noise[1], "Classifier noise, view 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth_cmd->parsed()) {
      mvfill::cmd_synth(synth, synth_out, std::cout);
      return 0;
    }
    const mvfill::RunConfig config = resolve(flags);
    if (train->parsed()) mvfill::cmd_train(config, std::cout);
    if (rank->parsed()) mvfill::cmd_rank(config, std::cout);
    if (classify->parsed()) mvfill::cmd_classify(config, std::cout);
    if (eval->parsed()) mvfill::cmd_eval(config, std::cout);
  } catch (const mvfill::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mvfill::exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
