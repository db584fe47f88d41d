#pragma once

#include <filesystem>
#include <iosfwd>

#include "mvfill/config.hpp"
#include "mvfill/errors.hpp"
#include "mvfill/synthetic.hpp"

namespace mvfill {

// Each command writes its artifacts under config.out_dir and a
// resolved_config.txt copy of the effective configuration. Errors are
// thrown as mvfill::Error; see exit_code().
//
// Layout:
//   folds.csv                         split membership
//   fold<f>/head_v<v>.mvph             trained heads
//   fold<f>/loss_trace.csv
//   fold<f>/index_v<m>.mvix            cached database index
//   fold<f>/rankings_missing_v<m>.csv
//   fold<f>/fusion_missing_v<m>_k<k>.csv
//   map_at_k.csv, f1_by_k.csv, report.{txt,csv}

ExperimentData load_experiment_data(const RunConfig& config, bool need_scores);

std::filesystem::path fold_dir(const RunConfig& config, int fold);

void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_rank(const RunConfig& config, std::ostream& log);
void cmd_classify(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);

// Writes view<v>.mveb / view<v>.mvsc and an experiment.cfg that points at
// them.
void cmd_synth(const SyntheticConfig& synth, const std::filesystem::path& out,
               std::ostream& log);

// 0 ok, 2 config error, 3 data error, 4 numeric failure.
int exit_code(const Error& error);

}  // namespace mvfill
