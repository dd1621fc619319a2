#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "biasaudit/forest.hpp"
#include "biasaudit/score.hpp"
#include "biasaudit/synth.hpp"
#include "biasaudit/table.hpp"
#include "run_config.hpp"

namespace biasaudit::cli {

// Table-1 style summary plus the rejection report.
std::string summary_text(std::vector<DatasetSummary> const& summary, std::vector<RejectedRow> const& rejected);

// dataset,target,n,L_ca,L_co,delta,delta_per_sample,converged
std::string scores_csv(ScoreRun const& run);
// dataset,mean_delta,sd_delta,n_targets
std::string aggregate_csv(AggregateResult const& agg);
std::string scores_json(ScoreRun const& run, AggregateResult const& agg, RunConfig const& config);

// feature_set,fraction,mean_acc,sd_acc,repetitions
std::string curve_csv(NameThatDatasetResult const& result);
// true_dataset,predicted_dataset,count
std::string confusion_csv(ConfusionMatrix const& cm);
std::string classify_json(NameThatDatasetResult const& result, RunConfig const& config);

std::string truth_json(GroundTruth const& truth);
GroundTruth truth_from_json(std::string const& text);

void write_text_file(std::filesystem::path const& path, std::string const& content);
std::string read_text_file(std::filesystem::path const& path);

} // namespace biasaudit::cli
