#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "biasaudit/advi.hpp"
#include "biasaudit/models.hpp"
#include "biasaudit/table.hpp"

namespace biasaudit {

struct ScoreConfig {
    CausalModelSpec causal;
    ConfoundedModelSpec confounded;
    Method causal_method = Method::advi;
    Family causal_family = Family::full_rank;
    Family confounded_family = Family::mean_field;
    FitConfig fit;
    bool controls_only = true;
    std::uint64_t seed = 0;
    int jobs = 1;

    // Canonical "key=value;..." rendering of everything that affects results
    // (jobs excluded).
    [[nodiscard]] std::string canonical() const;
    // 16 hex digits of a stable hash of canonical().
    [[nodiscard]] std::string fingerprint() const;
};

struct ScoreDiagnostics {
    bool causal_converged = true;
    bool confounded_converged = true;
    int causal_iterations = 0;
    int confounded_iterations = 0;
    double causal_se = 0.0;
    double confounded_se = 0.0;
    std::string causal_method;
    std::string causal_family;
    std::string confounded_family;
    Eigen::Index confounded_latent_dim = 0;
    std::uint64_t seed = 0;
    std::string config_fingerprint;
};

// Delta = L_co - L_ca in nats; positive favours X -> Y, negative favours a
// latent common cause.
struct ScoreRecord {
    std::string dataset;
    std::string target;
    std::size_t n = 0;
    double L_ca = 0.0;
    double L_co = 0.0;
    double delta = 0.0;
    ScoreDiagnostics diagnostics;

    [[nodiscard]] double delta_per_sample() const { return delta / static_cast<double>(n); }
};

inline double compute_delta(double L_co, double L_ca) { return L_co - L_ca; }

// Scores one target on the rows of table (after the controls filter). The
// record's dataset label is the single label present, or "all".
ScoreRecord score_target(Table const& table, CauseSpec const& causes, std::string const& target,
    ScoreConfig const& config, std::uint64_t seed);

struct ScoreFailure {
    std::string dataset;
    std::string target;
    std::string message;
};

struct ScoreRun {
    std::vector<ScoreRecord> records;
    std::vector<ScoreFailure> failures;
};

// One record per (dataset, target) in sorted-dataset, given-target order.
// Seeds derive from (config.seed, dataset, target), so config.jobs does not
// change the output.
ScoreRun score_all(Table const& table, CauseSpec const& causes, std::vector<std::string> const& targets,
    ScoreConfig const& config);

struct DatasetAggregate {
    std::string dataset;
    double mean_delta = 0.0;
    double sd_delta = 0.0; // sample SD over targets, 0 for one target
    double mean_delta_per_sample = 0.0;
    std::size_t n_targets = 0;
    std::size_t n_failed = 0;
};

struct AggregateResult {
    std::vector<DatasetAggregate> datasets;
    std::vector<std::string> warnings;
};

AggregateResult aggregate_by_dataset(ScoreRun const& run);

} // namespace biasaudit
