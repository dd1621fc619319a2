#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

#include <CLI11.hpp>

#include "biasaudit/errors.hpp"
#include "biasaudit/forest.hpp"
#include "biasaudit/score.hpp"
#include "biasaudit/synth.hpp"
#include "biasaudit/table.hpp"
#include "report.hpp"
#include "run_config.hpp"

namespace biasaudit::cli {

namespace {

namespace fs = std::filesystem;

// Flags collected as key/value overrides on top of the config file.
struct Overrides {
    std::string config_path;
    KeyValues values;

    void option(CLI::App* app, std::string const& flag, std::string const& key, std::string const& help)
    {
        app->add_option_function<std::string>(flag, [this, key](std::string const& v) { values[key] = v; }, help);
    }

    [[nodiscard]] KeyValues resolve() const
    {
        KeyValues kv;
        if (!config_path.empty()) {
            kv = read_key_value_file(config_path);
        }
        for (auto const& [k, v] : values) {
            kv[k] = v;
        }
        return kv;
    }
};

void add_common(CLI::App* app, Overrides& ov)
{
    app->add_option("--config", ov.config_path, "Flat key = value config file; flags override it");
    ov.option(app, "--input", "input", "Input CSV table");
}

void add_run_flags(CLI::App* app, Overrides& ov)
{
    ov.option(app, "--out", "out", "Output directory");
    ov.option(app, "--seed", "seed", "Master seed");
    ov.option(app, "--jobs", "jobs", "Worker threads");
    app->add_flag_callback("--controls-only", [&ov] { ov.values["controls_only"] = "true"; },
        "Use healthy controls only (default)");
    app->add_flag_callback("--with-disease", [&ov] { ov.values["controls_only"] = "false"; },
        "Include diseased subjects");
}

LoadResult load_input(RunConfig const& cfg)
{
    if (cfg.input.empty()) {
        throw SchemaError("no input file given (--input)");
    }
    return load_csv(cfg.input, cfg.schema);
}

fs::path prepare_out(RunConfig const& cfg)
{
    if (cfg.out.empty()) {
        throw SchemaError("no output directory given (--out)");
    }
    fs::create_directories(cfg.out);
    return cfg.out;
}

int cmd_validate(KeyValues const& kv, std::ostream& out)
{
    auto const cfg = resolve_run_config(kv);
    auto const loaded = load_input(cfg);
    out << summary_text(summarize(loaded.table), loaded.rejected);
    return kSuccess;
}

int cmd_score(KeyValues const& kv, std::ostream& out, std::ostream& err)
{
    auto cfg = resolve_run_config(kv);
    auto const loaded = load_input(cfg);
    if (cfg.targets.empty()) {
        cfg.targets = default_targets(loaded.table, cfg.schema);
        if (cfg.targets.empty()) {
            throw SchemaError("no target columns found; pass --targets");
        }
    }
    auto const dir = prepare_out(cfg);
    auto const run = score_all(loaded.table, cfg.causes, cfg.targets, cfg.score);
    auto const agg = aggregate_by_dataset(run);

    write_text_file(dir / "scores.csv", scores_csv(run));
    write_text_file(dir / "aggregate.csv", aggregate_csv(agg));
    write_text_file(dir / "scores.json", scores_json(run, agg, cfg));

    out << "scored " << run.records.size() << " of " << run.records.size() + run.failures.size()
        << " (dataset, target) pairs; config " << cfg.fingerprint() << "\n";
    for (auto const& a : agg.datasets) {
        out << "  " << a.dataset << ": mean delta " << a.mean_delta << " nats over " << a.n_targets << " targets\n";
    }
    if (!run.failures.empty()) {
        err << "failures:\n";
        for (auto const& f : run.failures) {
            err << "  " << f.dataset << " / " << f.target << ": " << f.message << "\n";
        }
    }
    for (auto const& w : agg.warnings) {
        err << "warning: " << w << "\n";
    }
    return run.records.empty() ? kComputeFailure : kSuccess;
}

int cmd_classify(KeyValues const& kv, std::ostream& out, std::ostream& err)
{
    auto const cfg = resolve_run_config(kv);
    auto const loaded = load_input(cfg);
    auto const labels =
        (cfg.classify.controls_only ? loaded.table.controls_only() : loaded.table).distinct_datasets();
    if (labels.size() < 2) {
        err << "error: classification needs at least two dataset labels, found " << labels.size() << "\n";
        return kUsageError;
    }
    auto const sets = resolve_feature_sets(cfg.feature_sets, loaded.table);
    if (sets.empty()) {
        throw SchemaError("no feature sets could be formed from the table");
    }
    auto const dir = prepare_out(cfg);
    auto const result = name_that_dataset(loaded.table, sets, cfg.classify);

    auto chosen = result.feature_sets.end() - 1;
    if (!cfg.confusion_feature_set.empty()) {
        chosen = std::find_if(result.feature_sets.begin(), result.feature_sets.end(),
            [&](auto const& r) { return r.curve.feature_set == cfg.confusion_feature_set; });
        if (chosen == result.feature_sets.end()) {
            throw SchemaError("confusion_feature_set '" + cfg.confusion_feature_set + "' is not a feature set");
        }
    }
    write_text_file(dir / "curve.csv", curve_csv(result));
    write_text_file(dir / "confusion.csv", confusion_csv(chosen->confusion));
    for (auto const& r : result.feature_sets) {
        write_text_file(dir / ("confusion_" + r.curve.feature_set + ".csv"), confusion_csv(r.confusion));
    }
    write_text_file(dir / "classify.json", classify_json(result, cfg));

    for (auto const& r : result.feature_sets) {
        if (!r.curve.points.empty()) {
            auto const& last = r.curve.points.back();
            out << r.curve.feature_set << ": accuracy " << last.mean_accuracy << " at fraction " << last.train_fraction
                << " (chance " << 1.0 / static_cast<double>(labels.size()) << ")\n";
        }
    }
    for (auto const& w : result.warnings) {
        err << "warning: " << w << "\n";
    }
    return kSuccess;
}

int cmd_simulate(KeyValues const& kv, std::ostream& out)
{
    auto const cfg = resolve_simulate_config(kv);
    if (cfg.out.empty()) {
        throw SchemaError("no output directory given (--out)");
    }
    fs::create_directories(cfg.out);
    auto const csv = cfg.out / "simulated.csv";
    if (cfg.mode == "mixed") {
        auto const gen = gen_mixed(cfg.mixed);
        write_csv(csv, gen.table);
        write_text_file(cfg.out / "simulated.truth.json", truth_json(gen.truth));
        out << "wrote " << gen.table.rows() << " rows (alpha " << cfg.mixed.alpha << ") to " << csv.string() << "\n";
    } else {
        auto const table = gen_multidataset(cfg.multi);
        write_csv(csv, table);
        out << "wrote " << table.rows() << " rows in " << cfg.multi.shifts.size() << " datasets to " << csv.string()
            << "\n";
    }
    return kSuccess;
}

int cmd_replay(std::string const& input, std::string const& truth_path, std::ostream& out, std::ostream& err)
{
    auto const truth = truth_from_json(read_text_file(truth_path));
    SchemaConfig schema;
    schema.covariate_columns = truth.cause_columns;
    auto const loaded = load_csv(input, schema);
    auto const replayed = replay_target(loaded.table, truth);
    auto const stored = loaded.table.column(truth.target_column);
    long mismatches = 0;
    for (Eigen::Index i = 0; i < stored.size(); ++i) {
        mismatches += replayed(i) != stored(i) ? 1 : 0;
    }
    out << "replayed " << stored.size() << " rows, " << mismatches << " mismatches\n";
    if (mismatches != 0) {
        err << "error: target column does not match the ground-truth replay\n";
        return kComputeFailure;
    }
    return kSuccess;
}

} // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Dataset bias audit: confounding scores and dataset-membership classification"};
    app.require_subcommand(1);

    Overrides validate_ov, score_ov, classify_ov, simulate_ov;

    auto* validate = app.add_subcommand("validate", "Ingest a table and print per-dataset summaries");
    add_common(validate, validate_ov);

    auto* score = app.add_subcommand("score", "Causal vs confounded description lengths per (dataset, target)");
    add_common(score, score_ov);
    add_run_flags(score, score_ov);
    score_ov.option(score, "--k", "k", "Latent confounder dimension");
    score_ov.option(score, "--family", "family", "Variational family: mean-field or full-rank");
    score_ov.option(score, "--method", "method", "Causal model evidence: advi or closed-form");
    score_ov.option(score, "--causes", "causes", "Presumed causes, e.g. age,age^2,sex");
    score_ov.option(score, "--targets", "targets", "Comma separated target columns");

    auto* classify = app.add_subcommand("classify", "Name That Dataset learning curves and confusion matrix");
    add_common(classify, classify_ov);
    add_run_flags(classify, classify_ov);
    classify_ov.option(classify, "--fractions", "fractions", "Comma separated training fractions");
    classify_ov.option(classify, "--repetitions", "repetitions", "Repetitions per fraction");
    classify_ov.option(classify, "--trees", "trees", "Trees per forest");
    classify_ov.option(classify, "--feature-sets", "feature_sets", "name:col,col;name:vol_*");

    auto* simulate = app.add_subcommand("simulate", "Write a synthetic table (and ground truth for mixed mode)");
    simulate->add_option("--config", simulate_ov.config_path, "Flat key = value config file");
    simulate_ov.option(simulate, "--out", "out", "Output directory");
    simulate_ov.option(simulate, "--seed", "seed", "Seed");
    simulate_ov.option(simulate, "--mode", "mode", "mixed (causal/confounded) or multi (dataset shifts)");
    simulate_ov.option(simulate, "--alpha", "alpha", "Mixing weight, 1 = causal, 0 = confounded");
    simulate_ov.option(simulate, "--n", "n", "Rows (mixed mode)");
    simulate_ov.option(simulate, "--m", "m", "Number of causes (mixed mode)");
    simulate_ov.option(simulate, "--k", "k", "Latent dimension (mixed mode)");
    simulate_ov.option(simulate, "--noise-sd", "noise_sd", "Target noise SD (mixed mode)");
    simulate_ov.option(simulate, "--dataset-label", "dataset_label", "Dataset label (mixed mode)");
    simulate_ov.option(simulate, "--datasets", "datasets", "Number of datasets (multi mode)");
    simulate_ov.option(simulate, "--shift", "shift", "Per-dataset mean shift step (multi mode)");
    simulate_ov.option(simulate, "--shifts", "shifts", "Explicit per-dataset shifts (multi mode)");
    simulate_ov.option(simulate, "--scales", "scales", "Per-dataset scale factors (multi mode)");
    simulate_ov.option(simulate, "--rows-per-dataset", "rows_per_dataset", "Rows per dataset (multi mode)");
    simulate_ov.option(simulate, "--diseased-fraction", "diseased_fraction", "Share of diseased rows (multi mode)");

    std::string replay_input, replay_truth;
    auto* replay = app.add_subcommand("replay", "Check a simulated table against its ground-truth sidecar");
    replay->add_option("--input", replay_input, "Simulated CSV")->required();
    replay->add_option("--truth", replay_truth, "Ground-truth JSON sidecar")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kSuccess;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (CLI::ParseError const& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(validate_ov.resolve(), out);
        }
        if (score->parsed()) {
            return cmd_score(score_ov.resolve(), out, err);
        }
        if (classify->parsed()) {
            return cmd_classify(classify_ov.resolve(), out, err);
        }
        if (simulate->parsed()) {
            return cmd_simulate(simulate_ov.resolve(), out);
        }
        if (replay->parsed()) {
            return cmd_replay(replay_input, replay_truth, out, err);
        }
    } catch (SchemaError const& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (EmptyTableError const& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (PreconditionError const& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << "\n";
        return kComputeFailure;
    }
    return kUsageError;
}

} // namespace biasaudit::cli
