#include "biasaudit/score.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <thread>

#include "biasaudit/seeding.hpp"

namespace biasaudit {

namespace {

std::string fmt_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

std::string ScoreConfig::canonical() const
{
    std::string s;
    s += "sigma_x=" + fmt_real(causal.sigma_x) + ";";
    s += "sigma_w=" + fmt_real(causal.sigma_w) + ";";
    s += "sigma_y=" + fmt_real(causal.sigma_y) + ";";
    s += "k=" + std::to_string(confounded.k) + ";";
    s += "sigma_z=" + fmt_real(confounded.sigma_z) + ";";
    s += "sigma_w_confounded=" + fmt_real(confounded.sigma_w) + ";";
    s += "sigma_obs=" + fmt_real(confounded.sigma_obs) + ";";
    s += "method=" + to_string(causal_method) + ";";
    s += "causal_family=" + to_string(causal_family) + ";";
    s += "confounded_family=" + to_string(confounded_family) + ";";
    s += "mc_samples=" + std::to_string(fit.mc_samples_per_step) + ";";
    s += "learning_rate=" + fmt_real(fit.learning_rate) + ";";
    s += "max_iterations=" + std::to_string(fit.max_iterations) + ";";
    s += "window=" + std::to_string(fit.convergence_window) + ";";
    s += "tolerance=" + fmt_real(fit.relative_tolerance) + ";";
    s += "final_elbo_samples=" + std::to_string(fit.final_elbo_samples) + ";";
    s += "controls_only=" + std::string(controls_only ? "true" : "false") + ";";
    s += "seed=" + std::to_string(seed) + ";";
    return s;
}

std::string ScoreConfig::fingerprint() const
{
    return hex64(stable_hash(canonical()));
}

ScoreRecord score_target(Table const& table, CauseSpec const& causes, std::string const& target,
    ScoreConfig const& config, std::uint64_t seed)
{
    Table const rows = config.controls_only ? table.controls_only() : table;
    auto const m = static_cast<std::size_t>(causes.terms.size());
    if (rows.rows() < m + 5) {
        throw PreconditionError("need at least m + 5 = " + std::to_string(m + 5) + " subjects, have "
            + std::to_string(rows.rows()));
    }
    for (auto const& t : causes.terms) {
        if (t.column == target) {
            throw SchemaError("target '" + target + "' is also a cause");
        }
    }
    if (!rows.has_column(target)) {
        throw SchemaError("no target column '" + target + "'");
    }

    DesignMatrix const design = build_design(rows, causes);
    Standardized y;
    try {
        y = standardize_column(rows.column(target));
    } catch (DegenerateColumnError const&) {
        throw DegenerateColumnError("target '" + target + "' has zero variance");
    }

    VariationalOptions causal_opts{config.fit, config.causal_family, false};
    causal_opts.fit.seed = derive_seed(seed, {1});
    VariationalOptions confounded_opts{config.fit, config.confounded_family, false};
    confounded_opts.fit.seed = derive_seed(seed, {2});

    auto const lca = L_causal(design.values, y.values, config.causal, config.causal_method, causal_opts);
    auto const lco = L_confounded(make_joint(design.values, y.values), config.confounded, confounded_opts);

    auto labels = rows.distinct_datasets();
    ScoreRecord rec;
    rec.dataset = labels.size() == 1 ? labels.front() : "all";
    rec.target = target;
    rec.n = rows.rows();
    rec.L_ca = lca.nats;
    rec.L_co = lco.nats;
    rec.delta = compute_delta(rec.L_co, rec.L_ca);
    auto& d = rec.diagnostics;
    d.causal_converged = lca.converged;
    d.confounded_converged = lco.converged;
    d.causal_iterations = lca.iterations;
    d.confounded_iterations = lco.iterations;
    d.causal_se = lca.se;
    d.confounded_se = lco.se;
    d.causal_method = to_string(lca.method);
    d.causal_family = lca.method == Method::advi ? to_string(lca.family) : "none";
    d.confounded_family = to_string(lco.family);
    d.confounded_latent_dim = lco.latent_dim;
    d.seed = seed;
    d.config_fingerprint = config.fingerprint();
    return rec;
}

ScoreRun score_all(Table const& table, CauseSpec const& causes, std::vector<std::string> const& targets,
    ScoreConfig const& config)
{
    if (targets.empty()) {
        throw PreconditionError("no targets to score");
    }
    causes.validate();
    auto const datasets = table.distinct_datasets();

    struct Job {
        std::string dataset;
        std::string target;
    };
    std::vector<Job> jobs;
    for (auto const& ds : datasets) {
        for (auto const& t : targets) {
            jobs.push_back({ds, t});
        }
    }
    std::map<std::string, Table> subsets;
    for (auto const& ds : datasets) {
        subsets.emplace(ds, table.only_dataset(ds));
    }

    std::vector<std::optional<ScoreRecord>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            auto const& job = jobs[i];
            auto const seed = derive_seed(config.seed, {stable_hash(job.dataset), stable_hash(job.target)});
            try {
                results[i] = score_target(subsets.at(job.dataset), causes, job.target, config, seed);
            } catch (std::exception const& e) {
                errors[i] = e.what();
            }
        }
    };
    auto const nthreads = static_cast<std::size_t>(std::max(1, config.jobs));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(nthreads, jobs.size()); ++t) {
            pool.emplace_back(worker);
        }
    }

    ScoreRun run;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (results[i]) {
            run.records.push_back(std::move(*results[i]));
        } else {
            run.failures.push_back({jobs[i].dataset, jobs[i].target, errors[i]});
        }
    }
    return run;
}

AggregateResult aggregate_by_dataset(ScoreRun const& run)
{
    std::map<std::string, std::vector<ScoreRecord const*>> ok;
    std::map<std::string, std::size_t> failed;
    for (auto const& r : run.records) {
        ok[r.dataset].push_back(&r);
    }
    for (auto const& f : run.failures) {
        ++failed[f.dataset];
        ok.try_emplace(f.dataset);
    }
    AggregateResult out;
    for (auto const& [dataset, recs] : ok) {
        if (recs.empty()) {
            out.warnings.push_back("dataset '" + dataset + "' has no successful scores; excluded");
            continue;
        }
        DatasetAggregate a;
        a.dataset = dataset;
        a.n_targets = recs.size();
        a.n_failed = failed.count(dataset) != 0 ? failed.at(dataset) : 0;
        double sum = 0.0;
        double sum_ps = 0.0;
        for (auto const* r : recs) {
            sum += r->delta;
            sum_ps += r->delta_per_sample();
        }
        a.mean_delta = sum / static_cast<double>(recs.size());
        a.mean_delta_per_sample = sum_ps / static_cast<double>(recs.size());
        if (recs.size() > 1) {
            double ss = 0.0;
            for (auto const* r : recs) {
                ss += (r->delta - a.mean_delta) * (r->delta - a.mean_delta);
            }
            a.sd_delta = std::sqrt(ss / static_cast<double>(recs.size() - 1));
        }
        out.datasets.push_back(a);
    }
    return out;
}

} // namespace biasaudit
