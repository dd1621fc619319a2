#include "biasaudit/synth.hpp"

#include <cmath>
#include <cstdio>

#include "biasaudit/errors.hpp"
#include "biasaudit/seeding.hpp"

namespace biasaudit {

namespace {

double random_effect(Rng& rng)
{
    double const magnitude = 0.5 + rng.uniform();
    return rng.uniform() < 0.5 ? -magnitude : magnitude;
}

std::string padded(std::size_t i, int width)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, i);
    return buf;
}

} // namespace

void GenSpec::validate() const
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw PreconditionError("alpha must lie in [0, 1]");
    }
    if (n < 10) {
        throw PreconditionError("generator needs n >= 10");
    }
    if (m < 1 || k < 1) {
        throw PreconditionError("generator needs m >= 1 and k >= 1");
    }
    if (!(noise_sd > 0.0)) {
        throw PreconditionError("noise SD must be positive");
    }
    if (weights && weights->size() != m) {
        throw DimensionError("weights must have length m");
    }
    if (loadings && (loadings->rows() != m || loadings->cols() != k)) {
        throw DimensionError("loadings must be m x k");
    }
    if (target_loadings && target_loadings->size() != k) {
        throw DimensionError("target loadings must have length k");
    }
}

double target_value(Eigen::Ref<Eigen::VectorXd const> const& x, Eigen::Ref<Eigen::VectorXd const> const& z,
    double noise, GroundTruth const& truth)
{
    return truth.alpha * truth.weights.dot(x) + (1.0 - truth.alpha) * truth.target_loadings.dot(z) + noise;
}

GeneratedTable gen_mixed(GenSpec const& spec)
{
    spec.validate();
    auto const n = static_cast<Eigen::Index>(spec.n);
    auto const m = static_cast<Eigen::Index>(spec.m);
    auto const k = static_cast<Eigen::Index>(spec.k);

    Rng params(derive_seed(spec.seed, {1}));
    GroundTruth truth;
    truth.alpha = spec.alpha;
    truth.seed = spec.seed;
    truth.dataset = spec.dataset;
    truth.noise_sd = spec.noise_sd;
    // Always draw all three so a supplied parameter does not shift the others.
    Eigen::VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        w(i) = random_effect(params);
    }
    Eigen::MatrixXd a(m, k);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            a(i, j) = random_effect(params);
        }
    }
    Eigen::VectorXd b(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        b(j) = random_effect(params);
    }
    truth.weights = spec.weights.value_or(w);
    if (spec.loadings) {
        a = *spec.loadings;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        double const norm = a.row(i).norm();
        if (!(norm > 0.0)) {
            throw PreconditionError("loading rows must be nonzero");
        }
        a.row(i) /= norm;
    }
    truth.loadings = a;
    truth.target_loadings = spec.target_loadings.value_or(b);

    Rng draws(derive_seed(spec.seed, {2}));
    truth.z.resize(n, k);
    Eigen::MatrixXd eps(n, m);
    truth.noise.resize(n);
    Eigen::MatrixXd x(n, m);
    std::vector<double> ages(spec.n);
    std::vector<int> sexes(spec.n);
    std::vector<std::string> ids(spec.n);
    double const sa = std::sqrt(spec.alpha);
    double const sc = std::sqrt(1.0 - spec.alpha);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            truth.z(i, j) = draws.normal();
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            eps(i, j) = draws.normal();
        }
        truth.noise(i) = spec.noise_sd * draws.normal();
        x.row(i) = sa * eps.row(i) + sc * (a * truth.z.row(i).transpose()).transpose();
        auto const r = static_cast<std::size_t>(i);
        ages[r] = 20.0 + 60.0 * draws.uniform();
        sexes[r] = draws.uniform() < 0.5 ? 1 : 0;
        ids[r] = spec.dataset + "-" + padded(r + 1, 5);
    }

    Eigen::MatrixXd features(n, m + 1);
    features.leftCols(m) = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        features(i, m) = target_value(x.row(i).transpose(), truth.z.row(i).transpose(), truth.noise(i), truth);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        truth.cause_columns.push_back("x_" + std::to_string(j + 1));
    }
    truth.target_column = "vol_y";
    auto names = truth.cause_columns;
    names.push_back(truth.target_column);

    Table table(std::move(ids), std::vector<std::string>(spec.n, spec.dataset), std::move(ages), std::move(sexes),
        std::move(names), std::move(features));
    return GeneratedTable{std::move(table), std::move(truth)};
}

Eigen::VectorXd replay_target(Table const& table, GroundTruth const& truth)
{
    auto const n = static_cast<Eigen::Index>(table.rows());
    if (truth.z.rows() != n || truth.noise.size() != n) {
        throw DimensionError("ground truth does not match the table");
    }
    Eigen::MatrixXd const x = table.columns(truth.cause_columns);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = target_value(x.row(i).transpose(), truth.z.row(i).transpose(), truth.noise(i), truth);
    }
    return y;
}

Table gen_multidataset(MultiDatasetSpec const& spec)
{
    auto const n_sets = spec.shifts.size();
    if (n_sets < 2) {
        throw PreconditionError("need at least two datasets");
    }
    if (!spec.scales.empty() && spec.scales.size() != n_sets) {
        throw DimensionError("scales must match shifts");
    }
    if (spec.n_per_dataset < 2 || spec.n_volume + spec.n_thickness < 1 || spec.n_volume < 0 || spec.n_thickness < 0) {
        throw PreconditionError("invalid multi-dataset size");
    }
    if (!(spec.diseased_fraction >= 0.0 && spec.diseased_fraction < 1.0)) {
        throw PreconditionError("diseased fraction must lie in [0, 1)");
    }
    std::vector<std::string> names;
    for (int j = 0; j < spec.n_volume; ++j) {
        names.push_back("vol_" + std::to_string(j + 1));
    }
    for (int j = 0; j < spec.n_thickness; ++j) {
        names.push_back("thick_" + std::to_string(j + 1));
    }
    auto const p = static_cast<Eigen::Index>(names.size());
    auto const total = n_sets * spec.n_per_dataset;
    int const width = n_sets < 100 ? 2 : 4;

    std::vector<std::string> ids, labels, diagnoses;
    std::vector<double> ages;
    std::vector<int> sexes;
    std::vector<bool> control;
    Eigen::MatrixXd features(static_cast<Eigen::Index>(total), p);
    Eigen::Index row = 0;
    for (std::size_t d = 0; d < n_sets; ++d) {
        auto const label = spec.label_prefix + padded(d + 1, width);
        double const shift = spec.shifts[d];
        double const scale = spec.scales.empty() ? 1.0 : spec.scales[d];
        if (!(scale > 0.0)) {
            throw PreconditionError("scale factors must be positive");
        }
        Rng rng(derive_seed(spec.seed, {d}));
        for (std::size_t i = 0; i < spec.n_per_dataset; ++i, ++row) {
            ids.push_back(label + "-" + padded(i + 1, 5));
            labels.push_back(label);
            ages.push_back(20.0 + 60.0 * rng.uniform());
            sexes.push_back(rng.uniform() < 0.5 ? 1 : 0);
            bool const diseased = spec.diseased_fraction > 0.0 && rng.uniform() < spec.diseased_fraction;
            control.push_back(!diseased);
            diagnoses.push_back(diseased ? "AD" : "CN");
            for (Eigen::Index j = 0; j < p; ++j) {
                features(row, j) = shift + scale * rng.normal();
            }
        }
    }
    std::optional<std::vector<std::string>> dx;
    if (spec.diseased_fraction > 0.0) {
        dx = std::move(diagnoses);
    }
    return Table(std::move(ids), std::move(labels), std::move(ages), std::move(sexes), std::move(names),
        std::move(features), std::move(dx), std::move(control));
}

Table gen_multidataset(std::vector<double> const& shifts, std::vector<double> const& scales,
    std::size_t n_per_dataset, std::uint64_t seed)
{
    MultiDatasetSpec spec;
    spec.shifts = shifts;
    spec.scales = scales;
    spec.n_per_dataset = n_per_dataset;
    spec.seed = seed;
    return gen_multidataset(spec);
}

} // namespace biasaudit
