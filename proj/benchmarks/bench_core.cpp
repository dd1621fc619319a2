#include <benchmark/benchmark.h>

#include "biasaudit/advi.hpp"
#include "biasaudit/forest.hpp"
#include "biasaudit/models.hpp"
#include "biasaudit/score.hpp"
#include "biasaudit/seeding.hpp"
#include "biasaudit/synth.hpp"

using namespace biasaudit;

namespace {

Eigen::MatrixXd noise(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.normal();
    }
    return m;
}

void BM_CausalEvidenceClosedForm(benchmark::State& state)
{
    auto const n = state.range(0);
    Eigen::MatrixXd x = noise(n, 3, 1);
    Eigen::VectorXd y = noise(n, 1, 2).col(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(causal_evidence_closed_form(x, y, {}));
    }
}
BENCHMARK(BM_CausalEvidenceClosedForm)->Arg(50)->Arg(200)->Arg(500);

void BM_ConfoundedTarget(benchmark::State& state)
{
    auto const n = state.range(0);
    JointVector v{noise(n, 4, 3)};
    auto target = confounded_target(v, {});
    Eigen::VectorXd theta = noise(n + 4, 1, 4).col(0);
    Eigen::VectorXd grad;
    for (auto _ : state) {
        benchmark::DoNotOptimize(target(theta, grad));
    }
}
BENCHMARK(BM_ConfoundedTarget)->Arg(100)->Arg(500)->Arg(2000);

void BM_ScoreTarget(benchmark::State& state)
{
    GenSpec g;
    g.n = static_cast<std::size_t>(state.range(0));
    g.alpha = 0.5;
    auto const table = gen_mixed(g).table;
    auto const causes = CauseSpec::parse("x_1,x_2,x_3");
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_target(table, causes, "vol_y", {}, 7).delta);
    }
}
BENCHMARK(BM_ScoreTarget)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_TrainForest(benchmark::State& state)
{
    auto const n = state.range(0);
    Eigen::MatrixXd x = noise(n, 8, 5);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<int>(i % 15);
    }
    std::vector<std::string> classes;
    for (int c = 0; c < 15; ++c) {
        classes.push_back(std::to_string(c));
    }
    ForestConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_forest(x, labels, classes, {}, cfg, 9).trees.size());
    }
}
BENCHMARK(BM_TrainForest)->Arg(300)->Arg(2100)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
