#include <doctest.h>

#include <cmath>
#include <numeric>

#include "biasaudit/errors.hpp"
#include "biasaudit/score.hpp"
#include "biasaudit/synth.hpp"

using namespace biasaudit;

namespace {

Table mixed(double alpha, std::size_t n, std::uint64_t seed, std::string const& label = "synthetic")
{
    GenSpec g;
    g.alpha = alpha;
    g.n = n;
    g.seed = seed;
    g.dataset = label;
    return gen_mixed(g).table;
}

CauseSpec const kCauses = CauseSpec::parse("x_1,x_2,x_3");

} // namespace

TEST_SUITE("score")
{
    TEST_CASE("delta sign follows the generating structure")
    {
        ScoreConfig cfg;
        auto causal = score_target(mixed(1.0, 300, 1), kCauses, "vol_y", cfg, 7);
        CHECK(causal.delta > 0.0);
        auto conf = score_target(mixed(0.0, 300, 1), kCauses, "vol_y", cfg, 7);
        CHECK(conf.delta < 0.0);
        CHECK(causal.delta == compute_delta(causal.L_co, causal.L_ca));
        CHECK(causal.n == 300);
        CHECK(causal.dataset == "synthetic");
        CHECK(causal.diagnostics.config_fingerprint == cfg.fingerprint());
        CHECK(causal.diagnostics.causal_family == "full-rank");
        CHECK(causal.diagnostics.confounded_family == "mean-field");
        CHECK(causal.diagnostics.confounded_latent_dim == 300 + 4);
    }

    TEST_CASE("too few rows")
    {
        auto t = mixed(1.0, 20, 2);
        std::vector<std::size_t> rows(4);
        std::iota(rows.begin(), rows.end(), 0);
        CHECK_THROWS_AS(score_target(t.subset(rows), kCauses, "vol_y", {}, 0), PreconditionError);
        rows.resize(7);
        std::iota(rows.begin(), rows.end(), 0);
        CHECK_THROWS_AS(score_target(t.subset(rows), kCauses, "vol_y", {}, 0), PreconditionError);
    }

    TEST_CASE("target may not be a cause")
    {
        CHECK_THROWS_AS(score_target(mixed(1.0, 20, 2), kCauses, "x_1", {}, 0), SchemaError);
    }

    TEST_CASE("one record per dataset and target, independent of jobs")
    {
        auto t = Table::concat(mixed(1.0, 60, 3, "A"), mixed(0.0, 60, 4, "B"));
        auto causes = CauseSpec::parse("x_1");
        std::vector<std::string> targets{"x_2", "x_3", "vol_y"};
        ScoreConfig cfg;
        cfg.seed = 5;
        auto serial = score_all(t, causes, targets, cfg);
        REQUIRE(serial.records.size() == 6);
        CHECK(serial.failures.empty());
        CHECK(serial.records[0].dataset == "A");
        CHECK(serial.records[0].target == "x_2");
        CHECK(serial.records[5].dataset == "B");
        CHECK(serial.records[5].target == "vol_y");
        cfg.jobs = 3;
        auto parallel = score_all(t, causes, targets, cfg);
        REQUIRE(parallel.records.size() == 6);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(parallel.records[i].L_ca == serial.records[i].L_ca);
            CHECK(parallel.records[i].L_co == serial.records[i].L_co);
            CHECK(parallel.records[i].diagnostics.seed == serial.records[i].diagnostics.seed);
        }
    }

    TEST_CASE("failures are recorded and the run continues")
    {
        auto a = mixed(1.0, 40, 6, "A");
        // A constant target column in dataset B.
        auto b = mixed(1.0, 40, 7, "B");
        Eigen::MatrixXd f = b.features();
        f.col(3).setConstant(1.0);
        Table bb(b.ids(), b.dataset_labels(), b.ages(), b.sexes(), b.feature_names(), f);
        auto run = score_all(Table::concat(a, bb), kCauses, {"vol_y"}, {});
        CHECK(run.records.size() == 1);
        REQUIRE(run.failures.size() == 1);
        CHECK(run.failures[0].dataset == "B");
        auto agg = aggregate_by_dataset(run);
        REQUIRE(agg.datasets.size() == 1);
        CHECK(agg.warnings.size() == 1);
    }

    TEST_CASE("controls filter applies before scoring")
    {
        auto t = mixed(1.0, 40, 8);
        std::vector<bool> control(40, true);
        for (std::size_t i = 0; i < 10; ++i) {
            control[i] = false;
        }
        Table withdx(t.ids(), t.dataset_labels(), t.ages(), t.sexes(), t.feature_names(), t.features(),
            std::vector<std::string>(40, "CN"), control);
        ScoreConfig cfg;
        cfg.causal_method = Method::closed_form;
        CHECK(score_target(withdx, kCauses, "vol_y", cfg, 1).n == 30);
        cfg.controls_only = false;
        CHECK(score_target(withdx, kCauses, "vol_y", cfg, 1).n == 40);
    }

    TEST_CASE("aggregates")
    {
        ScoreRun one;
        one.records.push_back({"A", "t", 10, 1.0, 4.0, 3.0, {}});
        auto a1 = aggregate_by_dataset(one);
        REQUIRE(a1.datasets.size() == 1);
        CHECK(a1.datasets[0].mean_delta == 3.0);
        CHECK(a1.datasets[0].sd_delta == 0.0);
        CHECK(a1.datasets[0].mean_delta_per_sample == doctest::Approx(0.3));

        ScoreRun two;
        two.records.push_back({"A", "t1", 10, 0.0, 2.0, 2.0, {}});
        two.records.push_back({"A", "t2", 10, 2.0, 0.0, -2.0, {}});
        auto a2 = aggregate_by_dataset(two);
        CHECK(a2.datasets[0].mean_delta == 0.0);
        CHECK(a2.datasets[0].sd_delta == doctest::Approx(std::sqrt(8.0)));
        CHECK(a2.datasets[0].n_targets == 2);
    }

    TEST_CASE("causal and confounded datasets separate in the aggregate")
    {
        auto t = Table::concat(mixed(1.0, 200, 9, "A"), mixed(0.0, 200, 10, "B"));
        auto agg = aggregate_by_dataset(score_all(t, kCauses, {"vol_y"}, {}));
        REQUIRE(agg.datasets.size() == 2);
        CHECK(agg.datasets[0].mean_delta > 0.0);
        CHECK(agg.datasets[1].mean_delta < 0.0);
    }

    TEST_CASE("delta is antisymmetric under model swap")
    {
        for (double a : {-3.25, 0.0, 1e-9, 1234.5}) {
            for (double b : {0.5, -7.0, 1e6}) {
                CHECK(compute_delta(a, b) == -compute_delta(b, a));
            }
        }
    }

    TEST_CASE("row permutation leaves delta unchanged within Monte Carlo error")
    {
        auto t = mixed(0.5, 120, 11);
        std::vector<std::size_t> perm(t.rows());
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        ScoreConfig cfg;
        cfg.causal_method = Method::closed_form;
        auto a = score_target(t, kCauses, "vol_y", cfg, 3);
        auto b = score_target(t.subset(perm), kCauses, "vol_y", cfg, 3);
        CHECK(a.L_ca == doctest::Approx(b.L_ca).epsilon(1e-12));
        double const se = std::hypot(a.diagnostics.confounded_se, b.diagnostics.confounded_se);
        CHECK(std::abs(a.delta - b.delta) < 3.0 * se);
    }

    TEST_CASE("more data gives more support for the causal model")
    {
        ScoreConfig cfg;
        std::vector<int> positives;
        for (std::size_t n : {50, 200, 500}) {
            int count = 0;
            for (std::uint64_t s = 0; s < 20; ++s) {
                count += score_target(mixed(1.0, n, 1000 + s), kCauses, "vol_y", cfg, s).delta > 0.0;
            }
            positives.push_back(count);
        }
        CHECK(positives[0] <= positives[1]);
        CHECK(positives[1] <= positives[2]);
    }

    TEST_CASE("config fingerprint")
    {
        ScoreConfig a;
        auto const fp = a.fingerprint();
        CHECK(fp.size() == 16);
        a.jobs = 4;
        CHECK(a.fingerprint() == fp);
        a.seed = 1;
        CHECK(a.fingerprint() != fp);
    }
}
