#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biasaudit/errors.hpp"
#include "biasaudit/seeding.hpp"
#include "biasaudit/synth.hpp"
#include "biasaudit/table.hpp"

using namespace biasaudit;

namespace {

std::string const kThreeRows = "subject_id,dataset,age,sex,diagnosis,vol_a,thick_b\n"
                               "s1,A,40,M,CN,1.5,2.0\n"
                               "s2,A,50,F,CN,1.7,2.1\n"
                               "s3,B,61.5,1,AD,1.1,2.4\n";

Table small_table(std::vector<std::string> datasets, std::vector<double> ages, std::vector<int> sexes)
{
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        ids.push_back("s" + std::to_string(i));
    }
    Eigen::MatrixXd f(static_cast<Eigen::Index>(datasets.size()), 1);
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        f(i, 0) = static_cast<double>(i) * 0.5;
    }
    return Table(ids, datasets, ages, sexes, {"vol_x"}, f);
}

} // namespace

TEST_SUITE("table")
{
    TEST_CASE("well-formed file loads every row")
    {
        auto res = parse_csv(kThreeRows, {});
        CHECK(res.table.rows() == 3);
        CHECK(res.rejected.empty());
        CHECK(res.table.feature_names() == std::vector<std::string>{"vol_a", "thick_b"});
        CHECK(res.table.sexes() == std::vector<int>{1, 0, 1});
        CHECK(res.table.is_control(0));
        CHECK_FALSE(res.table.is_control(2));
    }

    TEST_CASE("NA age rejects one row")
    {
        std::string text = kThreeRows;
        text.replace(text.find("50,F"), 2, "NA");
        auto res = parse_csv(text, {});
        CHECK(res.table.rows() == 2);
        REQUIRE(res.rejected.size() == 1);
        CHECK(res.rejected[0].subject_id == "s2");
        CHECK(res.rejected[0].line == 3);
    }

    TEST_CASE("non-numeric feature and duplicate ids are rejected")
    {
        std::string const text = "subject_id,dataset,age,sex,vol_a\n"
                                 "s1,A,40,M,abc\n"
                                 "s2,A,41,M,1\n"
                                 "s2,A,42,F,1\n"
                                 "s4,A,43,X,1\n";
        auto res = parse_csv(text, {});
        CHECK(res.table.rows() == 1);
        CHECK(res.rejected.size() == 3);
    }

    TEST_CASE("missing column and empty table errors")
    {
        CHECK_THROWS_AS(parse_csv("subject_id,dataset,sex,vol_a\ns1,A,M,1\n", {}), SchemaError);
        CHECK_THROWS_AS(parse_csv("subject_id,dataset,age,sex\ns1,A,40,M\n", {}), SchemaError);
        CHECK_THROWS_AS(parse_csv("subject_id,dataset,age,sex,vol_a\ns1,A,NA,M,1\n", {}), EmptyTableError);
        try {
            parse_csv("subject_id,dataset,sex,vol_a\ns1,A,M,1\n", {});
        } catch (SchemaError const& e) {
            CHECK(std::string(e.what()).find("age") != std::string::npos);
        }
    }

    TEST_CASE("schema config from key values")
    {
        auto kv = parse_key_values("# comment\nage_column = years\nfeature_prefixes = roi_\n");
        auto s = SchemaConfig::from_key_values(kv);
        CHECK(s.age_column == "years");
        CHECK(s.feature_prefixes == std::vector<std::string>{"roi_"});
        CHECK_THROWS_AS(SchemaConfig::from_key_values({{"bogus", "1"}}), SchemaError);
    }

    TEST_CASE("csv round trip")
    {
        auto a = parse_csv(kThreeRows, {}).table;
        auto b = parse_csv(to_csv(a), {}).table;
        CHECK(b.ids() == a.ids());
        CHECK(b.ages() == a.ages());
        CHECK(b.features() == a.features());
        CHECK(to_csv(b) == to_csv(a));
    }

    TEST_CASE("summary of a single subject")
    {
        auto t = small_table({"A"}, {40.0}, {1});
        auto s = summarize(t);
        REQUIRE(s.size() == 1);
        CHECK(s[0].n == 1);
        CHECK(s[0].age_mean == 40.0);
        CHECK(s[0].age_sd == 0.0);
        CHECK(s[0].male_percent == 100.0);
    }

    TEST_CASE("summary partitions rows by dataset")
    {
        auto t = small_table({"A", "B", "A", "B"}, {20, 30, 40, 50}, {1, 0, 0, 0});
        auto s = summarize(t);
        REQUIRE(s.size() == 2);
        CHECK(s[0].n + s[1].n == 4);
        CHECK(s[0].age_mean == doctest::Approx(30.0));
        CHECK(s[0].male_percent == doctest::Approx(50.0));
    }

    TEST_CASE("summary recovers generator moments within 3 SE")
    {
        // gen_multidataset draws age ~ U(20, 80) and sex ~ Bernoulli(0.5).
        MultiDatasetSpec spec;
        spec.shifts = {0.0, 0.0};
        spec.n_per_dataset = 400;
        spec.diseased_fraction = 0.25;
        spec.seed = 11;
        auto t = gen_multidataset(spec);
        double const age_sd = 60.0 / std::sqrt(12.0);
        for (auto const& row : summarize(t)) {
            auto const n = static_cast<double>(row.n);
            CHECK(std::abs(row.age_mean - 50.0) < 3.0 * age_sd / std::sqrt(n));
            CHECK(std::abs(row.male_percent - 50.0) < 3.0 * 50.0 / std::sqrt(n));
            // SE of a sample SD is about sd / sqrt(2 (n - 1)).
            CHECK(std::abs(row.age_sd - age_sd) < 3.0 * age_sd / std::sqrt(2.0 * (n - 1.0)) * 1.3);
            double const p = static_cast<double>(row.n_diseased) / n;
            CHECK(std::abs(p - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / n));
        }
    }

    TEST_CASE("standardize [1, 2, 3]")
    {
        auto s = standardize_column(Eigen::VectorXd{{1.0, 2.0, 3.0}});
        CHECK(s.values(0) == doctest::Approx(-1.2247449).epsilon(1e-7));
        CHECK(std::abs(s.values(1)) < 1e-15);
        CHECK(s.values(2) == doctest::Approx(1.2247449).epsilon(1e-7));
        CHECK(s.mean == doctest::Approx(2.0));
        CHECK(s.sd == doctest::Approx(0.8164966).epsilon(1e-7));
    }

    TEST_CASE("standardize is idempotent and round-trips")
    {
        Rng rng(4);
        Eigen::VectorXd v(200);
        for (auto& x : v) {
            x = 30.0 + 7.0 * rng.normal();
        }
        auto once = standardize_column(v);
        auto twice = standardize_column(once.values);
        CHECK((twice.values - once.values).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::VectorXd back = destandardize(once.values, once.mean, once.sd);
        CHECK(((back - v).array() / v.array()).abs().maxCoeff() < 1e-9);
    }

    TEST_CASE("standardize errors")
    {
        CHECK_THROWS_AS(standardize_column(Eigen::VectorXd{{5.0, 5.0, 5.0}}), DegenerateColumnError);
        CHECK_THROWS_AS(standardize_column(Eigen::VectorXd{{5.0}}), PreconditionError);
    }

    TEST_CASE("cause spec parsing")
    {
        auto spec = CauseSpec::parse("age, age^2 ,sex");
        REQUIRE(spec.terms.size() == 3);
        CHECK(spec.terms[1].transform == Transform::square);
        CHECK(spec.to_string() == "age,age^2,sex");
        CHECK(spec.source_columns() == std::vector<std::string>{"age", "sex"});
        CHECK_THROWS(CauseSpec::parse("age,age"));
        CHECK_THROWS(CauseSpec::parse(""));
    }

    TEST_CASE("square is applied to raw values before standardizing")
    {
        auto t = small_table({"A", "A", "A"}, {20, 30, 40}, {1, 0, 1});
        auto d = build_design(t, CauseSpec::parse("age^2", false));
        CHECK(d.values.col(0) == Eigen::Vector3d(400, 900, 1600));
        auto s = build_design(t, CauseSpec::parse("age^2"));
        auto expect = standardize_column(Eigen::VectorXd{{400.0, 900.0, 1600.0}});
        CHECK((s.values.col(0) - expect.values).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(s.scales[0].mean == doctest::Approx(2900.0 / 3.0));
    }

    TEST_CASE("all-male sex column is degenerate")
    {
        auto t = small_table({"A", "A", "A", "A"}, {20, 30, 40, 50}, {1, 1, 1, 1});
        CHECK_THROWS_AS(build_design(t, CauseSpec::parse("age,sex")), DegenerateColumnError);
    }

    TEST_CASE("design moments on 100 synthetic rows")
    {
        MultiDatasetSpec spec;
        spec.shifts = {0.0, 0.0};
        spec.n_per_dataset = 50;
        spec.seed = 5;
        auto d = build_design(gen_multidataset(spec), CauseSpec::parse("age,age^2,sex"));
        CHECK(d.n() == 100);
        CHECK(d.m() == 3);
        for (Eigen::Index j = 0; j < 3; ++j) {
            Eigen::VectorXd c = d.values.col(j);
            CHECK(std::abs(c.mean()) < 1e-9);
            CHECK(std::abs(std::sqrt((c.array() - c.mean()).square().mean()) - 1.0) < 1e-9);
        }
    }

    TEST_CASE("design is row-order equivariant")
    {
        MultiDatasetSpec spec;
        spec.shifts = {0.0, 0.0};
        spec.n_per_dataset = 25;
        spec.seed = 9;
        auto t = gen_multidataset(spec);
        std::vector<std::size_t> perm(t.rows());
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        auto a = build_design(t, CauseSpec::parse("age,age^2,sex"));
        auto b = build_design(t.subset(perm), CauseSpec::parse("age,age^2,sex"));
        for (std::size_t i = 0; i < perm.size(); ++i) {
            auto const r = static_cast<Eigen::Index>(i);
            auto const p = static_cast<Eigen::Index>(perm[i]);
            CHECK((b.values.row(r) - a.values.row(p)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    TEST_CASE("too few rows for the design")
    {
        auto t = small_table({"A", "A", "A", "A"}, {20, 30, 40, 50}, {1, 0, 1, 0});
        CHECK_THROWS_AS(build_design(t, CauseSpec::parse("age,age^2,sex")), PreconditionError);
    }

    TEST_CASE("stratified split 2 x 10 at 0.7")
    {
        std::vector<std::string> labels;
        std::vector<double> ages;
        std::vector<int> sexes;
        for (int i = 0; i < 20; ++i) {
            labels.push_back(i % 2 == 0 ? "A" : "B");
            ages.push_back(20.0 + i);
            sexes.push_back(i % 3 == 0);
        }
        auto t = small_table(labels, ages, sexes);
        auto [train, test] = stratified_split(t, 0.7, 42);
        CHECK(train.only_dataset("A").rows() == 7);
        CHECK(train.only_dataset("B").rows() == 7);
        CHECK(test.rows() == 6);

        auto [tr2, te2] = stratified_split_indices(t, 0.7, 42);
        auto [tr3, te3] = stratified_split_indices(t, 0.7, 42);
        CHECK(tr2 == tr3);
        CHECK(te2 == te3);
        std::vector<std::size_t> all = tr2;
        all.insert(all.end(), te2.begin(), te2.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expect(20);
        std::iota(expect.begin(), expect.end(), 0);
        CHECK(all == expect);

        auto [tr4, te4] = stratified_split_indices(t, 0.7, 43);
        CHECK(tr4 != tr2);
    }

    TEST_CASE("tiny fraction keeps one training row per dataset")
    {
        auto t = gen_multidataset(std::vector<double>(15, 0.0), {}, 800, 3);
        auto [train, test] = stratified_split(t, 0.001, 1);
        for (auto const& label : t.distinct_datasets()) {
            // round(0.8) = 1 here, and never less than one.
            CHECK(train.only_dataset(label).rows() == 1);
            CHECK(test.only_dataset(label).rows() == 799);
        }
    }

    TEST_CASE("split errors")
    {
        auto t = small_table({"A", "A", "B"}, {20, 30, 40}, {1, 0, 1});
        CHECK_THROWS_AS(stratified_split(t, 0.5, 0), SplitError);
        auto u = small_table({"A", "A", "B", "B"}, {20, 30, 40, 50}, {1, 0, 1, 0});
        CHECK_THROWS_AS(stratified_split(u, 0.0, 0), SplitError);
        CHECK_THROWS_AS(stratified_split(u, 1.0, 0), SplitError);
        // 0.9 of 2 rounds to 2, leaving nothing to test on.
        CHECK_THROWS_AS(stratified_split(u, 0.9, 0), SplitError);
    }
}
