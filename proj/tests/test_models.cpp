#include <doctest.h>

#include <cmath>

#include "biasaudit/errors.hpp"
#include "biasaudit/gaussian.hpp"
#include "biasaudit/models.hpp"
#include "oracles.hpp"

using namespace biasaudit;

namespace {

double rel_error(Eigen::VectorXd const& a, Eigen::VectorXd const& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-12);
}

Eigen::MatrixXd standardized(Eigen::MatrixXd x)
{
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        x.col(j).array() -= x.col(j).mean();
        x.col(j) /= std::sqrt(x.col(j).squaredNorm() / static_cast<double>(x.rows()));
    }
    return x;
}

} // namespace

TEST_SUITE("models")
{
    TEST_CASE("causal log joint at the zero point")
    {
        CausalModelSpec spec{1.0, 2.0, 0.5};
        Eigen::MatrixXd x = oracle::random_matrix(7, 3, 1);
        auto r = causal_log_joint(Eigen::VectorXd::Zero(3), x, Eigen::VectorXd::Zero(7), spec);
        CHECK(r.value == doctest::Approx(3 * log_normal(0, 0, 2.0) + 7 * log_normal(0, 0, 0.5)).epsilon(1e-14));
        CHECK(r.grad_w.norm() == 0.0);
    }

    TEST_CASE("causal gradient matches finite differences")
    {
        CausalModelSpec const spec;
        Eigen::MatrixXd x = standardized(oracle::random_matrix(30, 3, 2));
        Eigen::VectorXd y = oracle::random_vector(30, 3);
        auto f = [&](Eigen::VectorXd const& w) { return causal_log_joint(w, x, y, spec).value; };
        for (std::uint64_t p = 0; p < 10; ++p) {
            Eigen::VectorXd w = oracle::random_vector(3, 50 + p);
            CHECK(rel_error(causal_log_joint(w, x, y, spec).grad_w, oracle::central_gradient(f, w, 1e-4)) < 1e-6);
        }
    }

    TEST_CASE("causal target agrees with causal_log_joint")
    {
        CausalModelSpec const spec{1.0, 0.7, 1.3};
        Eigen::MatrixXd x = oracle::random_matrix(20, 2, 4);
        Eigen::VectorXd y = oracle::random_vector(20, 5);
        auto target = causal_target(x, y, spec);
        Eigen::VectorXd w = oracle::random_vector(2, 6);
        Eigen::VectorXd g;
        double const v = target(w, g);
        auto ref = causal_log_joint(w, x, y, spec);
        CHECK(v == doctest::Approx(ref.value).epsilon(1e-12));
        CHECK((g - ref.grad_w).norm() < 1e-10);
    }

    TEST_CASE("flat likelihood leaves the prior gradient")
    {
        CausalModelSpec const spec{1.0, 2.0, 1e8};
        Eigen::MatrixXd x = oracle::random_matrix(10, 2, 7);
        Eigen::VectorXd y = oracle::random_vector(10, 8);
        Eigen::VectorXd w{{0.3, -1.2}};
        auto r = causal_log_joint(w, x, y, spec);
        CHECK((r.grad_w - (-w / 4.0)).norm() < 1e-12);
    }

    TEST_CASE("causal evidence closed form reference values")
    {
        CausalModelSpec const spec;
        CHECK(causal_evidence_closed_form(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), spec)
            == doctest::Approx(-0.9189385).epsilon(1e-7));
        CHECK(causal_evidence_closed_form(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), spec)
            == doctest::Approx(-1.2655121).epsilon(1e-7));
    }

    TEST_CASE("causal evidence matches quadrature at n = 2")
    {
        for (std::uint64_t s = 0; s < 5; ++s) {
            CausalModelSpec const spec{1.0, 0.8 + 0.2 * static_cast<double>(s), 1.0};
            Eigen::VectorXd x = oracle::random_vector(2, 300 + s);
            Eigen::VectorXd y = oracle::random_vector(2, 400 + s);
            double const closed = causal_evidence_closed_form(x, y, spec);
            CHECK(std::abs(closed - oracle::causal_evidence_by_quadrature(x, y, spec)) < 1e-6);
        }
    }

    TEST_CASE("causal evidence is invariant to row permutation")
    {
        CausalModelSpec const spec;
        Eigen::MatrixXd x = oracle::random_matrix(12, 3, 9);
        Eigen::VectorXd y = oracle::random_vector(12, 10);
        Eigen::MatrixXd xr = x.colwise().reverse();
        Eigen::VectorXd yr = y.reverse();
        CHECK(causal_evidence_closed_form(xr, yr, spec) == doctest::Approx(causal_evidence_closed_form(x, y, spec)).epsilon(1e-12));
    }

    TEST_CASE("code length of X")
    {
        CHECK(code_length_X(Eigen::MatrixXd::Zero(2, 2), 1.0) == doctest::Approx(3.6757541).epsilon(1e-7));
        Eigen::MatrixXd x = oracle::random_matrix(5, 2, 11);
        Eigen::MatrixXd xx(10, 2);
        xx << x, x;
        CHECK(code_length_X(xx, 1.3) == doctest::Approx(2.0 * code_length_X(x, 1.3)).epsilon(1e-13));

        Eigen::MatrixXd s = standardized(oracle::random_matrix(400, 3, 12));
        double const expect = 400.0 * 3.0 * (0.5 * std::log(2.0 * M_PI) + 0.5);
        CHECK(std::abs(code_length_X(s, 1.0) - expect) < 0.05 * expect);
    }

    TEST_CASE("confounded log joint at the zero point")
    {
        ConfoundedModelSpec const spec{1, 1.0, 0.5, 2.0};
        JointVector v{Eigen::MatrixXd::Zero(6, 3)};
        ConfoundedLatents lat{Eigen::MatrixXd::Zero(6, 1), Eigen::MatrixXd::Zero(1, 3)};
        double const expect = 6 * log_normal(0, 0, 1.0) + 3 * log_normal(0, 0, 0.5) + 18 * log_normal(0, 0, 2.0);
        CHECK(confounded_log_joint(lat, v, spec).value == doctest::Approx(expect).epsilon(1e-14));
    }

    TEST_CASE("confounded gradient matches finite differences")
    {
        for (int k : {1, 2}) {
            ConfoundedModelSpec const spec{k, 1.0, 1.0, 1.0};
            JointVector v{standardized(oracle::random_matrix(15, 4, 13))};
            Eigen::Index const nz = 15 * k;
            Eigen::Index const nw = k * 4;
            auto unpack = [&](Eigen::VectorXd const& t) {
                ConfoundedLatents lat;
                lat.z = Eigen::Map<Eigen::MatrixXd const>(t.data(), 15, k);
                lat.w = Eigen::Map<Eigen::MatrixXd const>(t.data() + nz, k, 4);
                return lat;
            };
            auto f = [&](Eigen::VectorXd const& t) { return confounded_log_joint(unpack(t), v, spec).value; };
            for (std::uint64_t p = 0; p < 10; ++p) {
                Eigen::VectorXd t = oracle::random_vector(nz + nw, 70 + p);
                auto r = confounded_log_joint(unpack(t), v, spec);
                Eigen::VectorXd g(nz + nw);
                g << r.grad_z.reshaped(), r.grad_w.reshaped();
                CHECK(rel_error(g, oracle::central_gradient(f, t, 1e-4)) < 1e-5);

                Eigen::VectorXd tg;
                double const tv = confounded_target(v, spec)(t, tg);
                CHECK(tv == doctest::Approx(r.value).epsilon(1e-12));
                CHECK((tg - g).norm() < 1e-10);
            }
        }
    }

    TEST_CASE("confounded log joint symmetries")
    {
        ConfoundedModelSpec const spec{2, 1.0, 1.0, 1.0};
        JointVector v{oracle::random_matrix(9, 3, 14)};
        ConfoundedLatents lat{oracle::random_matrix(9, 2, 15), oracle::random_matrix(2, 3, 16)};
        double const base = confounded_log_joint(lat, v, spec).value;
        ConfoundedLatents flip{-lat.z, -lat.w};
        CHECK(confounded_log_joint(flip, v, spec).value == doctest::Approx(base).epsilon(1e-13));
        double const a = 0.7;
        Eigen::Matrix2d q;
        q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        ConfoundedLatents rot{lat.z * q, q.transpose() * lat.w};
        CHECK(confounded_log_joint(rot, v, spec).value == doctest::Approx(base).epsilon(1e-12));
    }

    TEST_CASE("fixed-W evidence")
    {
        ConfoundedModelSpec const spec{1, 1.0, 1.0, 0.8};
        JointVector v{oracle::random_matrix(6, 2, 17)};
        double indep = 0.0;
        for (double e : v.values.reshaped()) {
            indep += log_normal(e, 0.0, 0.8);
        }
        CHECK(ppca_evidence_fixed_W(v, Eigen::MatrixXd::Zero(1, 2), spec) == doctest::Approx(indep).epsilon(1e-12));

        Eigen::MatrixXd w{{0.9, -1.4}};
        double oracle_sum = 0.0;
        for (Eigen::Index i = 0; i < 6; ++i) {
            oracle_sum += oracle::ppca_row_evidence_by_quadrature(v.values.row(i).transpose(), w, spec);
        }
        CHECK(std::abs(ppca_evidence_fixed_W(v, w, spec) - oracle_sum) < 1e-6);

        JointVector dup{Eigen::MatrixXd(7, 2)};
        dup.values << v.values, v.values.row(2);
        JointVector row{v.values.row(2)};
        CHECK(ppca_evidence_fixed_W(dup, w, spec)
            == doctest::Approx(ppca_evidence_fixed_W(v, w, spec) + ppca_evidence_fixed_W(row, w, spec)).epsilon(1e-13));
    }

    TEST_CASE("causal code length preconditions and bound")
    {
        CausalModelSpec const spec;
        CHECK_THROWS_AS(L_causal(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), spec, Method::closed_form), PreconditionError);

        Eigen::MatrixXd x = standardized(oracle::random_matrix(50, 3, 18));
        Eigen::VectorXd y = x * Eigen::Vector3d(0.5, -0.3, 0.2) + 0.7 * oracle::random_vector(50, 19);
        auto closed = L_causal(x, y, spec, Method::closed_form);
        VariationalOptions opts;
        opts.fit.seed = 3;
        auto full = L_causal(x, y, spec, Method::advi, opts);
        CHECK(std::abs(full.nats - closed.nats) < 0.5);
        CHECK(closed.nats <= full.nats + 3.0 * full.se);
        opts.family = Family::mean_field;
        auto mf = L_causal(x, y, spec, Method::advi, opts);
        CHECK(closed.nats <= mf.nats + 3.0 * mf.se);
    }

    TEST_CASE("confounded code length bound against quadrature")
    {
        ConfoundedModelSpec const spec;
        JointVector v{standardized(oracle::random_matrix(10, 2, 20))};
        v.values.col(1) = standardized(v.values.col(0) + 0.5 * oracle::random_vector(10, 21));
        VariationalOptions opts{FitConfig{}, Family::mean_field, false};
        opts.fit.seed = 5;
        auto l = L_confounded(v, spec, opts);
        double const truth = -oracle::confounded_evidence_by_quadrature(v, spec);
        CHECK(l.nats >= truth - 3.0 * l.se);
        CHECK(l.nats - truth < 5.0);
    }

    TEST_CASE("duplicated data costs more")
    {
        ConfoundedModelSpec const spec;
        JointVector v{standardized(oracle::random_matrix(10, 2, 22))};
        JointVector vv{Eigen::MatrixXd(20, 2)};
        vv.values << v.values, v.values;
        VariationalOptions opts{FitConfig{}, Family::mean_field, false};
        CHECK(L_confounded(vv, spec, opts).nats > L_confounded(v, spec, opts).nats);
    }

    TEST_CASE("confounded preconditions")
    {
        JointVector v{oracle::random_matrix(10, 2, 23)};
        CHECK_THROWS_AS(L_confounded(v, ConfoundedModelSpec{0, 1.0, 1.0, 1.0}), PreconditionError);
        CHECK_THROWS_AS(L_confounded(JointVector{oracle::random_matrix(2, 2, 24)}, ConfoundedModelSpec{}),
            PreconditionError);
        CHECK_THROWS_AS(ppca_evidence_fixed_W(v, Eigen::MatrixXd::Zero(1, 3), ConfoundedModelSpec{}), DimensionError);
    }

    TEST_CASE("method names")
    {
        CHECK(parse_method("closed-form") == Method::closed_form);
        CHECK(to_string(parse_method("advi")) == "advi");
        CHECK_THROWS(parse_method("exact"));
    }
}
