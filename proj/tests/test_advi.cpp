#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "biasaudit/advi.hpp"
#include "biasaudit/gaussian.hpp"
#include "biasaudit/seeding.hpp"
#include "oracles.hpp"

using namespace biasaudit;

namespace {

// log N(theta; mu, sigma) with gradient.
LogJoint gaussian_target(Eigen::VectorXd mu, Eigen::MatrixXd sigma)
{
    Eigen::MatrixXd prec = sigma.inverse();
    double const c = -0.5 * (static_cast<double>(mu.size()) * std::log(2.0 * M_PI) + oracle::eigen_logdet(sigma));
    return [=](Eigen::VectorXd const& t, Eigen::VectorXd& g) {
        Eigen::VectorXd const r = t - mu;
        g = -prec * r;
        return c - 0.5 * r.dot(prec * r);
    };
}

// log N(theta; 0, 1) + log N(0; theta, 1); evidence log N(0; 0, 2).
double conjugate(Eigen::VectorXd const& t, Eigen::VectorXd& g)
{
    g = -2.0 * t;
    return log_normal(t(0), 0.0, 1.0) + log_normal(0.0, t(0), 1.0);
}

} // namespace

TEST_SUITE("advi")
{
    TEST_CASE("recovers a shifted normal")
    {
        auto target = gaussian_target(Eigen::VectorXd::Constant(1, 3.0), Eigen::MatrixXd::Identity(1, 1));
        for (auto fam : {Family::mean_field, Family::full_rank}) {
            FitConfig cfg;
            cfg.seed = 1;
            auto r = fit(target, 1, fam, cfg);
            CHECK(std::abs(r.posterior.mean()(0) - 3.0) < 0.05);
            CHECK(std::abs(std::sqrt(r.posterior.covariance()(0, 0)) - 1.0) < 0.05);
            CHECK(r.trace.elbo_history.size() == static_cast<std::size_t>(r.trace.iterations_run));
        }
    }

    TEST_CASE("conjugate evidence")
    {
        FitConfig cfg;
        cfg.seed = 2;
        auto r = fit(conjugate, 1, Family::full_rank, cfg);
        CHECK(std::abs(r.posterior.mean()(0)) < 0.05);
        CHECK(std::abs(r.posterior.covariance()(0, 0) - 0.5) < 0.05);
        auto e = estimate_elbo(r.posterior, conjugate, cfg.final_elbo_samples, 9);
        CHECK(std::abs(e.mean - (-1.2655121)) < 0.05);
        CHECK(std::abs(-e.mean - 1.2655) < 0.1);
    }

    TEST_CASE("mean-field pays for correlation")
    {
        double const rho = 0.9;
        Eigen::MatrixXd s{{1.0, rho}, {rho, 1.0}};
        auto target = gaussian_target(Eigen::VectorXd::Zero(2), s);
        FitConfig cfg;
        cfg.seed = 3;
        cfg.final_elbo_samples = 20000;
        auto mf = fit(target, 2, Family::mean_field, cfg);
        auto fr = fit(target, 2, Family::full_rank, cfg);
        auto emf = estimate_elbo(mf.posterior, target, cfg.final_elbo_samples, 4);
        auto efr = estimate_elbo(fr.posterior, target, cfg.final_elbo_samples, 4);
        CHECK(emf.mean < efr.mean);
        CHECK(std::abs((emf.mean - efr.mean) - 0.5 * std::log(1.0 - rho * rho)) < 0.1);
    }

    TEST_CASE("full-rank fit of a Gaussian target has small KL")
    {
        Eigen::MatrixXd s = oracle::random_spd(3, 5);
        Eigen::VectorXd mu{{1.0, -0.5, 2.0}};
        FitConfig cfg;
        cfg.seed = 6;
        auto r = fit(gaussian_target(mu, s), 3, Family::full_rank, cfg);
        CHECK(oracle::gaussian_kl(r.posterior.mean(), r.posterior.covariance(), mu, s) < 1e-2);
    }

    TEST_CASE("matched q has zero ELBO")
    {
        Eigen::MatrixXd s{{2.0, 0.3}, {0.3, 0.5}};
        Eigen::VectorXd mu{{0.2, -1.0}};
        VariationalPosterior q(Family::full_rank, 2);
        q.mean() = mu;
        Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(s).matrixL();
        q.factor_params() = l;
        q.factor_params().diagonal() = l.diagonal().array().log();
        auto e = estimate_elbo(q, gaussian_target(mu, s), 4000, 7);
        CHECK(std::abs(e.mean) <= 3.0 * e.se + 1e-12);
    }

    TEST_CASE("standard error scales with sqrt(n)")
    {
        VariationalPosterior q(Family::mean_field, 2);
        auto target = gaussian_target(Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Identity(2, 2));
        double ratio = 0.0;
        for (std::uint64_t s = 0; s < 10; ++s) {
            ratio += estimate_elbo(q, target, 2000, 10 + s).se / estimate_elbo(q, target, 4000, 100 + s).se;
        }
        CHECK(std::abs(ratio / 10.0 - std::sqrt(2.0)) < 0.05);
    }

    TEST_CASE("closed-form entropy matches Monte Carlo")
    {
        VariationalPosterior q(Family::full_rank, 3);
        q.mean() = Eigen::Vector3d(1, 2, 3);
        q.factor_params() << 0.1, 0, 0, 0.5, -0.3, 0, -0.2, 0.4, 0.2;
        Rng rng(11);
        int const n = 20000;
        double mean = 0.0;
        double m2 = 0.0;
        Eigen::VectorXd eps(3);
        for (int i = 0; i < n; ++i) {
            for (auto& e : eps) {
                e = rng.normal();
            }
            double const v = -q.log_density(q.transform(eps));
            double const d = v - mean;
            mean += d / (i + 1);
            m2 += d * (v - mean);
        }
        double const se = std::sqrt(m2 / (n - 1) / n);
        CHECK(std::abs(mean - q.entropy()) < 3.0 * se);
    }

    TEST_CASE("fit is bit-reproducible")
    {
        Eigen::MatrixXd s = oracle::random_spd(4, 12);
        auto target = gaussian_target(Eigen::VectorXd::Zero(4), s);
        FitConfig cfg;
        cfg.seed = 99;
        cfg.max_iterations = 1500;
        for (auto fam : {Family::mean_field, Family::full_rank}) {
            auto a = fit(target, 4, fam, cfg);
            auto b = fit(target, 4, fam, cfg);
            CHECK(a.posterior.pack() == b.posterior.pack());
            CHECK(a.trace.elbo_history == b.trace.elbo_history);
        }
        auto const first = fit(target, 4, Family::full_rank, cfg).posterior.pack();
        cfg.seed = 100;
        CHECK(fit(target, 4, Family::full_rank, cfg).posterior.pack() != first);
    }

    TEST_CASE("pack and unpack round trip")
    {
        VariationalPosterior q(Family::full_rank, 3);
        Eigen::VectorXd p = oracle::random_vector(3 + 6, 13);
        q.unpack(p);
        CHECK(q.pack() == p);
        CHECK((q.covariance() - q.covariance().transpose()).norm() == 0.0);
    }

    TEST_CASE("iteration budget exhaustion is reported, not thrown")
    {
        FitConfig cfg;
        cfg.max_iterations = 100;
        auto r = fit(conjugate, 1, Family::mean_field, cfg);
        CHECK_FALSE(r.trace.converged);
        CHECK(r.trace.iterations_run == 100);
    }

    TEST_CASE("errors")
    {
        LogJoint nan_away = [](Eigen::VectorXd const& t, Eigen::VectorXd& g) {
            g = Eigen::VectorXd::Zero(t.size());
            return t.norm() == 0.0 ? 0.0 : NAN;
        };
        CHECK_THROWS_AS(fit(nan_away, 2, Family::mean_field, FitConfig{}), FitDivergence);
        try {
            fit(nan_away, 2, Family::mean_field, FitConfig{});
        } catch (FitDivergence const& e) {
            CHECK(e.trace().elbo_history.size() == 49);
        }

        LogJoint bad_zero = [](Eigen::VectorXd const& t, Eigen::VectorXd& g) {
            g = Eigen::VectorXd::Zero(t.size());
            return -INFINITY;
        };
        CHECK_THROWS_AS(fit(bad_zero, 1, Family::full_rank, FitConfig{}), PreconditionError);

        FitConfig cfg;
        cfg.relative_tolerance = 1.0;
        CHECK_THROWS_AS(fit(conjugate, 1, Family::full_rank, cfg), PreconditionError);

        VariationalPosterior q(Family::mean_field, 1);
        CHECK_THROWS_AS(estimate_elbo(q, conjugate, 99, 0), PreconditionError);
        LogJoint half_bad = [](Eigen::VectorXd const& t, Eigen::VectorXd& g) {
            g = Eigen::VectorXd::Zero(t.size());
            return t(0) > 2.0 ? NAN : 0.0;
        };
        CHECK_THROWS_AS(estimate_elbo(q, half_bad, 2000, 0), EstimationError);
    }

    TEST_CASE("family names")
    {
        CHECK(parse_family("mean-field") == Family::mean_field);
        CHECK(parse_family("full_rank") == Family::full_rank);
        CHECK(to_string(Family::full_rank) == "full-rank");
        CHECK_THROWS(parse_family("diag"));
    }
}
