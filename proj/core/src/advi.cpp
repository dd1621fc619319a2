#include "biasaudit/advi.hpp"

#include <cmath>
#include <limits>

#include "biasaudit/gaussian.hpp"
#include "biasaudit/seeding.hpp"

namespace biasaudit {

std::string to_string(Family family)
{
    return family == Family::mean_field ? "mean-field" : "full-rank";
}

Family parse_family(std::string const& text)
{
    if (text == "mean-field" || text == "mean_field") {
        return Family::mean_field;
    }
    if (text == "full-rank" || text == "full_rank") {
        return Family::full_rank;
    }
    throw PreconditionError("unknown variational family '" + text + "'");
}

VariationalPosterior::VariationalPosterior(Family family, Eigen::Index d)
    : family_(family), mean_(Eigen::VectorXd::Zero(d))
{
    if (family_ == Family::mean_field) {
        log_sd_ = Eigen::VectorXd::Zero(d);
    } else {
        factor_ = Eigen::MatrixXd::Zero(d, d);
    }
}

Eigen::MatrixXd VariationalPosterior::cholesky() const
{
    if (family_ == Family::mean_field) {
        return log_sd_.array().exp().matrix().asDiagonal();
    }
    Eigen::MatrixXd l = factor_.triangularView<Eigen::StrictlyLower>();
    l.diagonal() = factor_.diagonal().array().exp().matrix();
    return l;
}

Eigen::MatrixXd VariationalPosterior::covariance() const
{
    auto l = cholesky();
    return l * l.transpose();
}

double VariationalPosterior::entropy() const
{
    auto const d = static_cast<double>(dim());
    double const logdiag = family_ == Family::mean_field ? log_sd_.sum() : factor_.diagonal().sum();
    return 0.5 * d * (1.0 + kLog2Pi) + logdiag;
}

Eigen::VectorXd VariationalPosterior::transform(Eigen::VectorXd const& eps) const
{
    if (family_ == Family::mean_field) {
        return mean_ + (log_sd_.array().exp() * eps.array()).matrix();
    }
    return mean_ + cholesky().triangularView<Eigen::Lower>() * eps;
}

double VariationalPosterior::log_density(Eigen::VectorXd const& theta) const
{
    auto const d = static_cast<double>(dim());
    Eigen::VectorXd eps;
    double logdiag = 0.0;
    if (family_ == Family::mean_field) {
        eps = ((theta - mean_).array() * (-log_sd_.array()).exp()).matrix();
        logdiag = log_sd_.sum();
    } else {
        Eigen::MatrixXd l = cholesky();
        eps = l.triangularView<Eigen::Lower>().solve(theta - mean_);
        logdiag = factor_.diagonal().sum();
    }
    return -0.5 * (d * kLog2Pi + eps.squaredNorm()) - logdiag;
}

bool VariationalPosterior::all_finite() const
{
    return mean_.allFinite() && (family_ == Family::mean_field ? log_sd_.allFinite() : factor_.allFinite());
}

Eigen::VectorXd VariationalPosterior::pack() const
{
    auto const d = dim();
    if (family_ == Family::mean_field) {
        Eigen::VectorXd p(2 * d);
        p << mean_, log_sd_;
        return p;
    }
    Eigen::VectorXd p(d + d * (d + 1) / 2);
    p.head(d) = mean_;
    Eigen::Index k = d;
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = j; i < d; ++i) {
            p(k++) = factor_(i, j);
        }
    }
    return p;
}

void VariationalPosterior::unpack(Eigen::VectorXd const& params)
{
    auto const d = dim();
    mean_ = params.head(d);
    if (family_ == Family::mean_field) {
        log_sd_ = params.segment(d, d);
        return;
    }
    Eigen::Index k = d;
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = j; i < d; ++i) {
            factor_(i, j) = params(k++);
        }
    }
}

void FitConfig::validate() const
{
    if (mc_samples_per_step <= 0 || !(learning_rate > 0.0) || max_iterations <= 0 || convergence_window <= 0
        || final_elbo_samples <= 0) {
        throw PreconditionError("fit configuration values must be positive");
    }
    if (!(relative_tolerance > 0.0 && relative_tolerance < 1.0)) {
        throw PreconditionError("relative tolerance must lie in (0, 1)");
    }
}

namespace {

constexpr int kMaxNonFiniteSteps = 50;

struct Adam {
    explicit Adam(Eigen::Index n, double lr) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)), rate(lr) {}

    // Ascent step on params along grad.
    void step(Eigen::VectorXd& params, Eigen::VectorXd const& grad)
    {
        ++t;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
        double const c1 = 1.0 - std::pow(beta1, t);
        double const c2 = 1.0 - std::pow(beta2, t);
        params.array() += rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }

    Eigen::VectorXd m;
    Eigen::VectorXd v;
    double rate;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int t = 0;
};

// Stochastic ELBO gradient in packed coordinates. Returns the mean of log p
// over the draws, or NaN if any draw was non-finite.
double elbo_gradient(VariationalPosterior const& q, LogJoint const& log_joint, Rng& rng, int samples,
    Eigen::VectorXd& grad)
{
    auto const d = q.dim();
    grad.setZero();
    Eigen::VectorXd eps(d);
    Eigen::VectorXd g;
    double sum = 0.0;
    bool const mf = q.family() == Family::mean_field;
    Eigen::MatrixXd const l = mf ? Eigen::MatrixXd() : q.cholesky();
    Eigen::VectorXd const sd = mf ? q.log_sd().array().exp().matrix() : Eigen::VectorXd();

    for (int s = 0; s < samples; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) {
            eps(i) = rng.normal();
        }
        Eigen::VectorXd theta = mf ? Eigen::VectorXd(q.mean() + (sd.array() * eps.array()).matrix())
                                   : Eigen::VectorXd(q.mean() + l.triangularView<Eigen::Lower>() * eps);
        double const value = log_joint(theta, g);
        if (!std::isfinite(value) || !g.allFinite()) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        sum += value;
        grad.head(d) += g;
        if (mf) {
            grad.segment(d, d).array() += g.array() * eps.array() * sd.array();
        } else {
            Eigen::Index k = d;
            for (Eigen::Index j = 0; j < d; ++j) {
                grad(k++) += g(j) * eps(j) * l(j, j);
                for (Eigen::Index i = j + 1; i < d; ++i) {
                    grad(k++) += g(i) * eps(j);
                }
            }
        }
    }
    grad /= static_cast<double>(samples);
    // Entropy gradient: d/d(log diag) of sum(log diag) is one.
    if (mf) {
        grad.segment(d, d).array() += 1.0;
    } else {
        Eigen::Index k = d;
        for (Eigen::Index j = 0; j < d; ++j) {
            grad(k) += 1.0;
            k += d - j;
        }
    }
    return sum / static_cast<double>(samples);
}

} // namespace

FitResult fit(LogJoint const& log_joint, Eigen::Index d, Family family, FitConfig const& config)
{
    config.validate();
    if (d <= 0) {
        throw PreconditionError("fit needs a positive dimension");
    }
    {
        Eigen::VectorXd g;
        double const v0 = log_joint(Eigen::VectorXd::Zero(d), g);
        if (!std::isfinite(v0) || g.size() != d || !g.allFinite()) {
            throw PreconditionError("log joint must be finite with a finite gradient at zero");
        }
    }

    VariationalPosterior q(family, d);
    Eigen::VectorXd params = q.pack();
    Eigen::VectorXd grad(params.size());
    Adam adam(params.size(), config.learning_rate);
    Rng rng(config.seed);

    auto const window = config.convergence_window;
    FitTrace trace;
    trace.elbo_history.reserve(static_cast<std::size_t>(std::min(config.max_iterations, 1 << 20)));
    std::vector<double> raw;
    raw.reserve(trace.elbo_history.capacity());

    Eigen::VectorXd window_sum = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd last_window_avg;
    double rolling = 0.0;
    int nonfinite_run = 0;

    for (int it = 0; it < config.max_iterations; ++it) {
        double const logp = elbo_gradient(q, log_joint, rng, config.mc_samples_per_step, grad);
        double const elbo = logp + q.entropy();
        if (!std::isfinite(elbo)) {
            if (++nonfinite_run >= kMaxNonFiniteSteps) {
                throw FitDivergence("ELBO non-finite for " + std::to_string(kMaxNonFiniteSteps)
                        + " consecutive steps at iteration " + std::to_string(it),
                    trace);
            }
            // Keep the trace aligned with iterations; repeat the last value.
            raw.push_back(raw.empty() ? 0.0 : raw.back());
        } else {
            nonfinite_run = 0;
            adam.step(params, grad);
            q.unpack(params);
            raw.push_back(elbo);
        }
        rolling += raw.back();
        if (static_cast<int>(raw.size()) > window) {
            rolling -= raw[raw.size() - 1 - static_cast<std::size_t>(window)];
        }
        auto const filled = std::min<int>(static_cast<int>(raw.size()), window);
        trace.elbo_history.push_back(rolling / filled);
        trace.iterations_run = it + 1;

        window_sum += params;
        if ((it + 1) % window == 0) {
            last_window_avg = window_sum / static_cast<double>(window);
            window_sum.setZero();
            if (it + 1 >= 2 * window) {
                double const current = trace.elbo_history.back();
                double const previous = trace.elbo_history[static_cast<std::size_t>(it - window)];
                if (std::abs(current - previous) / std::max(std::abs(current), 1.0) < config.relative_tolerance) {
                    trace.converged = true;
                    break;
                }
            }
        }
    }

    if (last_window_avg.size() == params.size()) {
        q.unpack(last_window_avg);
    }
    return FitResult{std::move(q), std::move(trace)};
}

ElboEstimate estimate_elbo(VariationalPosterior const& posterior, LogJoint const& log_joint, int n_samples,
    std::uint64_t seed)
{
    if (n_samples < 100) {
        throw PreconditionError("ELBO estimation needs at least 100 samples");
    }
    Rng rng(seed);
    auto const d = posterior.dim();
    Eigen::VectorXd eps(d);
    Eigen::VectorXd g;
    double const entropy = posterior.entropy();
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    ElboEstimate est;
    for (int s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) {
            eps(i) = rng.normal();
        }
        double const v = log_joint(posterior.transform(eps), g);
        if (!std::isfinite(v)) {
            ++est.samples_rejected;
            continue;
        }
        ++est.samples_used;
        double const delta = v - mean;
        mean += delta / est.samples_used;
        m2 += delta * (v - mean);
    }
    if (est.samples_rejected * 100 > n_samples) {
        throw EstimationError(std::to_string(est.samples_rejected) + " of " + std::to_string(n_samples)
            + " ELBO draws were non-finite");
    }
    est.mean = mean + entropy;
    est.se = est.samples_used > 1 ? std::sqrt(m2 / (est.samples_used - 1) / est.samples_used) : 0.0;
    return est;
}

} // namespace biasaudit
