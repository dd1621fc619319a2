#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "biasaudit/errors.hpp"

namespace biasaudit {

// Unnormalized log density over R^d. Writes the gradient into grad (resized
// by the callee) and returns the value.
using LogJoint = std::function<double(Eigen::VectorXd const& theta, Eigen::VectorXd& grad)>;

enum class Family { mean_field, full_rank };

std::string to_string(Family family);
Family parse_family(std::string const& text);

// Gaussian q(theta) = N(mean, L L^T).
//
// Mean-field keeps a per-coordinate log-SD vector. Full-rank keeps a lower
// triangular matrix whose diagonal holds the log of L's diagonal, so both
// parameterizations are unconstrained.
class VariationalPosterior {
public:
    VariationalPosterior() = default;
    // Standard normal of dimension d.
    VariationalPosterior(Family family, Eigen::Index d);

    [[nodiscard]] Family family() const { return family_; }
    [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

    [[nodiscard]] Eigen::VectorXd const& mean() const { return mean_; }
    Eigen::VectorXd& mean() { return mean_; }
    // Mean-field only.
    [[nodiscard]] Eigen::VectorXd const& log_sd() const { return log_sd_; }
    Eigen::VectorXd& log_sd() { return log_sd_; }
    // Full-rank only: strict lower part is L, diagonal is log(diag L).
    [[nodiscard]] Eigen::MatrixXd const& factor_params() const { return factor_; }
    Eigen::MatrixXd& factor_params() { return factor_; }

    [[nodiscard]] Eigen::MatrixXd cholesky() const;
    [[nodiscard]] Eigen::MatrixXd covariance() const;
    [[nodiscard]] double entropy() const;
    // theta = mean + L eps
    [[nodiscard]] Eigen::VectorXd transform(Eigen::VectorXd const& eps) const;
    [[nodiscard]] double log_density(Eigen::VectorXd const& theta) const;
    [[nodiscard]] bool all_finite() const;

    // Flat parameter vector (mean, then scale parameters) and its inverse.
    [[nodiscard]] Eigen::VectorXd pack() const;
    void unpack(Eigen::VectorXd const& params);

private:
    Family family_ = Family::mean_field;
    Eigen::VectorXd mean_;
    Eigen::VectorXd log_sd_;
    Eigen::MatrixXd factor_;
};

struct FitConfig {
    int mc_samples_per_step = 8;
    double learning_rate = 0.01;
    int max_iterations = 20000;
    int convergence_window = 200;
    double relative_tolerance = 1e-4;
    int final_elbo_samples = 2000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitTrace {
    // Per iteration: mean of the raw step ELBO estimates over the trailing
    // convergence window.
    std::vector<double> elbo_history;
    bool converged = false;
    int iterations_run = 0;
};

struct FitResult {
    VariationalPosterior posterior;
    FitTrace trace;
};

// Raised when the ELBO stays non-finite for 50 consecutive steps.
class FitDivergence : public DivergenceError {
public:
    FitDivergence(std::string const& what, FitTrace trace) : DivergenceError(what), trace_(std::move(trace)) {}
    [[nodiscard]] FitTrace const& trace() const { return trace_; }

private:
    FitTrace trace_;
};

// Maximizes ELBO(q) = E_q[log p(theta)] + H(q) with reparameterized
// gradients (theta = mu + L eps) and Adam (beta1 0.9, beta2 0.999).
//
// Convergence is checked at the end of every window once two windows have
// run: |mean(last) - mean(previous)| / max(|mean(last)|, 1) < tolerance.
// The returned posterior is the parameter average over the last complete
// window. Bit-reproducible for a fixed config.seed.
FitResult fit(LogJoint const& log_joint, Eigen::Index d, Family family, FitConfig const& config);

struct ElboEstimate {
    double mean = 0.0;
    double se = 0.0;
    int samples_used = 0;
    int samples_rejected = 0;
};

// Monte-Carlo mean and standard error of log p(theta) + H(q) over fresh draws
// from q. Non-finite draws are dropped; more than 1% dropped throws
// EstimationError.
ElboEstimate estimate_elbo(VariationalPosterior const& posterior, LogJoint const& log_joint, int n_samples,
    std::uint64_t seed);

} // namespace biasaudit
