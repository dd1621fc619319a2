#include "biasaudit/gaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "biasaudit/errors.hpp"

namespace biasaudit {

SpdMatrix::SpdMatrix(Eigen::MatrixXd values) : values_(std::move(values))
{
    if (values_.rows() != values_.cols() || values_.rows() == 0) {
        throw DimensionError("SPD matrix must be square and nonempty");
    }
    if (!values_.allFinite()) {
        throw FactorizationError("matrix has non-finite entries");
    }
    double const scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
    if ((values_ - values_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw FactorizationError("matrix is not symmetric");
    }
    llt_.compute(values_);
    if (llt_.info() != Eigen::Success) {
        jitter_ = 1e-8 * values_.diagonal().mean();
        if (!(jitter_ > 0.0)) {
            throw FactorizationError("matrix is not positive definite");
        }
        Eigen::MatrixXd bumped = values_;
        bumped.diagonal().array() += jitter_;
        llt_.compute(bumped);
        if (llt_.info() != Eigen::Success) {
            throw FactorizationError("matrix is not positive definite after jitter");
        }
    }
}

double SpdMatrix::logdet() const
{
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd SpdMatrix::solve(Eigen::VectorXd const& b) const
{
    return llt_.solve(b);
}

double SpdMatrix::inv_quad(Eigen::VectorXd const& r) const
{
    Eigen::VectorXd half = llt_.matrixL().solve(r);
    return half.squaredNorm();
}

double chol_logdet(SpdMatrix const& cov)
{
    return cov.logdet();
}

double mvn_logpdf(Eigen::VectorXd const& x, Eigen::VectorXd const& mean, SpdMatrix const& cov)
{
    if (x.size() != mean.size() || x.size() != cov.dim()) {
        throw DimensionError("mvn_logpdf dimension mismatch");
    }
    auto const d = static_cast<double>(x.size());
    return -0.5 * (d * kLog2Pi + cov.logdet() + cov.inv_quad(x - mean));
}

QuadratureRule gauss_legendre(int n)
{
    if (n < 1) {
        throw PreconditionError("quadrature needs at least one node");
    }
    QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess for the i-th largest root.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                double const pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            double const pn = n == 1 ? x : p1;
            double const pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            double const dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        double const w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes(i) = -x;
        rule.weights(i) = w;
        rule.nodes(n - 1 - i) = x;
        rule.weights(n - 1 - i) = w;
    }
    return rule;
}

double quadrature_1d(std::function<double(double)> const& f, Interval bounds, int nodes)
{
    auto const rule = gauss_legendre(nodes);
    double const half = 0.5 * (bounds.hi - bounds.lo);
    double const mid = 0.5 * (bounds.hi + bounds.lo);
    double sum = 0.0;
    for (int i = 0; i < nodes; ++i) {
        double const v = f(mid + half * rule.nodes(i));
        if (!std::isfinite(v)) {
            throw OracleError("integrand is not finite");
        }
        sum += rule.weights(i) * v;
    }
    return sum * half;
}

double grid_quadrature_2d(std::function<double(double, double)> const& f, Rectangle const& bounds,
    int nodes_per_axis)
{
    if (nodes_per_axis < 32) {
        throw PreconditionError("grid quadrature needs at least 32 nodes per axis");
    }
    auto const rule = gauss_legendre(nodes_per_axis);
    double const hx = 0.5 * (bounds.x.hi - bounds.x.lo);
    double const mx = 0.5 * (bounds.x.hi + bounds.x.lo);
    double const hy = 0.5 * (bounds.y.hi - bounds.y.lo);
    double const my = 0.5 * (bounds.y.hi + bounds.y.lo);
    double sum = 0.0;
    for (int i = 0; i < nodes_per_axis; ++i) {
        double const x = mx + hx * rule.nodes(i);
        double row = 0.0;
        for (int j = 0; j < nodes_per_axis; ++j) {
            double const v = f(x, my + hy * rule.nodes(j));
            if (!std::isfinite(v)) {
                throw OracleError("integrand is not finite");
            }
            row += rule.weights(j) * v;
        }
        sum += rule.weights(i) * row;
    }
    return sum * hx * hy;
}

double log_quadrature_1d(std::function<double(double)> const& log_f, Interval bounds, int nodes)
{
    auto const rule = gauss_legendre(nodes);
    double const half = 0.5 * (bounds.hi - bounds.lo);
    double const mid = 0.5 * (bounds.hi + bounds.lo);
    std::vector<double> logs(static_cast<std::size_t>(nodes));
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nodes; ++i) {
        double const v = log_f(mid + half * rule.nodes(i));
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
            throw OracleError("log integrand is not finite");
        }
        logs[static_cast<std::size_t>(i)] = v;
        top = std::max(top, v);
    }
    double sum = 0.0;
    for (int i = 0; i < nodes; ++i) {
        sum += rule.weights(i) * std::exp(logs[static_cast<std::size_t>(i)] - top);
    }
    return top + std::log(sum * half);
}

double log_grid_quadrature_2d(std::function<double(double, double)> const& log_f, Rectangle const& bounds,
    int nodes_per_axis)
{
    if (nodes_per_axis < 32) {
        throw PreconditionError("grid quadrature needs at least 32 nodes per axis");
    }
    auto const rule = gauss_legendre(nodes_per_axis);
    double const hx = 0.5 * (bounds.x.hi - bounds.x.lo);
    double const mx = 0.5 * (bounds.x.hi + bounds.x.lo);
    double const hy = 0.5 * (bounds.y.hi - bounds.y.lo);
    double const my = 0.5 * (bounds.y.hi + bounds.y.lo);
    Eigen::MatrixXd logs(nodes_per_axis, nodes_per_axis);
    for (int i = 0; i < nodes_per_axis; ++i) {
        for (int j = 0; j < nodes_per_axis; ++j) {
            double const v = log_f(mx + hx * rule.nodes(i), my + hy * rule.nodes(j));
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
                throw OracleError("log integrand is not finite");
            }
            logs(i, j) = v;
        }
    }
    double const top = logs.maxCoeff();
    double const sum = rule.weights.transpose() * (logs.array() - top).exp().matrix() * rule.weights;
    return top + std::log(sum * hx * hy);
}

} // namespace biasaudit
