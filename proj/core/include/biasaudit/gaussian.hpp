#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace biasaudit {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// log N(x; mean, sd^2) for scalars.
inline double log_normal(double x, double mean, double sd)
{
    double const z = (x - mean) / sd;
    return -0.5 * (kLog2Pi + z * z) - std::log(sd);
}

// A symmetric positive definite matrix with its Cholesky factor computed once.
//
// Factorization policy: if the plain Cholesky fails, 1e-8 * mean(diag) is
// added to the diagonal and the factorization retried once. A second failure
// throws FactorizationError. jitter() reports what was added.
class SpdMatrix {
public:
    explicit SpdMatrix(Eigen::MatrixXd values);

    [[nodiscard]] Eigen::Index dim() const { return values_.rows(); }
    [[nodiscard]] Eigen::MatrixXd const& values() const { return values_; }
    [[nodiscard]] Eigen::MatrixXd lower() const { return llt_.matrixL(); }
    [[nodiscard]] double jitter() const { return jitter_; }

    [[nodiscard]] double logdet() const;
    [[nodiscard]] Eigen::VectorXd solve(Eigen::VectorXd const& b) const;
    // r^T A^{-1} r
    [[nodiscard]] double inv_quad(Eigen::VectorXd const& r) const;

private:
    Eigen::MatrixXd values_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double jitter_ = 0.0;
};

double chol_logdet(SpdMatrix const& cov);

// log N(x; mean, cov) in nats.
double mvn_logpdf(Eigen::VectorXd const& x, Eigen::VectorXd const& mean, SpdMatrix const& cov);

struct QuadratureRule {
    Eigen::VectorXd nodes;   // on [-1, 1]
    Eigen::VectorXd weights;
};

// n-point Gauss-Legendre rule, nodes by Newton iteration on P_n.
QuadratureRule gauss_legendre(int n);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Rectangle {
    Interval x;
    Interval y;
};

double quadrature_1d(std::function<double(double)> const& f, Interval bounds, int nodes);

// Tensor-product Gauss-Legendre estimate of the integral of f over bounds.
// Requires nodes_per_axis >= 32; a non-finite f value throws OracleError.
double grid_quadrature_2d(std::function<double(double, double)> const& f, Rectangle const& bounds,
    int nodes_per_axis);

// log of the integral of exp(log_f), evaluated with a max shift so that
// integrands like exp(-1000) stay representable.
double log_quadrature_1d(std::function<double(double)> const& log_f, Interval bounds, int nodes);
double log_grid_quadrature_2d(std::function<double(double, double)> const& log_f, Rectangle const& bounds,
    int nodes_per_axis);

} // namespace biasaudit
