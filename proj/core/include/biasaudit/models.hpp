#pragma once

#include <string>

#include <Eigen/Core>

#include "biasaudit/advi.hpp"
#include "biasaudit/errors.hpp"

namespace biasaudit {

// Causal model: X_i ~ N(0, sigma_x^2), w ~ N(0, sigma_w^2 I),
// y | X, w ~ N(X w, sigma_y^2 I).
struct CausalModelSpec {
    double sigma_x = 1.0;
    double sigma_w = 1.0;
    double sigma_y = 1.0;

    void validate() const;
};

// Confounded model: z_n ~ N(0, sigma_z^2 I_k), W ~ N(0, sigma_w^2) entrywise
// (k x (m+1)), v_n | z_n, W ~ N(W^T z_n, sigma_obs^2 I_{m+1}) where
// v_n = (x_n, y_n) is one row of the joint matrix.
struct ConfoundedModelSpec {
    int k = 1;
    double sigma_z = 1.0;
    double sigma_w = 1.0;
    double sigma_obs = 1.0;

    void validate() const;
};

// Causes and one target stacked row-wise: n x (m+1), target last.
struct JointVector {
    Eigen::MatrixXd values;

    [[nodiscard]] Eigen::Index n() const { return values.rows(); }
    [[nodiscard]] Eigen::Index m() const { return values.cols() - 1; }
};

JointVector make_joint(Eigen::MatrixXd const& x, Eigen::VectorXd const& y);

enum class Method { closed_form, advi };

std::string to_string(Method method);
Method parse_method(std::string const& text);

struct CausalLogJoint {
    double value = 0.0;
    Eigen::VectorXd grad_w;
};

CausalLogJoint causal_log_joint(Eigen::VectorXd const& w, Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
    CausalModelSpec const& spec);

// log N(y; 0, sigma_w^2 X X^T + sigma_y^2 I_n), the regression weights
// integrated out analytically.
double causal_evidence_closed_form(Eigen::MatrixXd const& x, Eigen::VectorXd const& y, CausalModelSpec const& spec);

// -sum log N(x_ij; 0, sigma_x^2) over every entry.
double code_length_X(Eigen::MatrixXd const& x, double sigma_x);

struct ConfoundedLatents {
    Eigen::MatrixXd z; // n x k
    Eigen::MatrixXd w; // k x (m+1)
};

struct ConfoundedLogJoint {
    double value = 0.0;
    Eigen::MatrixXd grad_z;
    Eigen::MatrixXd grad_w;
};

ConfoundedLogJoint confounded_log_joint(ConfoundedLatents const& latents, JointVector const& v,
    ConfoundedModelSpec const& spec);

// Z integrated out for fixed loadings:
// sum_n log N(v_n; 0, sigma_z^2 W^T W + sigma_obs^2 I).
double ppca_evidence_fixed_W(JointVector const& v, Eigen::MatrixXd const& w, ConfoundedModelSpec const& spec);

// Description length in nats together with how it was obtained.
struct CodeLength {
    double nats = 0.0;
    double se = 0.0; // Monte-Carlo SE of the ELBO, 0 for closed forms
    Method method = Method::closed_form;
    Family family = Family::full_rank;
    Eigen::Index latent_dim = 0;
    bool converged = true;
    int iterations = 0;
    double final_elbo = 0.0;
};

struct VariationalOptions {
    FitConfig fit;
    Family family = Family::full_rank;
    // Throw NonConvergence instead of reporting converged = false.
    bool require_convergence = false;
};

class NonConvergence : public Error {
public:
    NonConvergence(std::string const& what, FitTrace trace) : Error(what), trace_(std::move(trace)) {}
    [[nodiscard]] FitTrace const& trace() const { return trace_; }

private:
    FitTrace trace_;
};

// Log joint over w for the variational engine.
LogJoint causal_target(Eigen::MatrixXd const& x, Eigen::VectorXd const& y, CausalModelSpec const& spec);
// Log joint over theta = (vec Z, vec W), both column-major.
LogJoint confounded_target(JointVector const& v, ConfoundedModelSpec const& spec);

// L_ca = code_length_X(X) - log p(y | X). With Method::advi the evidence is
// replaced by the fitted ELBO estimate.
CodeLength L_causal(Eigen::MatrixXd const& x, Eigen::VectorXd const& y, CausalModelSpec const& spec, Method method,
    VariationalOptions const& options = {});

// L_co = -ELBO of the confounded model over (Z, W). Requires n >= m + 2.
CodeLength L_confounded(JointVector const& v, ConfoundedModelSpec const& spec,
    VariationalOptions const& options = {FitConfig{}, Family::mean_field, false});

} // namespace biasaudit
