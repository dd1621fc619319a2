#include "biasaudit/models.hpp"

#include <cmath>

#include "biasaudit/gaussian.hpp"
#include "biasaudit/seeding.hpp"

namespace biasaudit {

void CausalModelSpec::validate() const
{
    if (!(sigma_x > 0.0 && sigma_w > 0.0 && sigma_y > 0.0)) {
        throw PreconditionError("causal model standard deviations must be positive");
    }
}

void ConfoundedModelSpec::validate() const
{
    if (k < 1) {
        throw PreconditionError("latent dimension k must be at least 1");
    }
    if (!(sigma_z > 0.0 && sigma_w > 0.0 && sigma_obs > 0.0)) {
        throw PreconditionError("confounded model standard deviations must be positive");
    }
}

JointVector make_joint(Eigen::MatrixXd const& x, Eigen::VectorXd const& y)
{
    if (x.rows() != y.size()) {
        throw DimensionError("causes and target have different row counts");
    }
    JointVector v;
    v.values.resize(x.rows(), x.cols() + 1);
    v.values << x, y;
    if (!v.values.allFinite()) {
        throw PreconditionError("joint matrix has non-finite entries");
    }
    return v;
}

std::string to_string(Method method)
{
    return method == Method::advi ? "advi" : "closed-form";
}

Method parse_method(std::string const& text)
{
    if (text == "advi") {
        return Method::advi;
    }
    if (text == "closed-form" || text == "closed_form") {
        return Method::closed_form;
    }
    throw PreconditionError("unknown method '" + text + "'");
}

CausalLogJoint causal_log_joint(Eigen::VectorXd const& w, Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
    CausalModelSpec const& spec)
{
    if (x.cols() != w.size() || x.rows() != y.size()) {
        throw DimensionError("causal log joint dimension mismatch");
    }
    auto const n = static_cast<double>(x.rows());
    auto const m = static_cast<double>(x.cols());
    double const vw = spec.sigma_w * spec.sigma_w;
    double const vy = spec.sigma_y * spec.sigma_y;
    Eigen::VectorXd const resid = y - x * w;
    CausalLogJoint out;
    out.value = -0.5 * (m * kLog2Pi + w.squaredNorm() / vw) - m * std::log(spec.sigma_w)
        - 0.5 * (n * kLog2Pi + resid.squaredNorm() / vy) - n * std::log(spec.sigma_y);
    out.grad_w = -w / vw + x.transpose() * resid / vy;
    return out;
}

double causal_evidence_closed_form(Eigen::MatrixXd const& x, Eigen::VectorXd const& y, CausalModelSpec const& spec)
{
    spec.validate();
    if (x.rows() < 1) {
        throw PreconditionError("evidence needs at least one row");
    }
    if (x.rows() != y.size()) {
        throw DimensionError("causes and target have different row counts");
    }
    Eigen::MatrixXd cov = spec.sigma_w * spec.sigma_w * (x * x.transpose());
    cov.diagonal().array() += spec.sigma_y * spec.sigma_y;
    return mvn_logpdf(y, Eigen::VectorXd::Zero(y.size()), SpdMatrix(std::move(cov)));
}

double code_length_X(Eigen::MatrixXd const& x, double sigma_x)
{
    if (!(sigma_x > 0.0)) {
        throw PreconditionError("sigma_x must be positive");
    }
    auto const count = static_cast<double>(x.size());
    return 0.5 * (count * kLog2Pi + x.squaredNorm() / (sigma_x * sigma_x)) + count * std::log(sigma_x);
}

namespace {

// Core of the confounded log joint over raw buffers so the variational target
// can evaluate it without copying theta into matrices.
double confounded_value_and_grad(Eigen::Ref<Eigen::MatrixXd const> const& z, Eigen::Ref<Eigen::MatrixXd const> const& w,
    Eigen::MatrixXd const& v, ConfoundedModelSpec const& spec, Eigen::Ref<Eigen::MatrixXd> grad_z,
    Eigen::Ref<Eigen::MatrixXd> grad_w)
{
    double const vz = spec.sigma_z * spec.sigma_z;
    double const vw = spec.sigma_w * spec.sigma_w;
    double const vo = spec.sigma_obs * spec.sigma_obs;
    auto const nz = static_cast<double>(z.size());
    auto const nw = static_cast<double>(w.size());
    auto const nv = static_cast<double>(v.size());

    Eigen::MatrixXd const resid = v - z * w;
    double const value = -0.5 * (nz * kLog2Pi + z.squaredNorm() / vz) - nz * std::log(spec.sigma_z)
        - 0.5 * (nw * kLog2Pi + w.squaredNorm() / vw) - nw * std::log(spec.sigma_w)
        - 0.5 * (nv * kLog2Pi + resid.squaredNorm() / vo) - nv * std::log(spec.sigma_obs);
    grad_z = -z / vz + resid * w.transpose() / vo;
    grad_w = -w / vw + z.transpose() * resid / vo;
    return value;
}

} // namespace

ConfoundedLogJoint confounded_log_joint(ConfoundedLatents const& latents, JointVector const& v,
    ConfoundedModelSpec const& spec)
{
    auto const n = v.n();
    auto const cols = v.values.cols();
    if (latents.z.rows() != n || latents.z.cols() != latents.w.rows() || latents.w.cols() != cols) {
        throw DimensionError("confounded log joint dimension mismatch");
    }
    ConfoundedLogJoint out;
    out.grad_z.resize(latents.z.rows(), latents.z.cols());
    out.grad_w.resize(latents.w.rows(), latents.w.cols());
    out.value = confounded_value_and_grad(latents.z, latents.w, v.values, spec, out.grad_z, out.grad_w);
    return out;
}

double ppca_evidence_fixed_W(JointVector const& v, Eigen::MatrixXd const& w, ConfoundedModelSpec const& spec)
{
    if (w.cols() != v.values.cols()) {
        throw DimensionError("loading matrix has wrong column count");
    }
    if (!w.allFinite()) {
        throw PreconditionError("loading matrix has non-finite entries");
    }
    auto const d = v.values.cols();
    Eigen::MatrixXd cov = spec.sigma_z * spec.sigma_z * (w.transpose() * w);
    cov.diagonal().array() += spec.sigma_obs * spec.sigma_obs;
    SpdMatrix const c(std::move(cov));
    double quad = 0.0;
    Eigen::MatrixXd const l = c.lower();
    // Solve all rows at once: L^{-1} V^T.
    Eigen::MatrixXd const half = l.triangularView<Eigen::Lower>().solve(v.values.transpose());
    quad = half.squaredNorm();
    auto const n = static_cast<double>(v.n());
    return -0.5 * (n * (static_cast<double>(d) * kLog2Pi + c.logdet()) + quad);
}

LogJoint causal_target(Eigen::MatrixXd const& x, Eigen::VectorXd const& y, CausalModelSpec const& spec)
{
    // Precompute the sufficient statistics; the log joint is quadratic in w.
    Eigen::MatrixXd const xtx = x.transpose() * x;
    Eigen::VectorXd const xty = x.transpose() * y;
    double const yty = y.squaredNorm();
    auto const n = static_cast<double>(x.rows());
    auto const m = static_cast<double>(x.cols());
    double const vw = spec.sigma_w * spec.sigma_w;
    double const vy = spec.sigma_y * spec.sigma_y;
    double const constant = -0.5 * (m + n) * kLog2Pi - m * std::log(spec.sigma_w) - n * std::log(spec.sigma_y);
    return [=](Eigen::VectorXd const& w, Eigen::VectorXd& grad) {
        Eigen::VectorXd const xtxw = xtx * w;
        double const rss = yty - 2.0 * xty.dot(w) + w.dot(xtxw);
        grad = -w / vw + (xty - xtxw) / vy;
        return constant - 0.5 * (w.squaredNorm() / vw + rss / vy);
    };
}

LogJoint confounded_target(JointVector const& v, ConfoundedModelSpec const& spec)
{
    auto const n = v.n();
    auto const cols = v.values.cols();
    auto const k = static_cast<Eigen::Index>(spec.k);
    return [values = v.values, spec, n, cols, k](Eigen::VectorXd const& theta, Eigen::VectorXd& grad) {
        grad.resize(theta.size());
        Eigen::Map<Eigen::MatrixXd const> z(theta.data(), n, k);
        Eigen::Map<Eigen::MatrixXd const> w(theta.data() + n * k, k, cols);
        Eigen::Map<Eigen::MatrixXd> gz(grad.data(), n, k);
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + n * k, k, cols);
        return confounded_value_and_grad(z, w, values, spec, gz, gw);
    };
}

namespace {

CodeLength variational_code_length(LogJoint const& target, Eigen::Index d, VariationalOptions const& options,
    char const* what)
{
    auto result = fit(target, d, options.family, options.fit);
    if (options.require_convergence && !result.trace.converged) {
        throw NonConvergence(std::string(what) + ": variational fit did not converge in "
                + std::to_string(result.trace.iterations_run) + " iterations",
            std::move(result.trace));
    }
    auto const est = estimate_elbo(result.posterior, target, options.fit.final_elbo_samples,
        derive_seed(options.fit.seed, {0x656c626fULL}));
    CodeLength out;
    out.method = Method::advi;
    out.family = options.family;
    out.latent_dim = d;
    out.converged = result.trace.converged;
    out.iterations = result.trace.iterations_run;
    out.final_elbo = est.mean;
    out.nats = -est.mean;
    out.se = est.se;
    return out;
}

} // namespace

CodeLength L_causal(Eigen::MatrixXd const& x, Eigen::VectorXd const& y, CausalModelSpec const& spec, Method method,
    VariationalOptions const& options)
{
    spec.validate();
    if (x.rows() < 1) {
        throw PreconditionError("causal code length needs at least one row");
    }
    if (x.rows() != y.size()) {
        throw DimensionError("causes and target have different row counts");
    }
    double const lx = code_length_X(x, spec.sigma_x);
    if (method == Method::closed_form) {
        CodeLength out;
        out.method = Method::closed_form;
        out.latent_dim = x.cols();
        out.final_elbo = causal_evidence_closed_form(x, y, spec);
        out.nats = lx - out.final_elbo;
        return out;
    }
    auto out = variational_code_length(causal_target(x, y, spec), x.cols(), options, "causal model");
    out.nats += lx;
    return out;
}

CodeLength L_confounded(JointVector const& v, ConfoundedModelSpec const& spec, VariationalOptions const& options)
{
    spec.validate();
    if (v.values.cols() < 2) {
        throw PreconditionError("joint matrix needs at least one cause and one target");
    }
    if (v.n() < v.m() + 2) {
        throw PreconditionError("confounded code length needs n >= m + 2");
    }
    if (!v.values.allFinite()) {
        throw PreconditionError("joint matrix has non-finite entries");
    }
    auto const d = v.n() * spec.k + spec.k * v.values.cols();
    return variational_code_length(confounded_target(v, spec), d, options, "confounded model");
}

} // namespace biasaudit
