#include "pricelab/utility_est.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace pricelab {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& contexts,
                          bool with_intercept)
{
    if (contexts.empty()) throw std::invalid_argument("no contexts");
    const std::size_t n = contexts.size();
    const std::size_t d = contexts.front().size();
    Eigen::MatrixXd x(n, d + (with_intercept ? 1 : 0));
    for (std::size_t i = 0; i < n; ++i) {
        if (contexts[i].size() != d)
            throw std::invalid_argument("ragged context matrix");
        for (std::size_t j = 0; j < d; ++j) x(i, j) = contexts[i][j];
        if (with_intercept) x(i, d) = 1.0;
    }
    return x;
}

} // namespace

UtilityEstimate ols_binary(const std::vector<std::vector<double>>& contexts,
                           const std::vector<double>& outcomes, double b_scale,
                           long t0_for_eps, bool with_intercept)
{
    if (contexts.size() != outcomes.size())
        throw std::invalid_argument("ols_binary: size mismatch");
    Eigen::MatrixXd x = to_matrix(contexts, with_intercept);
    Eigen::VectorXd y(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) y(i) = b_scale * outcomes[i];

    const double n = static_cast<double>(x.rows());
    Eigen::MatrixXd gram = x.transpose() * x / n;
    Eigen::VectorXd rhs = x.transpose() * y / n;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo < 1e-8 * std::max(hi, 1.0)) {
        gram.diagonal().array() += 1e-8;
        lo += 1e-8;
        hi += 1e-8;
    }
    if (!(lo > 0.0) || hi / lo > 1e12)
        throw std::runtime_error("ols_binary: design too ill-conditioned");

    Eigen::VectorXd theta = gram.ldlt().solve(rhs);

    UtilityEstimate est;
    est.model_class = ModelClass::linear;
    const int d = static_cast<int>(contexts.front().size());
    est.theta_hat.assign(theta.data(), theta.data() + d);
    if (with_intercept) est.intercept = theta(d);
    est.eps_m = eps_m_rule(ModelClass::linear, t0_for_eps, d, 0, 0.0, 0);
    return est;
}

UtilityEstimate lasso_threshold(const std::vector<std::vector<double>>& contexts,
                                const std::vector<double>& outcomes, double b_scale,
                                long t0, int s, double c_lambda, double c_inf)
{
    if (contexts.size() != outcomes.size())
        throw std::invalid_argument("lasso_threshold: size mismatch");
    if (s < 1) throw std::invalid_argument("lasso_threshold: s must be >= 1");
    Eigen::MatrixXd x = to_matrix(contexts, false);
    const std::size_t n = contexts.size();
    const std::size_t d = contexts.front().size();
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) y(i) = b_scale * outcomes[i];

    const double lambda =
        c_lambda * std::sqrt(std::log(static_cast<double>(d) * t0) / t0);

    // covariance updates: gram and x'y accumulated once
    Eigen::MatrixXd gram = x.transpose() * x / static_cast<double>(n);
    Eigen::VectorXd xty = x.transpose() * y / static_cast<double>(n);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd gram_theta = Eigen::VectorXd::Zero(d); // gram * theta

    const int max_sweeps = 100000;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double cj = gram(j, j);
            if (cj <= 0.0) continue;
            double rho = xty(j) - gram_theta(j) + cj * theta(j);
            double updated = 0.0;
            if (rho > lambda)
                updated = (rho - lambda) / cj;
            else if (rho < -lambda)
                updated = (rho + lambda) / cj;
            double delta = updated - theta(j);
            if (delta != 0.0) {
                gram_theta += delta * gram.col(j);
                theta(j) = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < 1e-8) break;
    }
    if (sweep == max_sweeps)
        throw std::runtime_error("lasso_threshold: coordinate descent did not converge");

    const double cutoff = c_inf * lambda * std::sqrt(static_cast<double>(s));
    UtilityEstimate est;
    est.model_class = ModelClass::sparse_linear;
    est.theta_hat.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (std::abs(theta(j)) >= cutoff) {
            est.theta_hat[j] = theta(j);
            est.support_hat.push_back(static_cast<int>(j));
        }
    }
    est.eps_m = eps_m_rule(ModelClass::sparse_linear, t0, static_cast<int>(d), s, 0.0, 0);
    return est;
}

double eps_m_rule(ModelClass model_class, long t0, int d, int s, double theta_norm,
                  long n)
{
    switch (model_class) {
    case ModelClass::linear:
        if (t0 < 1 || d < 1) throw std::invalid_argument("eps_m_rule: need t0, d >= 1");
        return std::sqrt(static_cast<double>(d) / t0);
    case ModelClass::sparse_linear:
        if (t0 < 1 || d < 2 || s < 1)
            throw std::invalid_argument("eps_m_rule: need t0 >= 1, d >= 2, s >= 1");
        return s * std::sqrt(std::log(static_cast<double>(d)) / t0);
    case ModelClass::semireal_single_index:
        if (n < 1) throw std::invalid_argument("eps_m_rule: need n >= 1");
        return 0.05 * theta_norm / std::sqrt(static_cast<double>(n));
    }
    throw std::invalid_argument("eps_m_rule: unknown model class");
}

} // namespace pricelab
