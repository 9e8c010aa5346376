#pragma once

#include <stdexcept>
#include <vector>

namespace pricelab {

enum class ModelClass { linear, sparse_linear, semireal_single_index };

//! First-stage valuation estimate with its error-scale proxy eps_m.
struct UtilityEstimate {
    std::vector<double> theta_hat;
    double intercept = 0.0;
    ModelClass model_class = ModelClass::linear;
    double eps_m = 0.0;
    std::vector<int> support_hat; // sparse only: indices of nonzero theta_hat
};

//! Least squares of B*y on x (binary y, prices uniform on [0, B] make
//! E[B y | x] = m(x)). No intercept unless requested. Near-singular Gram
//! matrices get a 1e-8 ridge; still-ill-conditioned systems throw.
UtilityEstimate ols_binary(const std::vector<std::vector<double>>& contexts,
                           const std::vector<double>& outcomes, double b_scale,
                           long t0_for_eps, bool with_intercept = false);

//! Coordinate-descent lasso on (x, B*y) with penalty
//! lambda = c_lambda * sqrt(log(d T0) / T0), followed by the hard threshold
//! keeping |theta_j| >= c_inf * lambda * sqrt(s).
UtilityEstimate lasso_threshold(const std::vector<std::vector<double>>& contexts,
                                const std::vector<double>& outcomes, double b_scale,
                                long t0, int s, double c_lambda = 1.0,
                                double c_inf = 1.0);

//! Error-scale rule: linear sqrt(d/T0), sparse s*sqrt(log d/T0),
//! semireal 0.05*|theta|/sqrt(n). Constants fixed at 1.
double eps_m_rule(ModelClass model_class, long t0, int d, int s, double theta_norm,
                  long n);

} // namespace pricelab
