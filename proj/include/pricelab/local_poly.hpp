#pragma once

#include <stdexcept>
#include <vector>

#include "pricelab/kernels.hpp"

namespace pricelab {

//! Window has too few (or rank-deficient) samples to support the fit order.
struct DegenerateWindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! One design/response pair for the regression y_t against u_t.
struct Sample {
    double u = 0.0;
    double y = 0.0;
};

//! Weighted local polynomial fit at a single point.
//!
//! coefficients[k] estimates g^(k)(center) * bandwidth^k for the regression
//! function g, using the scaled monomial basis s^k / k!.
struct LocalFit {
    std::vector<double> coefficients;
    int effective_count = 0;       // samples with nonzero kernel weight
    double gram_min_eigenvalue = 0.0; // of the weight-normalized Gram, pre-ridge
    bool ridged = false;
    // sandwich standard error of coefficients[1] under the worst-case
    // Bernoulli response variance 1/4; infinity when order is 0
    double slope_sd = 0.0;
};

//! Gridded estimate of a CDF and its derivative.
struct CurveEstimate {
    std::vector<double> grid;        // strictly increasing
    std::vector<double> cdf_values;  // in [0, 1]
    std::vector<double> deriv_values;
    std::vector<double> deriv_sd;    // sandwich se of the derivative estimate
    double bandwidth = 0.0;
    int order = 0;
    double support_lo = 0.0;
    double support_hi = 0.0;
    double density_floor = 0.0;

    double cdf_at(double u) const;
    double deriv_at(double u) const;
};

//! Local polynomial regression of y on u at `center` with Epanechnikov
//! weights K((u_t - center) / bandwidth).
//!
//! Throws DegenerateWindowError when fewer than order+1 samples carry
//! weight or the window design is rank deficient (min eigenvalue of the
//! normalized Gram below 1e-12). Near-singular windows get a 1e-8 ridge;
//! gram_min_eigenvalue always reports the pre-ridge value.
LocalFit local_poly_fit(const std::vector<Sample>& samples, double center,
                        double bandwidth, int order);

//! Runs local_poly_fit at every grid point and maps intercept/slope to
//! (F, F') via F = 1 - mu0, F' = -mu1 / h, for binary responses y with
//! E[y | u] = 1 - F(u).
//!
//! Grid points at or outside [support_lo, support_hi] are pinned to F = 0
//! (left) or F = 1 (right); the CDF is clamped to [0, 1] and the derivative
//! floored at density_floor everywhere. Degenerate windows inherit the
//! nearest successful fit (ties resolve left).
CurveEstimate estimate_cdf_and_density(const std::vector<Sample>& samples,
                                       const std::vector<double>& grid,
                                       double bandwidth, int order,
                                       double support_lo, double support_hi,
                                       double density_floor);

//! Piecewise-linear interpolation with flat extension beyond the ends.
double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x);

} // namespace pricelab
