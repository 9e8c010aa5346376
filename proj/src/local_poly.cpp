#include "pricelab/local_poly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pricelab {

double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x)
{
    if (xs.empty()) throw std::invalid_argument("interp_linear: empty grid");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    std::size_t lo = hi - 1;
    double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

double CurveEstimate::cdf_at(double u) const
{
    if (u <= support_lo) return 0.0;
    if (u >= support_hi) return 1.0;
    return interp_linear(grid, cdf_values, u);
}

double CurveEstimate::deriv_at(double u) const
{
    return interp_linear(grid, deriv_values, u);
}

LocalFit local_poly_fit(const std::vector<Sample>& samples, double center,
                        double bandwidth, int order)
{
    if (order < 0) throw std::invalid_argument("local_poly_fit: negative order");
    if (bandwidth <= 0.0) throw std::invalid_argument("local_poly_fit: bandwidth <= 0");

    const int p = order + 1;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd gram2 = Eigen::MatrixXd::Zero(p, p); // squared-weight moments
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd basis(p);

    // k! scaling so coefficient k estimates g^(k)(center) * h^k
    std::vector<double> inv_fact(p, 1.0);
    for (int k = 1; k < p; ++k) inv_fact[k] = inv_fact[k - 1] / k;

    int n_eff = 0;
    double total_weight = 0.0;
    for (const Sample& s : samples) {
        double t = (s.u - center) / bandwidth;
        double w = epanechnikov(t);
        if (w <= 0.0) continue;
        ++n_eff;
        total_weight += w;
        double pw = 1.0;
        for (int k = 0; k < p; ++k) {
            basis[k] = pw * inv_fact[k];
            pw *= t;
        }
        gram.noalias() += w * basis * basis.transpose();
        gram2.noalias() += (w * w) * basis * basis.transpose();
        rhs.noalias() += (w * s.y) * basis;
    }

    if (n_eff < p)
        throw DegenerateWindowError("local window has " + std::to_string(n_eff) +
                                    " samples, needs " + std::to_string(p));

    gram /= total_weight;
    gram2 /= total_weight * total_weight;
    rhs /= total_weight;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    double min_eig = std::max(es.eigenvalues().minCoeff(), 0.0);

    LocalFit fit;
    fit.effective_count = n_eff;
    fit.gram_min_eigenvalue = min_eig;

    if (min_eig < 1e-12)
        throw DegenerateWindowError("rank-deficient local design");
    if (min_eig < 1e-8) {
        gram.diagonal().array() += 1e-8;
        fit.ridged = true;
    }

    Eigen::MatrixXd gram_inv = gram.inverse();
    Eigen::VectorXd mu = gram_inv * rhs;
    fit.coefficients.assign(mu.data(), mu.data() + p);

    if (p > 1) {
        // Var(mu) = sigma^2 A^-1 B A^-1 with A, B the plain and squared
        // weight moment matrices; sigma^2 = 1/4 bounds any Bernoulli response
        double var11 = (gram_inv * gram2 * gram_inv)(1, 1);
        fit.slope_sd = 0.5 * std::sqrt(std::max(var11, 0.0));
    } else {
        fit.slope_sd = std::numeric_limits<double>::infinity();
    }
    return fit;
}

CurveEstimate estimate_cdf_and_density(const std::vector<Sample>& samples,
                                       const std::vector<double>& grid,
                                       double bandwidth, int order,
                                       double support_lo, double support_hi,
                                       double density_floor)
{
    if (samples.empty())
        throw std::invalid_argument("estimate_cdf_and_density: no samples");
    if (grid.size() < 2)
        throw std::invalid_argument("estimate_cdf_and_density: grid too small");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw std::invalid_argument("estimate_cdf_and_density: grid not increasing");

    const std::size_t n = grid.size();
    CurveEstimate out;
    out.grid = grid;
    out.cdf_values.assign(n, 0.0);
    out.deriv_values.assign(n, density_floor);
    out.deriv_sd.assign(n, std::numeric_limits<double>::infinity());
    out.bandwidth = bandwidth;
    out.order = order;
    out.support_lo = support_lo;
    out.support_hi = support_hi;
    out.density_floor = density_floor;

    std::vector<char> ok(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            LocalFit fit = local_poly_fit(samples, grid[i], bandwidth, order);
            out.cdf_values[i] = 1.0 - fit.coefficients[0];
            out.deriv_values[i] =
                fit.coefficients.size() > 1 ? -fit.coefficients[1] / bandwidth : 0.0;
            out.deriv_sd[i] = fit.slope_sd / bandwidth;
            ok[i] = 1;
        } catch (const DegenerateWindowError&) {
            // filled from the nearest successful fit below
        }
    }

    if (std::find(ok.begin(), ok.end(), 1) == ok.end())
        throw DegenerateWindowError("every grid window is degenerate");

    for (std::size_t i = 0; i < n; ++i) {
        if (ok[i]) continue;
        std::size_t best = n;
        std::size_t best_dist = n + 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (!ok[j]) continue;
            std::size_t d = i > j ? i - j : j - i;
            if (d < best_dist) { // ties resolve to the leftmost candidate
                best_dist = d;
                best = j;
            }
        }
        out.cdf_values[i] = out.cdf_values[best];
        out.deriv_values[i] = out.deriv_values[best];
        out.deriv_sd[i] = out.deriv_sd[best];
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (grid[i] <= support_lo)
            out.cdf_values[i] = 0.0;
        else if (grid[i] >= support_hi)
            out.cdf_values[i] = 1.0;
        else
            out.cdf_values[i] = std::clamp(out.cdf_values[i], 0.0, 1.0);
        out.deriv_values[i] = std::max(out.deriv_values[i], density_floor);
    }
    return out;
}

} // namespace pricelab
