#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pricelab/rng.hpp"
#include "pricelab/utility_est.hpp"

using namespace pricelab;

namespace {

// independent normal-equations oracle via Gaussian elimination
std::vector<double> ols_oracle(const std::vector<std::vector<double>>& xs,
                               const std::vector<double>& ys)
{
    const int d = static_cast<int>(xs[0].size());
    std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c)
                a[r][c] += xs[i][r] * xs[i][c];
            a[r][d] += xs[i][r] * ys[i];
        }
    for (int col = 0; col < d; ++col) {
        int piv = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col]))
                piv = r;
        std::swap(a[col], a[piv]);
        for (int r = 0; r < d; ++r) {
            if (r == col)
                continue;
            double f = a[r][col] / a[col][col];
            for (int c = col; c <= d; ++c)
                a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> out(d);
    for (int k = 0; k < d; ++k)
        out[k] = a[k][d] / a[k][k];
    return out;
}

} // namespace

TEST_CASE("ols_binary: constant covariate averages the outcomes")
{
    std::vector<std::vector<double>> xs = {{1.0}, {1.0}, {1.0}, {1.0}};
    std::vector<double> ys = {1.0, 0.0, 1.0, 0.0};
    UtilityEstimate est = ols_binary(xs, ys, 1.0, 4);
    REQUIRE(est.theta_hat.size() == 1);
    CHECK(est.theta_hat[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(est.model_class == ModelClass::linear);
    // eps_m = sqrt(d / T0) = sqrt(1/4)
    CHECK(est.eps_m == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ols_binary: noiseless recovery matches the oracle to 1e-8")
{
    Rng rng(21);
    std::vector<double> theta0 = {0.4, -0.2, 0.7};
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x = {rng.uniform(), rng.uniform(), rng.uniform()};
        double m = 0.0;
        for (int j = 0; j < 3; ++j)
            m += theta0[j] * x[j];
        xs.push_back(x);
        ys.push_back(m); // B = 1, exact conditional mean as outcome
    }
    UtilityEstimate est = ols_binary(xs, ys, 1.0, 50);
    auto oracle = ols_oracle(xs, ys);
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(est.theta_hat[j] - theta0[j]) < 1e-8);
        CHECK(std::abs(est.theta_hat[j] - oracle[j]) < 1e-10);
    }
}

TEST_CASE("ols_binary: scaled outcomes and the B factor")
{
    // with prices uniform on [0, B], E[B y | x] = m(x); feed B*y directly
    Rng rng(22);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    double b_scale = 2.0;
    for (int i = 0; i < 40000; ++i) {
        double x = rng.uniform(0.3, 0.7);
        double m = 0.8 * x;
        double p = rng.uniform(0.0, b_scale);
        double eps = rng.uniform(-0.1, 0.1);
        double y = (m + eps >= p) ? 1.0 : 0.0;
        xs.push_back({x});
        ys.push_back(y);
    }
    UtilityEstimate est = ols_binary(xs, ys, b_scale, 40000);
    CHECK(est.theta_hat[0] == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("ols_binary: duplicate columns exercise the ridge fallback")
{
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    Rng rng(23);
    for (int i = 0; i < 30; ++i) {
        double x = rng.uniform();
        xs.push_back({x, x}); // exactly collinear
        ys.push_back(0.5 * x);
    }
    UtilityEstimate est = ols_binary(xs, ys, 1.0, 30);
    REQUIRE(est.theta_hat.size() == 2);
    for (double t : est.theta_hat)
        CHECK(std::isfinite(t));
    // the ridge solution splits the coefficient between the twin columns
    CHECK(est.theta_hat[0] + est.theta_hat[1] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("lasso on an orthonormal design")
{
    // columns of an identity-like design: x_i has a single 1 in coordinate
    // i mod d, so the Gram is T0/d * I and the lasso decouples
    const int d = 4, n = 400;
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    std::vector<double> theta0 = {0.9, 0.05, -0.6, 0.0};
    for (int i = 0; i < n; ++i) {
        std::vector<double> x(d, 0.0);
        x[i % d] = 1.0;
        xs.push_back(x);
        ys.push_back(theta0[i % d]);
    }

    SUBCASE("zero penalty reproduces least squares")
    {
        UtilityEstimate est = lasso_threshold(xs, ys, 1.0, n, 2, 0.0, 0.0);
        for (int j = 0; j < d; ++j)
            CHECK(est.theta_hat[j] == doctest::Approx(theta0[j]).epsilon(1e-7));
    }
    SUBCASE("soft thresholding matches the closed form coordinatewise")
    {
        // with Gram = (n/d) I and objective (1/2n)||r||^2 + lambda ||theta||_1,
        // each coordinate solves sign(z)(|z| - lambda d)_+ where z is the
        // marginal LS coefficient; verify against the returned values with
        // thresholding disabled
        UtilityEstimate est = lasso_threshold(xs, ys, 1.0, n, 2, 1.0, 0.0);
        double lambda = std::sqrt(std::log(static_cast<double>(d) * n) / n);
        for (int j = 0; j < d; ++j) {
            double z = theta0[j];
            double scaled = lambda * d; // Gram diagonal n/d rescales the penalty
            double expect =
                std::abs(z) > scaled ? (z > 0 ? z - scaled : z + scaled) : 0.0;
            CHECK(est.theta_hat[j] == doctest::Approx(expect).epsilon(1e-6));
        }
    }
    SUBCASE("all coefficients below the hard threshold give an empty support")
    {
        std::vector<double> tiny = ys;
        for (auto& y : tiny)
            y *= 0.001;
        UtilityEstimate est = lasso_threshold(xs, tiny, 1.0, n, 2, 1.0, 1.0);
        for (double t : est.theta_hat)
            CHECK(t == 0.0);
        CHECK(est.support_hat.empty());
    }
}

TEST_CASE("lasso KKT conditions at convergence")
{
    Rng rng(31);
    const int d = 12, n = 500;
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < n; ++i) {
        std::vector<double> x(d);
        for (int j = 0; j < d; ++j)
            x[j] = rng.normal();
        double m = 0.7 * x[0] - 0.5 * x[3];
        xs.push_back(x);
        ys.push_back(m + 0.3 * rng.normal());
    }
    // c_inf = 0 keeps the raw lasso solution (hard threshold disabled)
    UtilityEstimate est = lasso_threshold(xs, ys, 1.0, n, 2, 1.0, 0.0);
    double lambda = std::sqrt(std::log(static_cast<double>(d) * n) / n);
    for (int j = 0; j < d; ++j) {
        double grad = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = ys[i];
            for (int k = 0; k < d; ++k)
                r -= est.theta_hat[k] * xs[i][k];
            grad += -xs[i][j] * r;
        }
        grad /= n;
        if (est.theta_hat[j] != 0.0)
            CHECK(std::abs(std::abs(grad) - lambda) < 1e-6);
        else
            CHECK(std::abs(grad) <= lambda + 1e-6);
    }
}

TEST_CASE("sparse support screening: d = 200, s = 5, T0 = 2000, 100 seeds")
{
    const int d = 200, s = 5, t0 = 2000;
    const double b_scale = 2.0, coef = 0.3;
    int contained = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(7000 + seed);
        std::set<int> support;
        while (static_cast<int>(support.size()) < s)
            support.insert(static_cast<int>(rng.uniform_index(d)));
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (int i = 0; i < t0; ++i) {
            std::vector<double> x(d);
            for (int j = 0; j < d; ++j)
                x[j] = rng.uniform();
            double m = 0.0;
            for (int j : support)
                m += coef * x[j];
            double p = rng.uniform(0.0, b_scale);
            double eps = rng.uniform(-0.3, 0.3);
            xs.push_back(std::move(x));
            ys.push_back((m + eps >= p) ? 1.0 : 0.0);
        }
        UtilityEstimate est = lasso_threshold(xs, ys, b_scale, t0, s);
        bool subset = true;
        for (int j : est.support_hat)
            if (!support.count(j))
                subset = false;
        if (subset)
            ++contained;
    }
    CHECK(contained >= 95);
}

TEST_CASE("eps_m_rule closed forms")
{
    CHECK(eps_m_rule(ModelClass::linear, 400, 4, 0, 0.0, 0) ==
          doctest::Approx(0.1).epsilon(1e-12));
    CHECK(eps_m_rule(ModelClass::semireal_single_index, 0, 0, 0, 2.0, 400) ==
          doctest::Approx(0.005).epsilon(1e-12));
    CHECK(eps_m_rule(ModelClass::sparse_linear, 2000, 200, 5, 0.0, 0) ==
          doctest::Approx(5.0 * std::sqrt(std::log(200.0) / 2000.0)).epsilon(1e-12));
    // consistency: the scale vanishes as the sample grows
    double early = eps_m_rule(ModelClass::linear, 100, 4, 0, 0.0, 0);
    double late = eps_m_rule(ModelClass::linear, 1000000, 4, 0, 0.0, 0);
    CHECK(late < early);
    CHECK(late < 0.01);
}
