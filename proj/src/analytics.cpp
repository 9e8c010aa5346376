#include "pricelab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pricelab/rng.hpp"

namespace pricelab {

double theory_exponent(double beta, bool know_utility)
{
    double rate = 3.0 / (2.0 * beta + 1.0);
    return know_utility ? rate : std::max(0.5, rate);
}

double loglog_slope(const std::vector<double>& horizons,
                    const std::vector<double>& mean_regrets)
{
    std::size_t n = horizons.size();
    if (n < 2 || mean_regrets.size() != n)
        throw std::invalid_argument("loglog_slope: need >= 2 matched points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(horizons[i] > 0.0) || !(mean_regrets[i] > 0.0))
            throw std::domain_error("loglog_slope: inputs must be positive");
        sx += std::log(horizons[i]);
        sy += std::log(mean_regrets[i]);
    }
    double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = std::log(horizons[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(mean_regrets[i]) - my);
    }
    if (sxx <= 0.0)
        throw std::invalid_argument("loglog_slope: horizons must be distinct");
    return sxy / sxx;
}

namespace {

double mean_curve_slope(const std::vector<std::vector<double>>& trial_curves,
                        const std::vector<std::size_t>& picks,
                        const std::vector<double>& horizons)
{
    std::vector<double> mean(horizons.size(), 0.0);
    for (std::size_t i : picks)
        for (std::size_t k = 0; k < mean.size(); ++k)
            mean[k] += trial_curves[i][k];
    for (double& v : mean)
        v /= static_cast<double>(picks.size());
    return loglog_slope(horizons, mean);
}

double percentile_sorted(const std::vector<double>& sorted, double q)
{
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

SlopeReport cluster_bootstrap(const std::vector<std::vector<double>>& trial_curves,
                              const std::vector<double>& horizons, int n_boot,
                              std::uint64_t seed)
{
    std::size_t n = trial_curves.size();
    if (n < 2)
        throw std::invalid_argument("cluster_bootstrap: need >= 2 trials");
    if (n_boot < 1)
        throw std::invalid_argument("cluster_bootstrap: need >= 1 resample");
    for (const auto& c : trial_curves)
        if (c.size() != horizons.size())
            throw std::invalid_argument("cluster_bootstrap: curve length mismatch");

    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i)
        all[i] = i;

    SlopeReport rep;
    rep.slope_hat = mean_curve_slope(trial_curves, all, horizons);
    rep.n_boot = n_boot;
    rep.n_trials = static_cast<int>(n);

    std::vector<double> slopes(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b), "boot"));
        std::vector<std::size_t> picks(n);
        for (std::size_t i = 0; i < n; ++i)
            picks[i] = rng.uniform_index(n);
        slopes[b] = mean_curve_slope(trial_curves, picks, horizons);
    }
    std::sort(slopes.begin(), slopes.end());
    rep.ci_lo = percentile_sorted(slopes, 0.025);
    rep.ci_hi = percentile_sorted(slopes, 0.975);
    return rep;
}

std::string compare_table(const std::vector<SlopeReport>& reports)
{
    std::string out =
        "  beta   slope    theory    95% CI               trials  boot\n";
    char buf[160];
    for (const auto& r : reports) {
        bool off = r.theory < r.ci_lo || r.theory > r.ci_hi;
        std::snprintf(buf, sizeof buf,
                      "%6.2f  %6.3f  %7.3f   [%6.3f, %6.3f] %s %6d %5d\n", r.beta,
                      r.slope_hat, r.theory, r.ci_lo, r.ci_hi, off ? "*" : " ",
                      r.n_trials, r.n_boot);
        out += buf;
    }
    return out;
}

} // namespace pricelab
