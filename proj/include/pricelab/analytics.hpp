#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pricelab {

struct SlopeReport {
    double beta = 0.0;
    double slope_hat = 0.0;
    double theory = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    int n_boot = 0;
    int n_trials = 0;
};

//! Theoretical regret exponent: 3/(2 beta + 1) with known utility,
//! max{1/2, 3/(2 beta + 1)} with an estimated one.
double theory_exponent(double beta, bool know_utility);

//! OLS slope of log(regret) on log(horizon); exact on pure power laws.
//! Throws on nonpositive inputs or fewer than two points.
double loglog_slope(const std::vector<double>& horizons,
                    const std::vector<double>& mean_regrets);

//! Resamples whole trials (rows of trial_curves) with replacement n_boot
//! times; each resample recomputes the mean curve and its log-log slope.
//! CI is the empirical 2.5/97.5 percentile band. Deterministic given seed;
//! resample b draws from its own derived stream, so the result does not
//! depend on evaluation order. beta/theory fields are left at 0 for the
//! caller to fill.
SlopeReport cluster_bootstrap(const std::vector<std::vector<double>>& trial_curves,
                              const std::vector<double>& horizons, int n_boot,
                              std::uint64_t seed);

//! Fixed-width text table (beta, slope, theory, CI); rows where the theory
//! value falls outside the CI are flagged with '*'.
std::string compare_table(const std::vector<SlopeReport>& reports);

} // namespace pricelab
