#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pricelab/demand_env.hpp"
#include "pricelab/policies.hpp"

namespace pricelab {

//! Everything needed to build a DemandEnvironment from a sweep cell.
struct EnvSpec {
    bool calibrated = false;

    // synthetic route
    double beta = 2.0;
    double rho = 5.0;
    int n_bumps = 10;
    double bump_half_width = 1.0 / 45.0;
    double support_lo = -0.3, support_hi = 0.3;
    double context_lo = 0.35, context_hi = 0.65;
    std::vector<double> utility_theta = {1.0};
    double utility_intercept = 0.0;

    // calibrated route: tabulated noise CDF and an empirical context pool
    std::vector<double> noise_grid, noise_cdf;
    std::vector<std::vector<double>> context_pool;

    double p_min = 0.0, p_max = 1.0;

    bool operator==(const EnvSpec&) const = default;
};

DemandEnvironment build_environment(const EnvSpec& spec);

//! Policy hyperparameters shared by every trial of a sweep. Per-trial
//! fields of the embedded configs (horizon, beta, bounds, t0m) are filled
//! by the harness from the trial itself.
struct PolicyParams {
    bool know_utility = false;
    bool t0m_auto = true; // t0m = ceil(sqrt(4 T)) when true
    IlprConfig ilpr;
    KernelBaselineConfig kernel;
    DipConfig dip;
};

struct TrialConfig {
    int trial_id = 0;
    std::string policy = "ilpr"; // ilpr | kernel | dip | oracle | uniform
    EnvSpec env;
    long horizon = 0;
    std::vector<long> checkpoints; // increasing, within [1, T], last = T
    std::uint64_t seed = 0;
    PolicyParams params;
};

struct RegretCurve {
    int trial_id = 0;
    std::string policy;
    double beta = 2.0;
    std::uint64_t seed = 0;
    std::vector<long> checkpoints;
    std::vector<double> cumulative_regret;
};

struct TrialFailure {
    std::size_t input_index = 0;
    int trial_id = 0;
    std::string message;
};

struct SweepResult {
    std::vector<RegretCurve> curves; // successes, in input order
    std::vector<TrialFailure> failures;
};

std::unique_ptr<PricingPolicy> make_policy(const TrialConfig& cfg,
                                           const DemandEnvironment& env,
                                           std::uint64_t policy_seed);

//! One seeded trial: contexts and purchases stream from the "env" seed
//! branch, policy randomness from the "policy" branch, so two policies on
//! the same (seed, trial_id) see identical customers.
RegretCurve run_trial(const TrialConfig& cfg, const DemandEnvironment& env);
RegretCurve run_trial(const TrialConfig& cfg);

//! Runs trials on `parallelism` workers. Results are stored by input index,
//! so the output is identical for any worker count; failures are collected
//! per trial without aborting the sweep. Environments are built once per
//! distinct EnvSpec and shared (stepping is const and thread-safe).
SweepResult run_sweep(const std::vector<TrialConfig>& trials, int parallelism);

//! Deterministic CSV: trial_id,policy,beta,seed,checkpoint,cumulative_regret.
std::string curves_csv(const std::vector<RegretCurve>& curves);
std::vector<RegretCurve> curves_from_csv(const std::string& text);

} // namespace pricelab
