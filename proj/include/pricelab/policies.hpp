#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pricelab/demand_env.hpp"
#include "pricelab/rng.hpp"
#include "pricelab/transform.hpp"
#include "pricelab/utility_est.hpp"

namespace pricelab {

//! Uniform protocol the harness depends on: next_price, then observe.
class PricingPolicy {
public:
    virtual ~PricingPolicy() = default;
    virtual double next_price(const std::vector<double>& x) = 0;
    virtual void observe(const std::vector<double>& x, double p, bool y) = 0;
    virtual std::string name() const = 0;
};

enum class IlprMode { utility_exploration, initial_stage, refinement };

struct IlprConfig {
    double p_min = 0.0, p_max = 1.0;
    long horizon = 0; // T; enters the log T rate terms and the schedule
    int t0 = 100;     // initial-stage length and stage-doubling base
    int t0m = 0;      // utility-exploration length (unknown utility only)
    bool know_utility = false;
    ModelClass model_class = ModelClass::linear;
    int sparse_s = 1;        // sparsity bound fed to the lasso
    double beta = 2.0;
    int order_unknown = 2;   // local quadratic for unknown utility
    double bandwidth_scale = 0.5;
    int grid_n = 301;
    SmoothingConfig smoothing{};
    double support_lo = -0.3, support_hi = 0.3;
    double density_floor = 1e-3;
    double b0_scale = 1.0;   // initial-stage tilt constant
    double a1b1_widen = 0.05;
    std::optional<double> a1, b1; // explicit affine initial-stage map
    bool stage_from_2l = false;   // stage length 2^l T0 instead of 2^{l-1} T0
    double c1_floor = 0.05;
    // Known-utility runs normally use eps_m = 0; calibrated environments set
    // this to the single-index fit's error scale instead.
    std::optional<double> eps_m;
};

//! Stagewise iterative local polynomial regression pricing.
//!
//! Unknown utility: T0m uniform-price exploration steps fit m_hat (OLS or
//! lasso) plus a pilot transform that places the affine initial-stage map;
//! then T0 steps priced at m_hat + a1 m_hat + b1; then doubling refinement
//! stages priced through the inverted transform. Known utility skips the
//! exploration block and prices the initial stage uniformly at random
//! unless a1/b1 are supplied.
class IlprPolicy : public PricingPolicy {
public:
    IlprPolicy(IlprConfig cfg, std::uint64_t seed,
               std::function<double(const std::vector<double>&)> known_m = nullptr);

    double next_price(const std::vector<double>& x) override;
    void observe(const std::vector<double>& x, double p, bool y) override;
    std::string name() const override { return "ilpr"; }

    IlprMode mode() const { return mode_; }
    int stage_index() const { return stage_index_; }
    int refit_failures() const { return refit_failures_; }
    bool has_transform() const { return transform_.has_value(); }
    const TransformEstimate& transform() const { return *transform_; }
    const UtilityEstimate& utility_estimate() const { return m_hat_; }
    double mhat(const std::vector<double>& x) const;
    std::optional<double> a1() const { return cfg_.a1; }
    std::optional<double> b1() const { return cfg_.b1; }

    //! Test hook: installs a transform, jumps to refinement, and freezes
    //! the stage schedule so the installed transform is never replaced.
    void install_transform(TransformEstimate t);

    //! Full stage-refit pipeline on a buffer of (design, outcome) pairs.
    TransformEstimate build_transform(const std::vector<Sample>& samples,
                                      PerturbStage stage) const;

private:
    long stage_length(int l) const;
    void end_of_exploration();
    bool transform_prices_buffer(const TransformEstimate& t) const;
    bool transform_informative(const TransformEstimate& t) const;
    void refit(PerturbStage stage);
    void advance_stage();

    IlprConfig cfg_;
    Rng rng_;
    std::function<double(const std::vector<double>&)> known_m_;

    IlprMode mode_ = IlprMode::utility_exploration;
    UtilityEstimate m_hat_;
    bool have_m_hat_ = false;
    std::optional<TransformEstimate> transform_;
    int stage_index_ = 0;   // 0 = initial stage, l >= 1 refinement
    long stage_target_ = 0; // samples this stage runs for
    std::vector<Sample> buffer_;
    std::vector<double> buffer_m_; // m_hat per buffered sample, for refit vetting
    long stage_clamped_ = 0;       // prices clamped to [p_min, p_max] this stage
    std::vector<std::vector<double>> explore_x_;
    std::vector<double> explore_p_, explore_y_;
    int refit_failures_ = 0;
    double eps_m_ = 0.0;
};

struct KernelBaselineConfig {
    double p_min = 0.0, p_max = 1.0;
    double beta = 2.0;
    bool know_utility = false;
    long episode_base = 200;
    double explore_c = 5.0;
    double bandwidth_scale = 0.5;
    int grid_n = 301;
    double density_floor = 1e-3;
    double root_step = 0.35;
};

//! Explore-then-commit episodes with a one-shot Nadaraya-Watson plug-in:
//! each doubling episode explores uniformly for n_exp = min(b, floor(c b^a))
//! steps, refits (F, F') by NW sums on the pooled exploration data, then
//! prices greedily by damped fixed-point iteration on the first-order
//! condition p = m(x) + (1 - F(u)) / F'(u).
class KernelBaselinePolicy : public PricingPolicy {
public:
    KernelBaselinePolicy(KernelBaselineConfig cfg, std::uint64_t seed,
                         std::function<double(const std::vector<double>&)> known_m = nullptr);

    double next_price(const std::vector<double>& x) override;
    void observe(const std::vector<double>& x, double p, bool y) override;
    std::string name() const override { return "kernel"; }

    long exploration_count(long episode_len) const;
    bool exploring() const { return pos_ < n_exp_; }

private:
    void fit();
    double mhat(const std::vector<double>& x) const;

    KernelBaselineConfig cfg_;
    Rng rng_;
    std::function<double(const std::vector<double>&)> known_m_;

    long episode_len_, n_exp_, pos_ = 0;
    std::vector<std::vector<double>> pool_x_;
    std::vector<double> pool_p_, pool_y_;
    UtilityEstimate m_hat_;
    bool have_m_hat_ = false;
    bool fitted_ = false;
    std::vector<double> grid_, f_cdf_, f_deriv_;
};

struct DipConfig {
    double p_min = 0.0, p_max = 1.0;
    int init_exponent = 7; // 2^7 uniform-price steps
    double ucb_c = 1.0 / 40.0;
    double ridge = 0.1;
};

//! Discretized UCB pricing: after the uniform init block, doubling episodes
//! rediscretize the price range into max{2, floor(20 ceil(b^{1/6}))} bins and
//! price at the bin maximizing ridge-stabilized mean revenue plus
//! ucb_c * sqrt(log t / (count + ridge)).
class DipPolicy : public PricingPolicy {
public:
    DipPolicy(DipConfig cfg, std::uint64_t seed);

    double next_price(const std::vector<double>& x) override;
    void observe(const std::vector<double>& x, double p, bool y) override;
    std::string name() const override { return "dip"; }

    int bin_count(long episode_len) const;
    long current_bins() const { return static_cast<long>(centers_.size()); }

private:
    void start_episode(long len);

    DipConfig cfg_;
    Rng rng_;
    long t_ = 0; // completed steps
    long init_remaining_;
    int episode_exp_;
    long pos_ = 0, episode_len_ = 0;
    std::vector<double> centers_, rev_sum_;
    std::vector<long> count_;
    int last_bin_ = -1;
};

//! Clairvoyant pricing through the environment's cached oracle table.
class OraclePolicy : public PricingPolicy {
public:
    explicit OraclePolicy(const DemandEnvironment& env) : env_(&env) {}
    double next_price(const std::vector<double>& x) override
    {
        return env_->oracle_price_cached(env_->mean_utility(x));
    }
    void observe(const std::vector<double>&, double, bool) override {}
    std::string name() const override { return "oracle"; }

private:
    const DemandEnvironment* env_;
};

class UniformPolicy : public PricingPolicy {
public:
    UniformPolicy(double p_min, double p_max, std::uint64_t seed)
        : p_min_(p_min), p_max_(p_max), rng_(seed)
    {
    }
    double next_price(const std::vector<double>&) override
    {
        return rng_.uniform(p_min_, p_max_);
    }
    void observe(const std::vector<double>&, double, bool) override {}
    std::string name() const override { return "uniform"; }

private:
    double p_min_, p_max_;
    Rng rng_;
};

} // namespace pricelab
