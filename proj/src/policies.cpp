#include "pricelab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pricelab/kernels.hpp"
#include "pricelab/local_poly.hpp"

namespace pricelab {

namespace {

std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return g;
}

} // namespace

IlprPolicy::IlprPolicy(IlprConfig cfg, std::uint64_t seed,
                       std::function<double(const std::vector<double>&)> known_m)
    : cfg_(std::move(cfg)), rng_(seed), known_m_(std::move(known_m))
{
    if (cfg_.horizon <= 0)
        throw std::invalid_argument("ilpr: horizon must be positive");
    if (cfg_.t0 <= 1)
        throw std::invalid_argument("ilpr: t0 must exceed 1");
    cfg_.smoothing.beta = cfg_.beta;
    if (cfg_.eps_m)
        eps_m_ = *cfg_.eps_m;
    if (cfg_.know_utility) {
        if (!known_m_)
            throw std::invalid_argument("ilpr: known utility requires a utility function");
        mode_ = IlprMode::initial_stage;
        stage_target_ = cfg_.t0;
    } else {
        if (cfg_.t0m <= 1)
            throw std::invalid_argument("ilpr: unknown utility requires t0m > 1");
        mode_ = IlprMode::utility_exploration;
        stage_target_ = cfg_.t0m;
    }
}

double IlprPolicy::mhat(const std::vector<double>& x) const
{
    if (cfg_.know_utility)
        return known_m_(x);
    if (!have_m_hat_)
        throw std::logic_error("ilpr: utility estimate not fitted yet");
    double m = m_hat_.intercept;
    std::size_t d = std::min(x.size(), m_hat_.theta_hat.size());
    for (std::size_t j = 0; j < d; ++j)
        m += m_hat_.theta_hat[j] * x[j];
    return m;
}

long IlprPolicy::stage_length(int l) const
{
    int e = cfg_.stage_from_2l ? l : l - 1;
    double len = std::ldexp(static_cast<double>(cfg_.t0), std::max(e, 0));
    return static_cast<long>(std::min(len, 1e15));
}

double IlprPolicy::next_price(const std::vector<double>& x)
{
    switch (mode_) {
    case IlprMode::utility_exploration:
        return rng_.uniform(cfg_.p_min, cfg_.p_max);
    case IlprMode::initial_stage: {
        if (cfg_.a1 && cfg_.b1) {
            double m = mhat(x);
            return std::clamp(m + *cfg_.a1 * m + *cfg_.b1, cfg_.p_min, cfg_.p_max);
        }
        return rng_.uniform(cfg_.p_min, cfg_.p_max);
    }
    case IlprMode::refinement: {
        if (!transform_) // every refit so far failed: keep exploring
            return rng_.uniform(cfg_.p_min, cfg_.p_max);
        double m = mhat(x);
        double z = invert(*transform_, -m).z;
        double p = std::clamp(m + z, cfg_.p_min, cfg_.p_max);
        if (p != m + z)
            ++stage_clamped_;
        return p;
    }
    }
    return cfg_.p_min;
}

void IlprPolicy::observe(const std::vector<double>& x, double p, bool y)
{
    if (mode_ == IlprMode::utility_exploration) {
        explore_x_.push_back(x);
        explore_p_.push_back(p);
        explore_y_.push_back(y ? 1.0 : 0.0);
        if (static_cast<long>(explore_p_.size()) >= stage_target_)
            end_of_exploration();
        return;
    }
    buffer_.push_back({p - mhat(x), y ? 1.0 : 0.0});
    buffer_m_.push_back(mhat(x));
    if (static_cast<long>(buffer_.size()) >= stage_target_)
        advance_stage();
}

void IlprPolicy::end_of_exploration()
{
    long t0m = static_cast<long>(explore_p_.size());
    try {
        if (cfg_.model_class == ModelClass::sparse_linear)
            m_hat_ = lasso_threshold(explore_x_, explore_y_, cfg_.p_max, t0m,
                                     cfg_.sparse_s);
        else
            m_hat_ = ols_binary(explore_x_, explore_y_, cfg_.p_max, t0m);
    } catch (const std::exception&) {
        // intercept-only fallback: m_hat(x) = mean(B y)
        ++refit_failures_;
        m_hat_ = UtilityEstimate{};
        m_hat_.model_class = cfg_.model_class;
        m_hat_.intercept = cfg_.p_max *
                           std::accumulate(explore_y_.begin(), explore_y_.end(), 0.0) /
                           static_cast<double>(t0m);
        int d = explore_x_.empty() ? 0 : static_cast<int>(explore_x_[0].size());
        m_hat_.theta_hat.assign(d, 0.0);
        m_hat_.eps_m = eps_m_rule(cfg_.model_class, t0m, std::max(d, 1),
                                  std::max(cfg_.sparse_s, 1), 0.0, t0m);
    }
    have_m_hat_ = true;
    if (!cfg_.eps_m)
        eps_m_ = m_hat_.eps_m;

    if (!(cfg_.a1 && cfg_.b1)) {
        // pilot transform on the exploration data places the affine
        // initial-stage map: implied designs z_i = phi0^{-1}(-m_hat(x_i))
        // widened by a1b1_widen on each side, mapped onto the m_hat range
        double m_lo = std::numeric_limits<double>::infinity();
        double m_hi = -m_lo;
        for (const auto& x : explore_x_) {
            double m = mhat(x);
            m_lo = std::min(m_lo, m);
            m_hi = std::max(m_hi, m);
        }
        double target_lo = -0.5 * cfg_.a1b1_widen, target_hi = 0.5 * cfg_.a1b1_widen;
        try {
            std::vector<Sample> samples(explore_p_.size());
            for (std::size_t i = 0; i < explore_p_.size(); ++i)
                samples[i] = {explore_p_[i] - mhat(explore_x_[i]), explore_y_[i]};
            TransformEstimate pilot = build_transform(samples, PerturbStage::initial);
            double z_min = std::numeric_limits<double>::infinity();
            double z_max = -z_min;
            for (const auto& x : explore_x_) {
                double z = invert(pilot, -mhat(x)).z;
                z = std::clamp(z, cfg_.support_lo, cfg_.support_hi);
                z_min = std::min(z_min, z);
                z_max = std::max(z_max, z);
            }
            target_lo = z_min - cfg_.a1b1_widen;
            target_hi = z_max + cfg_.a1b1_widen;
        } catch (const std::exception&) {
            ++refit_failures_; // pilot failed: fall back to a widen-sized band at 0
        }
        if (m_hi - m_lo > 1e-9) {
            double a1 = (target_hi - target_lo) / (m_hi - m_lo);
            cfg_.a1 = a1;
            cfg_.b1 = target_lo - a1 * m_lo;
        } else {
            cfg_.a1 = 0.0;
            cfg_.b1 = 0.5 * (target_lo + target_hi);
        }
    }

    explore_x_.clear();
    explore_x_.shrink_to_fit();
    explore_p_.clear();
    explore_y_.clear();
    mode_ = IlprMode::initial_stage;
    stage_target_ = cfg_.t0;
}

TransformEstimate IlprPolicy::build_transform(const std::vector<Sample>& samples,
                                              PerturbStage stage) const
{
    long n = static_cast<long>(samples.size());
    if (n < 2)
        throw std::runtime_error("ilpr: too few samples for a stage refit");
    double z_lo = samples[0].u, z_hi = samples[0].u;
    for (const auto& s : samples) {
        z_lo = std::min(z_lo, s.u);
        z_hi = std::max(z_hi, s.u);
    }
    if (z_hi - z_lo < 1e-6)
        throw std::runtime_error("ilpr: degenerate design range");

    std::vector<double> grid = linspace(z_lo, z_hi, cfg_.grid_n);
    int order = cfg_.know_utility
                    ? std::max(1, static_cast<int>(std::floor(cfg_.beta)))
                    : cfg_.order_unknown;
    double h = cfg_.bandwidth_scale *
               std::pow(static_cast<double>(n), -1.0 / (2.0 * cfg_.beta + 1.0));
    CurveEstimate curve = estimate_cdf_and_density(samples, grid, h, order,
                                                   cfg_.support_lo, cfg_.support_hi,
                                                   cfg_.density_floor);
    std::vector<double> phi_i = phi_initial(curve);

    SmoothingConfig sm = cfg_.smoothing;
    sm.beta = cfg_.beta;
    double inset = 0.25 * (grid[1] - grid[0]);
    auto delta_fn = [&](double u) {
        double uc = std::clamp(u, z_lo + inset, z_hi - inset);
        return variable_bandwidth(uc, z_lo, z_hi, n, cfg_.horizon, eps_m_, sm);
    };
    std::vector<double> phi_s = post_smooth(grid, phi_i, delta_fn);

    double v = stage == PerturbStage::initial
                   ? 0.0
                   : boundary_fraction(n, cfg_.horizon, eps_m_, sm);
    double v1 = z_lo + v * (z_hi - z_lo);
    double v2 = z_hi - v * (z_hi - z_lo);
    double c1 = default_c1(grid, phi_s, v1, v2, cfg_.c1_floor);
    double b0 = 0.0;
    if (stage == PerturbStage::initial)
        b0 = cfg_.b0_scale * std::pow(static_cast<double>(n),
                                      -(cfg_.beta - 1.0) / (2.0 * cfg_.beta + 1.0));

    TransformEstimate t = perturb(grid, phi_s, z_lo, z_hi, v, c1, stage, b0);
    finalize_monotone(t);
    t.diag_density = curve.deriv_values;
    t.diag_density_sd = curve.deriv_sd;
    return t;
}

//! A refit is only trusted when nearly all of the stage's pricing targets
//! -m_hat(x_t) can be inverted near the interior: within the knot values
//! widened by one design-width of arm travel. Fits whose level is off by the
//! density-floor scale (1/floor) fail this for most targets, as does a
//! monotone projection that flattened the interior to one level or an
//! interior edge that crept inside the target range; any of these sends a
//! slice of the next stage to a price clamp, and the resulting bimodal
//! design poisons every later fit.
bool IlprPolicy::transform_prices_buffer(const TransformEstimate& t) const
{
    if (buffer_m_.empty())
        return true;
    double slack = 0.5 * t.c1 * (t.z_hi - t.z_lo);
    double lo = t.phi_v1 - slack, hi = t.phi_v2 + slack;
    std::size_t inside = 0;
    for (double m : buffer_m_) {
        double target = -m;
        if (target >= lo && target <= hi)
            ++inside;
    }
    return 20 * inside >= 19 * buffer_m_.size();
}

//! A candidate carries pricing information only if its density estimate
//! rises above its own sampling noise where the targets invert; otherwise
//! the transform there is an artifact of slope noise (level overshoots of
//! size ~1/density, near-vertical interiors that collapse the next stage's
//! design). Checks the median sd-to-density ratio at the inversion points
//! of the stage's target quantiles.
bool IlprPolicy::transform_informative(const TransformEstimate& t) const
{
    if (buffer_m_.empty() || t.diag_density.empty())
        return true;
    std::vector<double> targets;
    targets.reserve(buffer_m_.size());
    for (double m : buffer_m_)
        targets.push_back(-m);
    std::sort(targets.begin(), targets.end());

    const int quantiles = 21;
    std::vector<double> ratios;
    ratios.reserve(quantiles);
    double step = (t.z_hi - t.z_lo) / static_cast<double>(t.grid.size() - 1);
    for (int k = 0; k < quantiles; ++k) {
        double q = static_cast<double>(k) / (quantiles - 1);
        double target = targets[static_cast<std::size_t>(q * (targets.size() - 1))];
        double z = std::clamp(invert(t, target).z, t.z_lo, t.z_hi);
        auto idx = static_cast<std::size_t>(std::lround((z - t.z_lo) / step));
        idx = std::min(idx, t.diag_density.size() - 1);
        // diag_density is floored at density_floor, so strictly positive
        ratios.push_back(t.diag_density_sd[idx] / t.diag_density[idx]);
    }
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    return ratios[ratios.size() / 2] <= 1.0;
}

void IlprPolicy::refit(PerturbStage stage)
{
    bool ok = false;
    try {
        TransformEstimate t = build_transform(buffer_, stage);
        if (transform_prices_buffer(t) && transform_informative(t)) {
            transform_ = std::move(t);
            ok = true;
        }
    } catch (const std::exception&) {
        // fall through to the failure path below
    }
    if (ok)
        return;
    ++refit_failures_; // previous transform (if any) stays in force
    // An uninformative stage (every outcome identical, the design collapsed
    // to a point, or nearly every price hit a clamp) means the retained rule
    // reproduces the same degenerate data forever; drop it and re-explore
    // uniformly for one stage.
    bool all_same = true;
    double u_lo = buffer_.empty() ? 0.0 : buffer_[0].u, u_hi = u_lo;
    for (const auto& s : buffer_) {
        if (s.y != buffer_[0].y)
            all_same = false;
        u_lo = std::min(u_lo, s.u);
        u_hi = std::max(u_hi, s.u);
    }
    bool mostly_clamped =
        10 * stage_clamped_ > 9 * static_cast<long>(buffer_.size());
    if (!buffer_.empty() && (all_same || u_hi - u_lo < 1e-6 || mostly_clamped))
        transform_.reset();
}

void IlprPolicy::advance_stage()
{
    if (mode_ == IlprMode::initial_stage) {
        refit(PerturbStage::initial);
        mode_ = IlprMode::refinement;
        stage_index_ = 1;
    } else {
        refit(PerturbStage::refinement);
        ++stage_index_;
    }
    stage_target_ = stage_length(stage_index_);
    buffer_.clear();
    buffer_m_.clear();
    stage_clamped_ = 0;
}

void IlprPolicy::install_transform(TransformEstimate t)
{
    transform_ = std::move(t);
    mode_ = IlprMode::refinement;
    if (stage_index_ == 0)
        stage_index_ = 1;
    stage_target_ = std::numeric_limits<long>::max(); // freeze the schedule
    buffer_.clear();
    buffer_m_.clear();
    stage_clamped_ = 0;
}

KernelBaselinePolicy::KernelBaselinePolicy(
    KernelBaselineConfig cfg, std::uint64_t seed,
    std::function<double(const std::vector<double>&)> known_m)
    : cfg_(cfg), rng_(seed), known_m_(std::move(known_m))
{
    if (cfg_.know_utility && !known_m_)
        throw std::invalid_argument("kernel: known utility requires a utility function");
    episode_len_ = cfg_.episode_base;
    n_exp_ = exploration_count(episode_len_);
}

long KernelBaselinePolicy::exploration_count(long episode_len) const
{
    double alpha = cfg_.know_utility
                       ? 0.5
                       : (2.0 * cfg_.beta + 1.0) / (4.0 * cfg_.beta - 1.0);
    double n = std::floor(cfg_.explore_c * std::pow(static_cast<double>(episode_len), alpha));
    return std::min(episode_len, std::max<long>(1, static_cast<long>(n)));
}

double KernelBaselinePolicy::mhat(const std::vector<double>& x) const
{
    if (cfg_.know_utility)
        return known_m_(x);
    double m = m_hat_.intercept;
    std::size_t d = std::min(x.size(), m_hat_.theta_hat.size());
    for (std::size_t j = 0; j < d; ++j)
        m += m_hat_.theta_hat[j] * x[j];
    return m;
}

void KernelBaselinePolicy::fit()
{
    fitted_ = true;
    long n = static_cast<long>(pool_p_.size());
    if (n < 2)
        return;
    if (!cfg_.know_utility) {
        try {
            m_hat_ = ols_binary(pool_x_, pool_y_, cfg_.p_max, n);
            have_m_hat_ = true;
        } catch (const std::exception&) {
            if (!have_m_hat_)
                return; // no usable utility estimate yet: keep exploring prices
        }
    }

    std::vector<double> u(n);
    double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
    for (long i = 0; i < n; ++i) {
        u[i] = pool_p_[i] - mhat(pool_x_[i]);
        u_lo = std::min(u_lo, u[i]);
        u_hi = std::max(u_hi, u[i]);
    }
    if (u_hi - u_lo < 1e-6)
        return;

    double b = cfg_.bandwidth_scale *
               std::pow(static_cast<double>(n), -1.0 / (2.0 * cfg_.beta + 1.0));
    std::vector<double> g = linspace(u_lo, u_hi, cfg_.grid_n);
    std::vector<double> cdf(g.size()), deriv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        double hsum = 0, fsum = 0, hdsum = 0, fdsum = 0;
        for (long i = 0; i < n; ++i) {
            double s = (u[i] - g[k]) / b;
            double w = epanechnikov(s);
            double wd = epanechnikov_deriv(s);
            fsum += w;
            hsum += w * pool_y_[i];
            fdsum += wd;
            hdsum += wd * pool_y_[i];
        }
        double nb = static_cast<double>(n) * b;
        double fhat = std::max(fsum / nb, cfg_.density_floor);
        double hhat = hsum / nb;
        double fdhat = -fdsum / (nb * b);
        double hdhat = -hdsum / (nb * b);
        cdf[k] = std::clamp(1.0 - hhat / fhat, 0.0, 1.0);
        deriv[k] = -(hdhat * fhat - fdhat * hhat) / (fhat * fhat);
    }
    grid_ = std::move(g);
    f_cdf_ = std::move(cdf);
    f_deriv_ = std::move(deriv);
}

double KernelBaselinePolicy::next_price(const std::vector<double>& x)
{
    if (pos_ < n_exp_)
        return rng_.uniform(cfg_.p_min, cfg_.p_max);
    if (!fitted_)
        fit();
    if (grid_.empty() || (!cfg_.know_utility && !have_m_hat_))
        return rng_.uniform(cfg_.p_min, cfg_.p_max);

    double m = mhat(x);
    double p = 0.5 * (cfg_.p_min + cfg_.p_max);
    for (int it = 0; it < 200; ++it) {
        double u = p - m;
        double fv = interp_linear(grid_, f_cdf_, u);
        double fd = std::max(interp_linear(grid_, f_deriv_, u), cfg_.density_floor);
        double target = m + (1.0 - fv) / fd;
        double pn = std::clamp(p + cfg_.root_step * (target - p), cfg_.p_min, cfg_.p_max);
        bool done = std::abs(pn - p) < 1e-6;
        p = pn;
        if (done)
            break;
    }
    return p;
}

void KernelBaselinePolicy::observe(const std::vector<double>& x, double p, bool y)
{
    if (pos_ < n_exp_) {
        pool_x_.push_back(x);
        pool_p_.push_back(p);
        pool_y_.push_back(y ? 1.0 : 0.0);
    }
    ++pos_;
    if (pos_ >= episode_len_) {
        episode_len_ *= 2;
        pos_ = 0;
        n_exp_ = exploration_count(episode_len_);
        fitted_ = false;
    }
}

DipPolicy::DipPolicy(DipConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed)
{
    init_remaining_ = 1L << cfg_.init_exponent;
    episode_exp_ = cfg_.init_exponent;
}

int DipPolicy::bin_count(long episode_len) const
{
    double root = std::ceil(std::pow(static_cast<double>(episode_len), 1.0 / 6.0));
    return std::max(2, static_cast<int>(std::floor(20.0 * root)));
}

void DipPolicy::start_episode(long len)
{
    episode_len_ = len;
    pos_ = 0;
    int nb = bin_count(len);
    double range = cfg_.p_max - cfg_.p_min;
    centers_.resize(nb);
    for (int i = 0; i < nb; ++i)
        centers_[i] = cfg_.p_min + (i + 0.5) * range / nb;
    rev_sum_.assign(nb, 0.0);
    count_.assign(nb, 0);
}

double DipPolicy::next_price(const std::vector<double>&)
{
    if (init_remaining_ > 0) {
        last_bin_ = -1;
        return rng_.uniform(cfg_.p_min, cfg_.p_max);
    }
    double logt = std::log(static_cast<double>(t_ + 1));
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        double denom = static_cast<double>(count_[i]) + cfg_.ridge;
        double score = rev_sum_[i] / denom + cfg_.ucb_c * std::sqrt(logt / denom);
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(i);
        }
    }
    last_bin_ = best;
    return centers_[best];
}

void DipPolicy::observe(const std::vector<double>&, double p, bool y)
{
    ++t_;
    if (init_remaining_ > 0) {
        --init_remaining_;
        if (init_remaining_ == 0)
            start_episode(1L << episode_exp_);
        return;
    }
    int idx = last_bin_;
    if (idx < 0) { // defensive: price not produced by this policy
        double range = cfg_.p_max - cfg_.p_min;
        double rel = (p - cfg_.p_min) / range * static_cast<double>(centers_.size());
        idx = std::clamp(static_cast<int>(rel), 0, static_cast<int>(centers_.size()) - 1);
    }
    ++count_[idx];
    rev_sum_[idx] += y ? p : 0.0;
    ++pos_;
    if (pos_ >= episode_len_) {
        ++episode_exp_;
        start_episode(1L << episode_exp_);
    }
}

} // namespace pricelab
