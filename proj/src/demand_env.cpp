#include "pricelab/demand_env.hpp"

#include <algorithm>
#include <cmath>

#include "pricelab/local_poly.hpp"

namespace pricelab {

double smoothstep9(double t)
{
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return ((((70.0 * t - 315.0) * t + 540.0) * t - 420.0) * t + 126.0) * t * t * t * t * t;
}

double smoothstep9_deriv(double t)
{
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double a = t * (1.0 - t);
    return 630.0 * a * a * a * a;
}

double bump(double s)
{
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

double bump_deriv(double s)
{
    if (std::abs(s) >= 1.0) return 0.0;
    double d = 1.0 - s * s;
    return bump(s) * (-2.0 * s / (d * d));
}

double SyntheticCdf::cdf(double u) const
{
    double t = (u - cfg.rise_lo) / (cfg.rise_hi - cfg.rise_lo);
    double v = smoothstep9(t);
    for (std::size_t k = 0; k < centers.size(); ++k)
        v += signs[k] * amplitude * bump((u - centers[k]) / cfg.bump_half_width);
    return std::clamp(v, 0.0, 1.0);
}

double SyntheticCdf::density(double u) const
{
    double t = (u - cfg.rise_lo) / (cfg.rise_hi - cfg.rise_lo);
    double v = smoothstep9_deriv(t) / (cfg.rise_hi - cfg.rise_lo);
    for (std::size_t k = 0; k < centers.size(); ++k)
        v += signs[k] * (amplitude / cfg.bump_half_width) *
             bump_deriv((u - centers[k]) / cfg.bump_half_width);
    return std::max(v, 0.0);
}

SyntheticCdf build_synthetic_cdf(const SyntheticCdfConfig& cfg)
{
    if (!(cfg.rise_lo < cfg.rise_hi) || !(cfg.support_lo <= cfg.rise_lo) ||
        !(cfg.rise_hi <= cfg.support_hi))
        throw std::invalid_argument("synthetic cdf: rise interval must sit inside support");
    if (cfg.bump_half_width <= 0.0 || cfg.n_bumps < 0 || cfg.rho < 0.0 || cfg.beta <= 1.0)
        throw std::invalid_argument("synthetic cdf: bad bump parameters");

    SyntheticCdf out;
    out.cfg = cfg;
    out.amplitude = cfg.rho * std::pow(cfg.bump_half_width, cfg.beta);
    for (int k = 0; k < cfg.n_bumps; ++k) {
        double c = cfg.n_bumps == 1
                       ? 0.5 * (cfg.center_lo + cfg.center_hi)
                       : cfg.center_lo +
                             (cfg.center_hi - cfg.center_lo) * k / (cfg.n_bumps - 1);
        out.centers.push_back(c);
        out.signs.push_back(k % 2 == 0 ? 1.0 : -1.0);
    }

    const int n = DemandEnvironment::dense_grid_points;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = cfg.support_lo + (cfg.support_hi - cfg.support_lo) * i / (n - 1);
        double f = out.cdf(u);
        if (i > 0 && f < prev - 1e-12)
            throw std::invalid_argument(
                "synthetic cdf: F not monotone after clipping (amplitude too large)");
        prev = f;
    }
    return out;
}

double UtilityModel::eval(const std::vector<double>& x) const
{
    if (x.size() != theta.size())
        throw std::invalid_argument("utility: context dimension mismatch");
    double m = intercept;
    for (std::size_t j = 0; j < theta.size(); ++j) m += theta[j] * x[j];
    return m;
}

std::size_t ContextDist::dim() const
{
    if (kind == Kind::uniform_box) return lo.size();
    return pool.empty() ? 0 : pool.front().size();
}

std::vector<double> ContextDist::draw(Rng& rng) const
{
    if (kind == Kind::uniform_box) {
        std::vector<double> x(lo.size());
        for (std::size_t j = 0; j < lo.size(); ++j) x[j] = rng.uniform(lo[j], hi[j]);
        return x;
    }
    if (pool.empty()) throw std::invalid_argument("context pool is empty");
    return pool[rng.uniform_index(pool.size())];
}

DemandEnvironment::DemandEnvironment(SyntheticCdf noise, UtilityModel utility,
                                     ContextDist contexts, double p_min, double p_max)
    : smooth_density_(true),
      utility_(std::move(utility)),
      contexts_(std::move(contexts)),
      p_min_(p_min),
      p_max_(p_max)
{
    if (!(p_min_ < p_max_)) throw std::invalid_argument("price range empty");
    const int n = dense_grid_points;
    grid_.resize(n);
    cdf_.resize(n);
    density_.resize(n);
    for (int i = 0; i < n; ++i) {
        grid_[i] = noise.cfg.support_lo +
                   (noise.cfg.support_hi - noise.cfg.support_lo) * i / (n - 1);
        cdf_[i] = noise.cdf(grid_[i]);
        density_[i] = noise.density(grid_[i]);
    }
}

DemandEnvironment::DemandEnvironment(std::vector<double> noise_grid,
                                     std::vector<double> noise_cdf, UtilityModel utility,
                                     ContextDist contexts, double p_min, double p_max)
    : grid_(std::move(noise_grid)),
      cdf_(std::move(noise_cdf)),
      smooth_density_(false),
      utility_(std::move(utility)),
      contexts_(std::move(contexts)),
      p_min_(p_min),
      p_max_(p_max)
{
    if (!(p_min_ < p_max_)) throw std::invalid_argument("price range empty");
    if (grid_.size() != cdf_.size() || grid_.size() < 2)
        throw std::invalid_argument("tabulated noise: bad grid");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (i > 0 && (grid_[i] <= grid_[i - 1] || cdf_[i] < cdf_[i - 1] - 1e-12))
            throw std::invalid_argument("tabulated noise: grid or cdf not monotone");
        if (cdf_[i] < -1e-9 || cdf_[i] > 1.0 + 1e-9)
            throw std::invalid_argument("tabulated noise: cdf outside [0, 1]");
    }
    if (std::abs(cdf_.front()) > 1e-9 || std::abs(cdf_.back() - 1.0) > 1e-9)
        throw std::invalid_argument("tabulated noise: cdf must run from 0 to 1");
    cdf_.front() = 0.0;
    cdf_.back() = 1.0;
    // piecewise-constant density from finite differences, for diagnostics
    density_.assign(grid_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        double slope = (cdf_[i + 1] - cdf_[i]) / (grid_[i + 1] - grid_[i]);
        density_[i] = std::max(density_[i], slope);
        density_[i + 1] = std::max(density_[i + 1], slope);
    }
}

double DemandEnvironment::noise_cdf(double u) const
{
    return interp_linear(grid_, cdf_, u);
}

double DemandEnvironment::noise_density(double u) const
{
    return interp_linear(grid_, density_, u);
}

double DemandEnvironment::purchase_prob(const std::vector<double>& x, double p) const
{
    return 1.0 - noise_cdf(p - utility_.eval(x));
}

double DemandEnvironment::grid_search_price(double m) const
{
    constexpr int n = 2048;
    double best_p = p_min_, best_r = -1.0;
    for (int i = 0; i < n; ++i) {
        double p = p_min_ + (p_max_ - p_min_) * i / (n - 1);
        double r = revenue(m, p);
        if (r > best_r) {
            best_r = r;
            best_p = p;
        }
    }
    double cell = (p_max_ - p_min_) / (n - 1);
    double lo = std::max(p_min_, best_p - cell);
    double hi = std::min(p_max_, best_p + cell);
    for (int it = 0; it < 100; ++it) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (revenue(m, m1) < revenue(m, m2))
            lo = m1;
        else
            hi = m2;
    }
    double refined = 0.5 * (lo + hi);
    return revenue(m, refined) >= best_r ? refined : best_p;
}

std::optional<double> DemandEnvironment::transform_route_price(double m) const
{
    if (!smooth_density_) return std::nullopt;

    // phi(u) = u - (1 - F(u)) / f(u) at dense nodes with positive density;
    // candidate prices come from the roots of phi(u) = -m plus the endpoints
    auto phi_tilde = [&](double u) {
        return u - (1.0 - noise_cdf(u)) / noise_density(u);
    };

    std::vector<double> candidates{p_min_, p_max_};
    double prev_phi = 0.0;
    bool prev_ok = false;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (density_[i] <= 1e-12) {
            prev_ok = false;
            continue;
        }
        double cur = grid_[i] - (1.0 - cdf_[i]) / density_[i];
        if (prev_ok && (prev_phi + m) * (cur + m) <= 0.0) {
            double lo = grid_[i - 1], hi = grid_[i];
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                if ((phi_tilde(lo) + m) * (phi_tilde(mid) + m) <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            candidates.push_back(std::clamp(m + 0.5 * (lo + hi), p_min_, p_max_));
        }
        prev_phi = cur;
        prev_ok = true;
    }
    if (candidates.size() == 2 && density_.front() <= 1e-12 && density_.back() <= 1e-12 &&
        std::none_of(density_.begin(), density_.end(),
                     [](double f) { return f > 1e-12; }))
        return std::nullopt;

    double best_p = candidates.front(), best_r = -1.0;
    for (double p : candidates) {
        double r = revenue(m, p);
        if (r > best_r) {
            best_r = r;
            best_p = p;
        }
    }
    return best_p;
}

double DemandEnvironment::oracle_price_for_utility(double m) const
{
    double via_grid = grid_search_price(m);
    std::optional<double> via_transform = transform_route_price(m);
    if (via_transform && std::abs(*via_transform - via_grid) > 1e-3)
        throw std::logic_error("oracle price routes disagree beyond 1e-3");
    return via_grid;
}

double DemandEnvironment::oracle_price(const std::vector<double>& x) const
{
    return oracle_price_for_utility(utility_.eval(x));
}

std::pair<double, double> DemandEnvironment::utility_range() const
{
    if (contexts_.kind == ContextDist::Kind::uniform_box) {
        double lo = utility_.intercept, hi = utility_.intercept;
        for (std::size_t j = 0; j < utility_.theta.size(); ++j) {
            double a = utility_.theta[j] * contexts_.lo[j];
            double b = utility_.theta[j] * contexts_.hi[j];
            lo += std::min(a, b);
            hi += std::max(a, b);
        }
        return {lo, hi};
    }
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& row : contexts_.pool) {
        double m = utility_.eval(row);
        if (first || m < lo) lo = m;
        if (first || m > hi) hi = m;
        first = false;
    }
    if (first) throw std::invalid_argument("context pool is empty");
    return {lo, hi};
}

void DemandEnvironment::ensure_oracle_table() const
{
    std::call_once(oracle_->once, [this] { build_oracle_table(); });
}

void DemandEnvironment::build_oracle_table() const
{
    auto [m_lo, m_hi] = utility_range();
    if (m_hi - m_lo < 1e-12) {
        oracle_->m = {m_lo};
        oracle_->p = {grid_search_price(m_lo)};
        return;
    }

    constexpr int n = 4097;
    oracle_->m.resize(n);
    oracle_->p.resize(n);
    bool transform_ok = smooth_density_;
    for (int i = 0; i < n && transform_ok; ++i) {
        double m = m_lo + (m_hi - m_lo) * i / (n - 1);
        auto p = transform_route_price(m);
        if (!p) {
            transform_ok = false;
            break;
        }
        oracle_->m[i] = m;
        oracle_->p[i] = *p;
    }
    if (transform_ok) {
        // spot-check the transform route against the grid route
        for (int k = 0; k < 17; ++k) {
            int i = static_cast<int>(static_cast<long>(k) * (n - 1) / 16);
            if (std::abs(oracle_->p[i] - grid_search_price(oracle_->m[i])) > 1e-3) {
                transform_ok = false;
                break;
            }
        }
    }
    if (!transform_ok) {
        for (int i = 0; i < n; ++i) {
            double m = m_lo + (m_hi - m_lo) * i / (n - 1);
            oracle_->m[i] = m;
            oracle_->p[i] = grid_search_price(m);
        }
    }

    // subdivide cells where the oracle price jumps between optima branches
    double base_step = (m_hi - m_lo) / (n - 1);
    for (int pass = 0; pass < 20; ++pass) {
        std::vector<double> add_m;
        for (std::size_t i = 0; i + 1 < oracle_->m.size(); ++i) {
            if (std::abs(oracle_->p[i + 1] - oracle_->p[i]) > 10.0 * base_step &&
                oracle_->m[i + 1] - oracle_->m[i] > 1e-9)
                add_m.push_back(0.5 * (oracle_->m[i] + oracle_->m[i + 1]));
        }
        if (add_m.empty()) break;
        for (double m : add_m) {
            double p = grid_search_price(m);
            if (transform_ok)
                if (auto tp = transform_route_price(m)) p = *tp;
            auto it = std::upper_bound(oracle_->m.begin(), oracle_->m.end(), m);
            std::size_t idx = static_cast<std::size_t>(it - oracle_->m.begin());
            oracle_->m.insert(it, m);
            oracle_->p.insert(oracle_->p.begin() + idx, p);
        }
    }
}

std::pair<double, double> DemandEnvironment::cached_best(double m) const
{
    ensure_oracle_table();

    // candidate prices from the enclosing table cell; revenue evaluated
    // exactly so interpolation error enters regret only quadratically
    if (oracle_->m.size() == 1) {
        double p = oracle_->p.front();
        return {p, revenue(m, p)};
    }
    double mc = std::clamp(m, oracle_->m.front(), oracle_->m.back());
    auto it = std::upper_bound(oracle_->m.begin(), oracle_->m.end(), mc);
    std::size_t hi = std::min<std::size_t>(
        std::max<std::size_t>(it - oracle_->m.begin(), 1), oracle_->m.size() - 1);
    std::size_t lo = hi - 1;
    double t = (mc - oracle_->m[lo]) / (oracle_->m[hi] - oracle_->m[lo]);
    double cand[3] = {oracle_->p[lo], oracle_->p[hi],
                      oracle_->p[lo] + t * (oracle_->p[hi] - oracle_->p[lo])};
    double best_p = cand[0];
    double best_r = revenue(m, cand[0]);
    for (int k = 1; k < 3; ++k) {
        double r = revenue(m, cand[k]);
        if (r > best_r) {
            best_r = r;
            best_p = cand[k];
        }
    }
    return {best_p, best_r};
}

double DemandEnvironment::oracle_price_cached(double m) const
{
    return cached_best(m).first;
}

OutcomeRecord DemandEnvironment::step(const std::vector<double>& x, double p,
                                      Rng& rng) const
{
    double m = utility_.eval(x);
    auto [best_p, best_r] = cached_best(m);

    OutcomeRecord rec;
    rec.price = p;
    rec.oracle_price = best_p;
    rec.purchased = rng.bernoulli(purchase_prob(x, p));
    rec.regret_increment = best_r - revenue(m, p);
    return rec;
}

} // namespace pricelab
