#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pricelab/rng.hpp"

namespace pricelab {

//! Quintic-through-ninth-order smoothstep: 0 below 0, 1 above 1, and
//! 70 t^9 - 315 t^8 + 540 t^7 - 420 t^6 + 126 t^5 in between (C^4 at the ends).
double smoothstep9(double t);
double smoothstep9_deriv(double t);

//! C-infinity bump exp(-1 / (1 - s^2)) on (-1, 1), zero outside.
double bump(double s);
double bump_deriv(double s);

//! Market-noise CDF family: a smoothstep base rising on [rise_lo, rise_hi]
//! plus n_bumps alternating-sign bumps of amplitude rho * half_width^beta at
//! centers equally spaced in [center_lo, center_hi].
struct SyntheticCdfConfig {
    double beta = 2.0;
    int n_bumps = 10;
    double bump_half_width = 1.0 / 45.0;
    double rho = 5.0;
    double center_lo = -0.2;
    double center_hi = 0.2;
    double rise_lo = -0.25;
    double rise_hi = 0.25;
    double support_lo = -0.3;
    double support_hi = 0.3;
};

struct SyntheticCdf {
    SyntheticCdfConfig cfg;
    double amplitude = 0.0; // rho * half_width^beta
    std::vector<double> centers;
    std::vector<double> signs; // (-1)^k, k = 0..n_bumps-1

    double cdf(double u) const;     // clipped to [0, 1]
    double density(double u) const; // floored at 0
};

//! Validates the configuration and checks monotonicity of the clipped CDF on
//! a 4096-point grid; throws std::invalid_argument when the amplitude is too
//! large for the base density.
SyntheticCdf build_synthetic_cdf(const SyntheticCdfConfig& cfg);

//! Linear valuation m(x) = theta . x + intercept.
struct UtilityModel {
    std::vector<double> theta;
    double intercept = 0.0;

    double eval(const std::vector<double>& x) const;
};

//! Context sampler: product box (interval when 1-d) or empirical pool.
struct ContextDist {
    enum class Kind { uniform_box, empirical_pool };
    Kind kind = Kind::uniform_box;
    std::vector<double> lo, hi;            // uniform_box
    std::vector<std::vector<double>> pool; // empirical_pool

    std::size_t dim() const;
    std::vector<double> draw(Rng& rng) const;
};

struct OutcomeRecord {
    double price = 0.0;
    bool purchased = false;
    double regret_increment = 0.0;
    double oracle_price = 0.0;
};

//! Single-product market: binary demand P(y = 1 | x, p) = 1 - F(p - m(x)).
//!
//! F and its density are evaluated by linear interpolation on a dense
//! internal grid. For synthetic noise the density is smooth and the oracle
//! price is computed two ways (first-order-condition roots via the pricing
//! transform, and a 2048-point grid search with local ternary refinement)
//! with agreement asserted within 1e-3; tabulated noise uses the grid route.
class DemandEnvironment {
public:
    static constexpr int dense_grid_points = 4096;

    DemandEnvironment(SyntheticCdf noise, UtilityModel utility, ContextDist contexts,
                      double p_min, double p_max);
    //! Tabulated noise CDF (calibrated models): grid and values with
    //! F = 0 / 1 at the padded support edges.
    DemandEnvironment(std::vector<double> noise_grid, std::vector<double> noise_cdf,
                      UtilityModel utility, ContextDist contexts, double p_min,
                      double p_max);

    double p_min() const { return p_min_; }
    double p_max() const { return p_max_; }
    double support_lo() const { return grid_.front(); }
    double support_hi() const { return grid_.back(); }
    const UtilityModel& utility() const { return utility_; }
    const ContextDist& contexts() const { return contexts_; }
    bool smooth_density() const { return smooth_density_; }

    double noise_cdf(double u) const;
    double noise_density(double u) const;
    double mean_utility(const std::vector<double>& x) const { return utility_.eval(x); }
    double purchase_prob(const std::vector<double>& x, double p) const;
    double revenue(double m, double p) const { return p * (1.0 - noise_cdf(p - m)); }

    std::vector<double> draw_context(Rng& rng) const { return contexts_.draw(rng); }

    //! Clairvoyant price for context x, dual-route checked.
    double oracle_price(const std::vector<double>& x) const;
    double oracle_price_for_utility(double m) const;
    //! Same price step() charges regret against; table lookup, no search.
    double oracle_price_cached(double m) const;

    //! Draws the purchase and charges regret against the cached oracle.
    //! Thread-safe; an environment can be shared across concurrent trials.
    OutcomeRecord step(const std::vector<double>& x, double p, Rng& rng) const;

    //! Range of m(x) over the context distribution (exact for boxes/pools).
    std::pair<double, double> utility_range() const;

private:
    std::vector<double> grid_, cdf_, density_;
    bool smooth_density_ = false;
    UtilityModel utility_;
    ContextDist contexts_;
    double p_min_ = 0.0, p_max_ = 1.0;

    // lazily built oracle-price table over the utility range; shared so the
    // environment stays copyable and movable
    struct OracleTable {
        std::once_flag once;
        std::vector<double> m, p;
    };
    std::shared_ptr<OracleTable> oracle_ = std::make_shared<OracleTable>();

    double grid_search_price(double m) const;
    std::optional<double> transform_route_price(double m) const;
    void ensure_oracle_table() const;
    void build_oracle_table() const;
    std::pair<double, double> cached_best(double m) const; // (price, revenue)
};

} // namespace pricelab
