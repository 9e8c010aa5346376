#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "pricelab/local_poly.hpp"

namespace pricelab {

//! Rates and clips for post-smoothing and boundary handling.
struct SmoothingConfig {
    double beta = 2.0;     // smoothness order driving the rates
    double c_delta = 2.5;  // post-smoothing bandwidth constant
    double kappa = 0.0;    // boundary-sensitivity exponent
    double c_v = 3.0;      // boundary-fraction constant
    double delta_clip_fraction = 0.10; // cap on delta as a fraction of the design range
    double v_clip_lo = 0.0;
    double v_clip_hi = 0.01;
    bool add_eps_m_to_delta = false; // include the utility-error term in delta
};

enum class PerturbStage { initial, refinement };

//! Monotone pricing-transform estimate with linear extrapolation arms.
//!
//! Stored as grid values on [z_lo, z_hi]; outside the knots [v1, v2] the
//! function is exactly linear with slope arm_slope = c1 / 2, anchored at the
//! knot values, which keeps it surjective and invertible for every target.
struct TransformEstimate {
    std::vector<double> grid;
    std::vector<double> phi_values;
    double z_lo = 0.0, z_hi = 0.0;
    double v = 0.0;
    double v1 = 0.0, v2 = 0.0;
    double phi_v1 = 0.0, phi_v2 = 0.0;
    double c1 = 0.0;
    double arm_slope = 0.0;
    bool projected = false;

    // evaluation polyline clipped to [v1, v2]: nodes [v1, inner grid..., v2],
    // continuous against the arms at the knots
    std::vector<double> eval_grid;
    std::vector<double> eval_values;

    // fit diagnostics on `grid`: the density estimate behind the transform
    // and its sandwich standard error, for vetting refits
    std::vector<double> diag_density;
    std::vector<double> diag_density_sd;

    double eval(double z) const;
};

struct InvertResult {
    double z = 0.0;
    bool clamped = false; // z fell outside [z_lo, z_hi]
};

//! phi(u) = u - (1 - F(u)) / F'(u). Throws std::domain_error when F'(u) <= 0.
double phi_true(double u, const std::function<double(double)>& cdf,
                const std::function<double(double)>& density);

//! Plug-in transform on the estimate's grid; the curve's density flooring
//! guarantees a positive denominator.
std::vector<double> phi_initial(const CurveEstimate& curve);

//! Location-dependent smoothing bandwidth
//!   delta(u) = c_delta * n^{-(beta-1)/(2beta+1)} * sqrt(log T / alpha(u)^kappa)
//! with alpha(u) the relative distance to the nearer edge of [z_lo, z_hi],
//! clamped to delta_clip_fraction * (z_hi - z_lo).
//! Throws std::domain_error unless z_lo < u < z_hi.
double variable_bandwidth(double u, double z_lo, double z_hi, long n, long horizon,
                          double eps_m, const SmoothingConfig& cfg);

//! Boundary fraction
//!   v = (c_v^2 * n^{-(beta-1)/(2beta+1)} * log^{1/2} T)^{2/(kappa+2)} + c_v * eps_m
//! clipped to [v_clip_lo, v_clip_hi].
double boundary_fraction(long n, long horizon, double eps_m, const SmoothingConfig& cfg);

//! Convolution smoothing with the Epanechnikov kernel at location-dependent
//! bandwidths: normalized trapezoid quadrature on 65 symmetric nodes per grid
//! point, linear extrapolation of the input beyond its grid, identity when the
//! bandwidth falls below one grid step.
std::vector<double> post_smooth(const std::vector<double>& grid,
                                const std::vector<double>& phi_i,
                                const std::function<double(double)>& bandwidth_fn);

//! Half the 10th-percentile finite-difference slope on [v1, v2], floored.
double default_c1(const std::vector<double>& grid, const std::vector<double>& phi_s,
                  double v1, double v2, double floor = 0.05);

//! Boundary perturbation. Refinement stage: keeps phi_s on [v1, v2] with
//! v1 = z_lo + v (z_hi - z_lo), v2 = z_lo + (1 - v)(z_hi - z_lo), and replaces
//! it outside by lines of slope c1/2 through the knot values. Initial stage:
//! adds the tilt b0 (1 - 2 xt), xt the position rescaled to [0, 1] over
//! [z_lo, z_hi], with the same arms beyond the knots (v is forced to 0).
TransformEstimate perturb(const std::vector<double>& grid,
                          const std::vector<double>& phi_s, double z_lo, double z_hi,
                          double v, double c1, PerturbStage stage, double b0 = 0.0);

//! Pool-adjacent-violators least-squares projection onto nondecreasing
//! sequences, then a cumulative 1e-9 per-step ramp for strict increase.
std::vector<double> monotone_project(const std::vector<double>& values);

//! Projects the interior (knot-to-knot) values of a perturbed transform and
//! re-anchors the arms at the projected knot values, so phi_values are
//! strictly increasing while the arm slopes stay exactly c1/2.
void finalize_monotone(TransformEstimate& t);

//! Solves phi(z) = target. Targets beyond the knot values resolve on the
//! arms in closed form; interior targets by bisection over grid cells plus
//! the in-cell linear solve, accurate to well below 1e-10 in z.
InvertResult invert(const TransformEstimate& t, double target);

} // namespace pricelab
