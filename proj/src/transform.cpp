#include "pricelab/transform.hpp"

#include <algorithm>
#include <cmath>

#include "pricelab/kernels.hpp"

namespace pricelab {

namespace {

double rate_exponent(double beta) { return (beta - 1.0) / (2.0 * beta + 1.0); }

double extrapolate_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                          double x)
{
    const std::size_t n = xs.size();
    if (n == 1) return ys[0];
    if (x < xs.front()) {
        double s = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return ys[0] + s * (x - xs[0]);
    }
    if (x > xs.back()) {
        double s = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys[n - 1] + s * (x - xs[n - 1]);
    }
    return interp_linear(xs, ys, x);
}

} // namespace

double phi_true(double u, const std::function<double(double)>& cdf,
                const std::function<double(double)>& density)
{
    double f = density(u);
    if (f <= 0.0) throw std::domain_error("phi_true: density not positive");
    return u - (1.0 - cdf(u)) / f;
}

std::vector<double> phi_initial(const CurveEstimate& curve)
{
    std::vector<double> phi(curve.grid.size());
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        phi[i] = curve.grid[i] -
                 (1.0 - curve.cdf_values[i]) / curve.deriv_values[i];
    return phi;
}

double variable_bandwidth(double u, double z_lo, double z_hi, long n, long horizon,
                          double eps_m, const SmoothingConfig& cfg)
{
    if (!(z_lo < u && u < z_hi))
        throw std::domain_error("variable_bandwidth: u outside (z_lo, z_hi)");
    if (n < 1 || horizon < 2)
        throw std::invalid_argument("variable_bandwidth: need n >= 1, horizon >= 2");
    double range = z_hi - z_lo;
    double alpha = std::min(u - z_lo, z_hi - u) / range;
    double rate = std::pow(static_cast<double>(n), -rate_exponent(cfg.beta));
    double delta = cfg.c_delta * rate *
                   std::sqrt(std::log(static_cast<double>(horizon)) /
                             std::pow(alpha, cfg.kappa));
    if (cfg.add_eps_m_to_delta) delta += eps_m;
    return std::min(delta, cfg.delta_clip_fraction * range);
}

double boundary_fraction(long n, long horizon, double eps_m, const SmoothingConfig& cfg)
{
    if (n < 1 || horizon < 2)
        throw std::invalid_argument("boundary_fraction: need n >= 1, horizon >= 2");
    double rate = std::pow(static_cast<double>(n), -rate_exponent(cfg.beta));
    double raw = cfg.c_v * cfg.c_v * rate *
                 std::sqrt(std::log(static_cast<double>(horizon)));
    double v = std::pow(raw, 2.0 / (cfg.kappa + 2.0)) + cfg.c_v * eps_m;
    return std::clamp(v, cfg.v_clip_lo, cfg.v_clip_hi);
}

std::vector<double> post_smooth(const std::vector<double>& grid,
                                const std::vector<double>& phi_i,
                                const std::function<double(double)>& bandwidth_fn)
{
    if (grid.size() != phi_i.size() || grid.size() < 2)
        throw std::invalid_argument("post_smooth: bad grid");
    const double step = (grid.back() - grid.front()) / (grid.size() - 1);
    constexpr int m_nodes = 65; // odd, so the nodes are symmetric about zero

    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double delta = bandwidth_fn(grid[i]);
        if (!(delta > 0.0))
            throw std::domain_error("post_smooth: bandwidth must be positive");
        if (delta < step) { // window below grid resolution: nothing to smooth
            out[i] = phi_i[i];
            continue;
        }
        double num = 0.0, den = 0.0;
        for (int j = 0; j < m_nodes; ++j) {
            double s = -1.0 + 2.0 * j / (m_nodes - 1);
            double w = (j == 0 || j == m_nodes - 1) ? 0.5 : 1.0;
            double k = w * epanechnikov(s);
            if (k <= 0.0) continue;
            num += k * extrapolate_linear(grid, phi_i, grid[i] - delta * s);
            den += k;
        }
        out[i] = num / den;
    }
    return out;
}

double default_c1(const std::vector<double>& grid, const std::vector<double>& phi_s,
                  double v1, double v2, double floor)
{
    std::vector<double> slopes;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid[i] < v1 || grid[i + 1] > v2) continue;
        slopes.push_back((phi_s[i + 1] - phi_s[i]) / (grid[i + 1] - grid[i]));
    }
    if (slopes.empty())
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            slopes.push_back((phi_s[i + 1] - phi_s[i]) / (grid[i + 1] - grid[i]));
    std::sort(slopes.begin(), slopes.end());
    double pos = 0.10 * (slopes.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, slopes.size() - 1);
    double p10 = slopes[lo] + (pos - lo) * (slopes[hi] - slopes[lo]);
    return std::max(floor, 0.5 * p10);
}

double TransformEstimate::eval(double z) const
{
    if (z <= v1) return phi_v1 + arm_slope * (z - v1);
    if (z >= v2) return phi_v2 + arm_slope * (z - v2);
    return interp_linear(eval_grid, eval_values, z);
}

namespace {

void rebuild_eval_nodes(TransformEstimate& t)
{
    t.eval_grid.clear();
    t.eval_values.clear();
    t.eval_grid.push_back(t.v1);
    t.eval_values.push_back(t.phi_v1);
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
        if (t.grid[i] > t.v1 && t.grid[i] < t.v2) {
            t.eval_grid.push_back(t.grid[i]);
            t.eval_values.push_back(t.phi_values[i]);
        }
    }
    t.eval_grid.push_back(t.v2);
    t.eval_values.push_back(t.phi_v2);
}

} // namespace

TransformEstimate perturb(const std::vector<double>& grid,
                          const std::vector<double>& phi_s, double z_lo, double z_hi,
                          double v, double c1, PerturbStage stage, double b0)
{
    if (grid.size() != phi_s.size() || grid.size() < 2)
        throw std::invalid_argument("perturb: bad grid");
    if (!(z_hi > z_lo)) throw std::invalid_argument("perturb: empty design interval");
    if (c1 <= 0.0) throw std::invalid_argument("perturb: c1 must be positive");
    if (stage == PerturbStage::initial) v = 0.0;
    if (v < 0.0 || v >= 0.5) throw std::invalid_argument("perturb: v outside [0, 0.5)");

    TransformEstimate t;
    t.grid = grid;
    t.z_lo = z_lo;
    t.z_hi = z_hi;
    t.v = v;
    t.c1 = c1;
    t.arm_slope = 0.5 * c1;
    t.v1 = z_lo + v * (z_hi - z_lo);
    t.v2 = z_lo + (1.0 - v) * (z_hi - z_lo);

    auto interior = [&](double z) {
        double base = interp_linear(grid, phi_s, z);
        if (stage == PerturbStage::initial) {
            double xt = (z - z_lo) / (z_hi - z_lo);
            base += b0 * (1.0 - 2.0 * xt);
        }
        return base;
    };
    t.phi_v1 = interior(t.v1);
    t.phi_v2 = interior(t.v2);

    t.phi_values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double z = grid[i];
        if (z <= t.v1)
            t.phi_values[i] = t.phi_v1 + t.arm_slope * (z - t.v1);
        else if (z >= t.v2)
            t.phi_values[i] = t.phi_v2 + t.arm_slope * (z - t.v2);
        else
            t.phi_values[i] = interior(z);
    }
    rebuild_eval_nodes(t);
    return t;
}

std::vector<double> monotone_project(const std::vector<double>& values)
{
    // pool adjacent violators, least squares with equal weights
    std::vector<double> level;
    std::vector<std::size_t> size;
    for (double x : values) {
        level.push_back(x);
        size.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            double merged = (level[level.size() - 2] * size[size.size() - 2] +
                             level.back() * size.back()) /
                            (size[size.size() - 2] + size.back());
            size[size.size() - 2] += size.back();
            level[level.size() - 2] = merged;
            level.pop_back();
            size.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t b = 0; b < level.size(); ++b)
        out.insert(out.end(), size[b], level[b]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += 1e-9 * i;
    return out;
}

void finalize_monotone(TransformEstimate& t)
{
    // project knot values together with the strictly-interior grid values
    std::vector<std::size_t> inner;
    for (std::size_t i = 0; i < t.grid.size(); ++i)
        if (t.grid[i] > t.v1 && t.grid[i] < t.v2) inner.push_back(i);

    std::vector<double> seq;
    seq.reserve(inner.size() + 2);
    seq.push_back(t.phi_v1);
    for (std::size_t i : inner) seq.push_back(t.phi_values[i]);
    seq.push_back(t.phi_v2);
    seq = monotone_project(seq);

    t.phi_v1 = seq.front();
    t.phi_v2 = seq.back();
    for (std::size_t k = 0; k < inner.size(); ++k) t.phi_values[inner[k]] = seq[k + 1];
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
        if (t.grid[i] <= t.v1)
            t.phi_values[i] = t.phi_v1 + t.arm_slope * (t.grid[i] - t.v1);
        else if (t.grid[i] >= t.v2)
            t.phi_values[i] = t.phi_v2 + t.arm_slope * (t.grid[i] - t.v2);
    }
    rebuild_eval_nodes(t);
    t.projected = true;
}

InvertResult invert(const TransformEstimate& t, double target)
{
    InvertResult r;
    if (t.arm_slope <= 0.0) throw std::invalid_argument("invert: non-positive arm slope");
    if (target <= t.phi_v1) {
        r.z = t.v1 + (target - t.phi_v1) / t.arm_slope;
    } else if (target >= t.phi_v2) {
        r.z = t.v2 + (target - t.phi_v2) / t.arm_slope;
    } else {
        // bisection over polyline cells, then the exact solve inside the cell
        std::size_t lo = 0, hi = t.eval_grid.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (t.eval_values[mid] <= target)
                lo = mid;
            else
                hi = mid;
        }
        double y0 = t.eval_values[lo], y1 = t.eval_values[hi];
        double z;
        if (y1 > y0)
            z = t.eval_grid[lo] +
                (target - y0) / (y1 - y0) * (t.eval_grid[hi] - t.eval_grid[lo]);
        else
            z = 0.5 * (t.eval_grid[lo] + t.eval_grid[hi]);
        r.z = std::clamp(z, t.v1, t.v2);
    }
    r.clamped = (r.z < t.z_lo || r.z > t.z_hi);
    return r;
}

} // namespace pricelab
