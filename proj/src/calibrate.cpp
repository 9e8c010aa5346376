#include "pricelab/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"

#include "pricelab/local_poly.hpp"

namespace pricelab {

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

constexpr const char* sales_header =
    "product_id,date,price,units_ordered,weekday,competitor_max_price,"
    "competitor_min_price,stock_level";

double softplus(double a)
{
    return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a)));
}

//! Weighted pool-adjacent-violators projection onto nondecreasing sequences
//! (exact weighted block averages, no strictness ramp).
std::vector<double> pav_nondecreasing(const std::vector<double>& values,
                                      const std::vector<double>& weights)
{
    std::vector<double> level, wsum;
    std::vector<long> size;
    for (std::size_t i = 0; i < values.size(); ++i) {
        level.push_back(values[i]);
        wsum.push_back(weights[i]);
        size.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            double wa = wsum[wsum.size() - 2];
            double wb = wsum.back();
            level[level.size() - 2] =
                (level[level.size() - 2] * wa + level.back() * wb) / (wa + wb);
            wsum[wsum.size() - 2] += wb;
            size[size.size() - 2] += size.back();
            level.pop_back();
            wsum.pop_back();
            size.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t b = 0; b < level.size(); ++b)
        out.insert(out.end(), size[b], level[b]);
    return out;
}

} // namespace

std::vector<ProductDataset> parse_sales_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("sales csv: empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != sales_header)
        throw std::runtime_error("sales csv: unexpected header: " + line);

    std::vector<ProductDataset> out;
    long n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto f = split_csv_line(line);
        if (f.size() != 8)
            throw std::runtime_error("sales csv: line " + std::to_string(n) +
                                     ": expected 8 fields");
        SaleRow row;
        row.date = f[1];
        row.price = std::stod(f[2]);
        row.units_ordered = std::stol(f[3]);
        row.weekday = std::stoi(f[4]);
        row.competitor_max_price = std::stod(f[5]);
        row.competitor_min_price = std::stod(f[6]);
        row.stock_level = std::stod(f[7]);
        if (row.price <= 0)
            throw std::runtime_error("sales csv: line " + std::to_string(n) +
                                     ": nonpositive price");
        if (row.units_ordered < 0)
            throw std::runtime_error("sales csv: line " + std::to_string(n) +
                                     ": negative units");
        if (row.weekday < 0 || row.weekday > 6)
            throw std::runtime_error("sales csv: line " + std::to_string(n) +
                                     ": weekday outside 0..6");
        if (out.empty() || out.back().product_id != f[0]) {
            auto it = std::find_if(out.begin(), out.end(), [&](const ProductDataset& d) {
                return d.product_id == f[0];
            });
            if (it != out.end()) {
                it->rows.push_back(row);
                continue;
            }
            out.push_back({f[0], {}});
        }
        out.back().rows.push_back(row);
    }
    return out;
}

std::vector<ProductDataset> read_sales_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("sales csv: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sales_csv(buf.str());
}

std::vector<double> feature_vector(const SaleRow& row)
{
    std::vector<double> x(9, 0.0);
    if (row.weekday >= 1)
        x[row.weekday - 1] = 1.0;
    x[6] = row.competitor_max_price;
    x[7] = row.competitor_min_price;
    x[8] = row.stock_level;
    return x;
}

std::vector<ProductDataset> screen_products(const std::vector<ProductDataset>& datasets,
                                            long min_rows, double frac_lo,
                                            double frac_hi)
{
    std::vector<ProductDataset> kept;
    for (const auto& d : datasets) {
        long n = static_cast<long>(d.rows.size());
        if (n <= min_rows)
            continue;
        long purchases = std::count_if(d.rows.begin(), d.rows.end(),
                                       [](const SaleRow& r) { return r.units_ordered > 0; });
        double frac = static_cast<double>(purchases) / static_cast<double>(n);
        if (frac > frac_lo && frac < frac_hi)
            kept.push_back(d);
    }
    return kept;
}

RidgeLogisticFit fit_ridge_logistic(const std::vector<std::vector<double>>& features,
                                    const std::vector<double>& prices,
                                    const std::vector<int>& purchases, double ridge)
{
    const long n = static_cast<long>(features.size());
    if (n == 0 || prices.size() != features.size() || purchases.size() != features.size())
        throw std::invalid_argument("ridge logistic: empty or mismatched inputs");
    if (ridge < 0)
        throw std::invalid_argument("ridge logistic: negative ridge");
    const long d = static_cast<long>(features[0].size());

    Eigen::MatrixXd x(n, d);
    for (long i = 0; i < n; ++i) {
        if (static_cast<long>(features[i].size()) != d)
            throw std::invalid_argument("ridge logistic: ragged features");
        for (long j = 0; j < d; ++j)
            x(i, j) = features[i][j];
    }
    Eigen::VectorXd mu = x.colwise().mean();
    Eigen::VectorXd scale(d);
    for (long j = 0; j < d; ++j) {
        double var = (x.col(j).array() - mu(j)).square().mean();
        scale(j) = std::sqrt(var) > 1e-12 ? std::sqrt(var) : 1.0;
    }
    Eigen::MatrixXd z = (x.rowwise() - mu.transpose()).array().rowwise() /
                        scale.transpose().array();

    Eigen::VectorXd price(n), dvec(n);
    for (long i = 0; i < n; ++i) {
        price(i) = prices[i];
        dvec(i) = purchases[i] ? 1.0 : 0.0;
    }

    // w = [theta_std, c0]; eta = z w + c0 - p
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    auto objective = [&](const Eigen::VectorXd& wv) {
        double obj = 0.5 * ridge * wv.head(d).squaredNorm();
        Eigen::VectorXd eta = z * wv.head(d);
        eta.array() += wv(d);
        eta -= price;
        for (long i = 0; i < n; ++i)
            obj += dvec(i) ? softplus(-eta(i)) : softplus(eta(i));
        return obj;
    };

    double obj = objective(w);
    int it = 0;
    for (; it < 200; ++it) {
        Eigen::VectorXd eta = z * w.head(d);
        eta.array() += w(d);
        eta -= price;
        Eigen::VectorXd prob = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        Eigen::VectorXd resid = prob - dvec;

        Eigen::VectorXd grad(d + 1);
        grad.head(d) = z.transpose() * resid + ridge * w.head(d);
        grad(d) = resid.sum();
        if (grad.lpNorm<Eigen::Infinity>() < 1e-8)
            break;

        Eigen::VectorXd wt = (prob.array() * (1.0 - prob.array())).matrix();
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d + 1, d + 1);
        h.topLeftCorner(d, d) = z.transpose() * wt.asDiagonal() * z;
        h.topLeftCorner(d, d).diagonal().array() += ridge;
        Eigen::VectorXd zw = z.transpose() * wt;
        h.block(0, d, d, 1) = zw;
        h.block(d, 0, 1, d) = zw.transpose();
        h(d, d) = wt.sum();
        // optimum-neutral stabilizer: only the step direction is affected
        h.diagonal().array() += 1e-10;

        Eigen::VectorXd step = h.ldlt().solve(-grad);
        double t = 1.0;
        double next = objective(w + t * step);
        while (next > obj && t > 1e-10) {
            t *= 0.5;
            next = objective(w + t * step);
        }
        if (next > obj)
            break; // no descent direction left: gradient check decides below
        w += t * step;
        obj = next;
    }

    {
        Eigen::VectorXd eta = z * w.head(d);
        eta.array() += w(d);
        eta -= price;
        Eigen::VectorXd prob = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        Eigen::VectorXd resid = prob - dvec;
        Eigen::VectorXd grad(d + 1);
        grad.head(d) = z.transpose() * resid + ridge * w.head(d);
        grad(d) = resid.sum();
        if (grad.lpNorm<Eigen::Infinity>() >= 1e-8)
            throw std::runtime_error("ridge logistic: no convergence in 200 iterations");
    }

    RidgeLogisticFit fit;
    fit.theta.resize(d);
    fit.intercept = w(d);
    for (long j = 0; j < d; ++j) {
        fit.theta[j] = w(j) / scale(j);
        fit.intercept -= w(j) * mu(j) / scale(j);
    }
    fit.iterations = it;
    fit.penalized_nll = obj;
    return fit;
}

MonotoneCdf fit_monotone_cdf(const std::vector<double>& residuals,
                             const std::vector<int>& purchases, double sigma_steps,
                             int grid_n)
{
    const std::size_t n = residuals.size();
    if (n == 0 || purchases.size() != n)
        throw std::invalid_argument("monotone cdf: empty or mismatched inputs");
    if (!(sigma_steps > 0) || grid_n < 3)
        throw std::invalid_argument("monotone cdf: bad smoothing parameters");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return residuals[a] < residuals[b];
    });

    // collapse duplicate residuals into knots first: per-knot empirical
    // no-purchase rate with multiplicity weight, then weighted isotonic fit
    std::vector<double> knot_u, knot_rate, knot_w;
    std::size_t k = 0;
    while (k < n) {
        std::size_t j = k;
        double misses = 0.0;
        while (j < n && residuals[order[j]] == residuals[order[k]])
            misses += purchases[order[j++]] ? 0.0 : 1.0;
        knot_u.push_back(residuals[order[k]]);
        knot_rate.push_back(misses / static_cast<double>(j - k));
        knot_w.push_back(static_cast<double>(j - k));
        k = j;
    }
    std::vector<double> knot_f = pav_nondecreasing(knot_rate, knot_w);
    for (double& v : knot_f)
        v = std::clamp(v, 0.0, 1.0);

    double u_lo = knot_u.front(), u_hi = knot_u.back();
    double span = std::max(u_hi - u_lo, 1e-6);
    double step = span / (grid_n - 1);
    double sigma = sigma_steps * step;
    int pad = static_cast<int>(std::ceil(4.0 * sigma_steps));
    int n_tot = grid_n + 2 * pad;

    std::vector<double> grid(n_tot), raw(n_tot);
    for (int i = 0; i < n_tot; ++i) {
        grid[i] = u_lo + (i - pad) * step;
        raw[i] = interp_linear(knot_u, knot_f, grid[i]);
    }

    // Gaussian convolution with constant extension: shift-invariant weights
    // keep monotone inputs monotone exactly
    int radius = static_cast<int>(std::ceil(4.0 * sigma_steps));
    std::vector<double> wts(2 * radius + 1);
    double wsum = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        wts[j + radius] = std::exp(-0.5 * (j * step) * (j * step) / (sigma * sigma));
        wsum += wts[j + radius];
    }
    std::vector<double> smooth(n_tot);
    for (int i = 0; i < n_tot; ++i) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) {
            int idx = std::clamp(i + j, 0, n_tot - 1);
            acc += wts[j + radius] * raw[idx];
        }
        smooth[i] = acc / wsum;
    }

    double lo = smooth.front(), hi = smooth.back();
    if (hi - lo < 1e-12)
        throw std::runtime_error("monotone cdf: degenerate demand (flat survival)");
    for (double& v : smooth)
        v = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);

    return MonotoneCdf{std::move(grid), std::move(smooth), sigma};
}

CalibratedModel calibrate_product(const ProductDataset& data, double ridge,
                                  double sigma_steps, int grid_n)
{
    const std::size_t n = data.rows.size();
    if (n == 0)
        throw std::invalid_argument("calibrate: empty dataset");

    std::vector<std::vector<double>> x(n);
    std::vector<double> p(n);
    std::vector<int> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = feature_vector(data.rows[i]);
        p[i] = data.rows[i].price;
        d[i] = data.rows[i].units_ordered > 0 ? 1 : 0;
    }

    RidgeLogisticFit fit = fit_ridge_logistic(x, p, d, ridge);

    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        double m = fit.intercept;
        for (std::size_t j = 0; j < x[i].size(); ++j)
            m += fit.theta[j] * x[i][j];
        u[i] = p[i] - m;
    }
    MonotoneCdf cdf = fit_monotone_cdf(u, d, sigma_steps, grid_n);

    CalibratedModel model;
    model.product_id = data.product_id;
    model.theta = fit.theta;
    model.intercept = fit.intercept;
    model.grid = std::move(cdf.grid);
    model.cdf = std::move(cdf.values);
    model.smoothing_sigma = cdf.sigma;
    model.price_lo = *std::min_element(p.begin(), p.end());
    model.price_hi = *std::max_element(p.begin(), p.end());
    model.covariate_pool = std::move(x);
    return model;
}

std::string model_to_json(const CalibratedModel& model)
{
    nlohmann::json j;
    j["product_id"] = model.product_id;
    j["theta"] = model.theta;
    j["intercept"] = model.intercept;
    j["grid"] = model.grid;
    j["cdf"] = model.cdf;
    j["smoothing_sigma"] = model.smoothing_sigma;
    j["price_bounds"] = {model.price_lo, model.price_hi};
    j["covariate_pool"] = model.covariate_pool;
    return j.dump(2) + "\n";
}

CalibratedModel model_from_json(const std::string& text)
{
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        CalibratedModel m;
        m.product_id = j.at("product_id").get<std::string>();
        m.theta = j.at("theta").get<std::vector<double>>();
        m.intercept = j.at("intercept").get<double>();
        m.grid = j.at("grid").get<std::vector<double>>();
        m.cdf = j.at("cdf").get<std::vector<double>>();
        m.smoothing_sigma = j.at("smoothing_sigma").get<double>();
        auto bounds = j.at("price_bounds").get<std::vector<double>>();
        if (bounds.size() != 2)
            throw std::runtime_error("price_bounds must have two entries");
        m.price_lo = bounds[0];
        m.price_hi = bounds[1];
        m.covariate_pool = j.at("covariate_pool").get<std::vector<std::vector<double>>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("calibrated model json: ") + e.what());
    }
}

DemandEnvironment build_semireal_env(const CalibratedModel& model)
{
    UtilityModel utility{model.theta, model.intercept};
    ContextDist contexts;
    contexts.kind = ContextDist::Kind::empirical_pool;
    contexts.pool = model.covariate_pool;
    return DemandEnvironment(model.grid, model.cdf, std::move(utility),
                             std::move(contexts), model.price_lo, model.price_hi);
}

double semireal_eps_m(const CalibratedModel& model)
{
    double norm = 0.0;
    for (double t : model.theta)
        norm += t * t;
    return 0.05 * std::sqrt(norm) /
           std::sqrt(static_cast<double>(std::max<std::size_t>(model.covariate_pool.size(), 1)));
}

} // namespace pricelab
