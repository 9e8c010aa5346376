#pragma once

#include <string>
#include <vector>

#include "pricelab/demand_env.hpp"

namespace pricelab {

struct SaleRow {
    std::string date;
    double price = 0.0;
    long units_ordered = 0;
    int weekday = 0; // 0..6
    double competitor_max_price = 0.0;
    double competitor_min_price = 0.0;
    double stock_level = 0.0;
};

struct ProductDataset {
    std::string product_id;
    std::vector<SaleRow> rows;
};

//! Long-format CSV keyed by product_id with columns: product_id, date,
//! price, units_ordered, weekday, competitor_max_price,
//! competitor_min_price, stock_level.
std::vector<ProductDataset> read_sales_csv(const std::string& path);
std::vector<ProductDataset> parse_sales_csv(const std::string& text);

//! Nine regressors: weekday dummies for days 1..6 (day 0 is the baseline),
//! competitor max/min prices, stock level.
std::vector<double> feature_vector(const SaleRow& row);

//! Keeps products with more than min_rows observations and purchase
//! fraction strictly inside (frac_lo, frac_hi); purchase = units_ordered > 0.
//! Order-preserving and idempotent.
std::vector<ProductDataset> screen_products(const std::vector<ProductDataset>& datasets,
                                            long min_rows = 300, double frac_lo = 0.05,
                                            double frac_hi = 0.95);

struct RidgeLogisticFit {
    std::vector<double> theta;
    double intercept = 0.0;
    int iterations = 0;
    double penalized_nll = 0.0;
};

//! Penalized MLE of P(D=1) = sigma(theta . x - p + c0) by damped Newton
//! steps on internally standardized features; the ridge penalty applies to
//! the standardized coefficients, never the intercept. Converges to
//! gradient max-norm < 1e-8 or throws after 200 iterations.
RidgeLogisticFit fit_ridge_logistic(const std::vector<std::vector<double>>& features,
                                    const std::vector<double>& prices,
                                    const std::vector<int>& purchases, double ridge);

struct MonotoneCdf {
    std::vector<double> grid, values;
    double sigma = 0.0;
};

//! Isotonic fit of 1 - D on the sorted residuals (pool-adjacent-violators),
//! sampled onto a uniform grid padded by four smoothing widths per side,
//! convolved with a Gaussian of scale sigma_steps grid steps, and
//! renormalized so the padded edges read exactly 0 and 1.
MonotoneCdf fit_monotone_cdf(const std::vector<double>& residuals,
                             const std::vector<int>& purchases,
                             double sigma_steps = 2.0, int grid_n = 201);

struct CalibratedModel {
    std::string product_id;
    std::vector<double> theta;
    double intercept = 0.0;
    std::vector<double> grid, cdf;
    double smoothing_sigma = 0.0;
    double price_lo = 0.0, price_hi = 1.0;
    std::vector<std::vector<double>> covariate_pool;
};

CalibratedModel calibrate_product(const ProductDataset& data, double ridge = 1.0,
                                  double sigma_steps = 2.0, int grid_n = 201);

std::string model_to_json(const CalibratedModel& model);
CalibratedModel model_from_json(const std::string& text);

//! Environment drawing contexts from the covariate pool, pricing within the
//! empirical bounds, with the tabulated noise CDF.
DemandEnvironment build_semireal_env(const CalibratedModel& model);

//! Error scale of the single-index fit for downstream pricing policies.
double semireal_eps_m(const CalibratedModel& model);

} // namespace pricelab
