#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pricelab/analytics.hpp"
#include "pricelab/calibrate.hpp"
#include "pricelab/config.hpp"
#include "pricelab/sim_harness.hpp"
#include "pricelab/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

struct Flags {
    std::string config_path, out, policy, betas, horizons;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int parallelism = 0, trials = 0;
};

std::vector<std::string> split_commas(const std::string& s)
{
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        parts.push_back(item);
    return parts;
}

pricelab::RunConfig resolve_config(const Flags& f)
{
    pricelab::RunConfig cfg;
    if (!f.config_path.empty())
        cfg = pricelab::parse_config_file(f.config_path);
    if (f.seed_set)
        cfg.seed = f.seed;
    if (!f.out.empty())
        cfg.out = f.out;
    if (f.parallelism > 0)
        cfg.parallelism = f.parallelism;
    if (!f.policy.empty())
        cfg.policy = f.policy;
    if (!f.betas.empty()) {
        cfg.betas.clear();
        for (const auto& s : split_commas(f.betas))
            cfg.betas.push_back(std::stod(s));
    }
    if (!f.horizons.empty()) {
        cfg.horizons.clear();
        for (const auto& s : split_commas(f.horizons))
            cfg.horizons.push_back(std::stol(s));
    }
    if (f.trials > 0)
        cfg.trials = f.trials;
    if (const char* env_out = std::getenv("PRICELAB_OUT"); env_out && *env_out)
        cfg.out = env_out;
    pricelab::validate_config(cfg);
    return cfg;
}

std::vector<long> log_spaced(long horizon, int k)
{
    double t_min = std::min<double>(static_cast<double>(horizon),
                                    std::max(10.0, static_cast<double>(horizon) / 1024.0));
    std::vector<long> cps;
    for (int i = 0; i < k; ++i) {
        double f = k == 1 ? 1.0 : static_cast<double>(i) / (k - 1);
        long t = std::llround(t_min * std::pow(static_cast<double>(horizon) / t_min, f));
        t = std::clamp(t, 1L, horizon);
        if (cps.empty() || t > cps.back())
            cps.push_back(t);
    }
    if (cps.back() != horizon)
        cps.push_back(horizon);
    return cps;
}

struct GroupData {
    std::string policy;
    double beta = 0.0;
    std::vector<double> horizons;
    std::vector<std::vector<double>> rows; // one per trial, across horizons
    std::vector<double> mean, sd;
};

//! Collates curves into (policy, beta) groups for slope analysis. Works on
//! both layouts: one checkpoint per trial across many horizon runs, or many
//! checkpoints per trial (trials must then cover every checkpoint).
std::vector<GroupData> group_curves(const std::vector<pricelab::RegretCurve>& curves)
{
    std::map<std::pair<std::string, double>,
             std::map<long, std::map<int, double>>>
        table;
    for (const auto& c : curves)
        for (std::size_t k = 0; k < c.checkpoints.size(); ++k)
            table[{c.policy, c.beta}][c.checkpoints[k]][c.trial_id] =
                c.cumulative_regret[k];

    std::vector<GroupData> groups;
    for (const auto& [key, by_cp] : table) {
        GroupData g;
        g.policy = key.first;
        g.beta = key.second;
        std::vector<int> ids;
        bool first = true;
        for (const auto& [cp, by_trial] : by_cp) {
            g.horizons.push_back(static_cast<double>(cp));
            std::vector<int> here;
            for (const auto& [id, _] : by_trial)
                here.push_back(id);
            if (first) {
                ids = here;
                first = false;
            } else {
                std::vector<int> merged;
                std::set_intersection(ids.begin(), ids.end(), here.begin(), here.end(),
                                      std::back_inserter(merged));
                ids = merged;
            }
        }
        for (int id : ids) {
            std::vector<double> row;
            row.reserve(g.horizons.size());
            for (const auto& [cp, by_trial] : by_cp)
                row.push_back(by_trial.at(id));
            g.rows.push_back(std::move(row));
        }
        g.mean.assign(g.horizons.size(), 0.0);
        g.sd.assign(g.horizons.size(), 0.0);
        if (!g.rows.empty()) {
            for (const auto& row : g.rows)
                for (std::size_t k = 0; k < row.size(); ++k)
                    g.mean[k] += row[k];
            for (double& v : g.mean)
                v /= static_cast<double>(g.rows.size());
            for (const auto& row : g.rows)
                for (std::size_t k = 0; k < row.size(); ++k) {
                    double d = row[k] - g.mean[k];
                    g.sd[k] += d * d;
                }
            for (double& v : g.sd)
                v = std::sqrt(v / static_cast<double>(g.rows.size()));
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

std::string slopes_csv(const std::vector<std::pair<std::string, pricelab::SlopeReport>>& rows)
{
    std::string out = "policy,beta,slope,theory,ci_lo,ci_hi,n_trials,n_boot\n";
    for (const auto& [policy, r] : rows) {
        out += policy + "," + fmt_double(r.beta) + "," + fmt_double(r.slope_hat) + "," +
               fmt_double(r.theory) + "," + fmt_double(r.ci_lo) + "," +
               fmt_double(r.ci_hi) + "," + std::to_string(r.n_trials) + "," +
               std::to_string(r.n_boot) + "\n";
    }
    return out;
}

json failures_json(const pricelab::SweepResult& result)
{
    json arr = json::array();
    for (const auto& f : result.failures)
        arr.push_back({{"input_index", f.input_index},
                       {"trial_id", f.trial_id},
                       {"message", f.message}});
    return arr;
}

//! Slope analysis over a curve set: slopes.csv, per-policy SVGs, summary
//! fragments. Shared by `sweep` and `report`.
json analyze_curves(const std::vector<pricelab::RegretCurve>& curves,
                    const pricelab::RunConfig& cfg)
{
    auto groups = group_curves(curves);
    std::vector<std::pair<std::string, pricelab::SlopeReport>> rows;
    json reports = json::array();

    std::map<std::string, std::vector<const GroupData*>> by_policy;
    for (const auto& g : groups)
        by_policy[g.policy].push_back(&g);

    for (const auto& g : groups) {
        json entry = {{"policy", g.policy}, {"beta", g.beta},
                      {"n_trials", g.rows.size()}};
        try {
            pricelab::SlopeReport rep = pricelab::cluster_bootstrap(
                g.rows, g.horizons, cfg.n_boot, cfg.seed);
            rep.beta = g.beta;
            rep.theory = pricelab::theory_exponent(g.beta, cfg.know_utility);
            rows.emplace_back(g.policy, rep);
            entry["slope"] = rep.slope_hat;
            entry["theory"] = rep.theory;
            entry["ci_lo"] = rep.ci_lo;
            entry["ci_hi"] = rep.ci_hi;
            entry["n_boot"] = rep.n_boot;
            entry["theory_in_ci"] = rep.theory >= rep.ci_lo && rep.theory <= rep.ci_hi;
        } catch (const std::exception& e) {
            entry["slope_error"] = e.what();
        }
        reports.push_back(std::move(entry));
    }

    write_file(fs::path(cfg.out) / "slopes.csv", slopes_csv(rows));

    for (const auto& [policy, group_ptrs] : by_policy) {
        std::vector<pricelab::SvgSeries> series;
        for (const GroupData* g : group_ptrs) {
            pricelab::SvgSeries s;
            s.label = policy + ", beta " + fmt_double(g->beta).substr(0, 4);
            s.x = g->horizons;
            s.y = g->mean;
            s.band = g->sd;
            series.push_back(std::move(s));
        }
        write_file(fs::path(cfg.out) / "plots" / ("regret_" + policy + ".svg"),
                   pricelab::loglog_svg(series, "Cumulative regret: " + policy,
                                        "horizon T", "cumulative regret"));
    }

    std::vector<pricelab::SlopeReport> just_reports;
    for (const auto& [_, r] : rows)
        just_reports.push_back(r);
    std::string table = pricelab::compare_table(just_reports);
    std::cout << table;

    json out;
    out["reports"] = reports;
    out["table"] = table;
    return out;
}

void emit_resolved(const pricelab::RunConfig& cfg)
{
    write_file(fs::path(cfg.out) / "config.resolved", pricelab::emit_config(cfg));
}

int cmd_sweep(const pricelab::RunConfig& cfg)
{
    emit_resolved(cfg);
    pricelab::PolicyParams params = pricelab::policy_params(cfg);
    std::vector<pricelab::TrialConfig> trials;
    for (double beta : cfg.betas)
        for (long T : cfg.horizons)
            for (int i = 0; i < cfg.trials; ++i) {
                pricelab::TrialConfig t;
                t.trial_id = i;
                t.policy = cfg.policy;
                t.env = pricelab::synthetic_env_spec(cfg, beta);
                t.horizon = T;
                t.checkpoints = {T};
                t.seed = cfg.seed;
                t.params = params;
                trials.push_back(std::move(t));
            }

    pricelab::SweepResult result = pricelab::run_sweep(trials, cfg.parallelism);
    write_file(fs::path(cfg.out) / "curves.csv", pricelab::curves_csv(result.curves));

    json summary;
    summary["command"] = "sweep";
    summary["policy"] = cfg.policy;
    summary["know_utility"] = cfg.know_utility;
    summary["seed"] = cfg.seed;
    summary["trials"] = cfg.trials;
    summary["betas"] = cfg.betas;
    summary["horizons"] = cfg.horizons;
    summary["n_failures"] = result.failures.size();
    summary["failures"] = failures_json(result);
    summary.update(analyze_curves(result.curves, cfg));
    write_file(fs::path(cfg.out) / "summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const pricelab::RunConfig& cfg)
{
    emit_resolved(cfg);
    pricelab::PolicyParams params = pricelab::policy_params(cfg);
    double beta = cfg.betas.front();
    long horizon = cfg.horizons.back();
    std::vector<long> checkpoints = log_spaced(horizon, cfg.curve_points);

    std::vector<pricelab::TrialConfig> trials;
    for (int i = 0; i < cfg.trials; ++i) {
        pricelab::TrialConfig t;
        t.trial_id = i;
        t.policy = cfg.policy;
        t.env = pricelab::synthetic_env_spec(cfg, beta);
        t.horizon = horizon;
        t.checkpoints = checkpoints;
        t.seed = cfg.seed;
        t.params = params;
        trials.push_back(std::move(t));
    }
    pricelab::SweepResult result = pricelab::run_sweep(trials, cfg.parallelism);
    write_file(fs::path(cfg.out) / "curves.csv", pricelab::curves_csv(result.curves));

    auto groups = group_curves(result.curves);
    json summary;
    summary["command"] = "simulate";
    summary["policy"] = cfg.policy;
    summary["beta"] = beta;
    summary["horizon"] = horizon;
    summary["seed"] = cfg.seed;
    summary["trials"] = cfg.trials;
    summary["n_failures"] = result.failures.size();
    summary["failures"] = failures_json(result);
    if (!groups.empty()) {
        const GroupData& g = groups.front();
        pricelab::SvgSeries s;
        s.label = cfg.policy;
        s.x = g.horizons;
        s.y = g.mean;
        s.band = g.sd;
        write_file(fs::path(cfg.out) / "plots" / ("regret_" + cfg.policy + ".svg"),
                   pricelab::loglog_svg({s}, "Cumulative regret: " + cfg.policy, "t",
                                        "cumulative regret"));
        summary["final_mean_regret"] = g.mean.back();
        summary["final_sd_regret"] = g.sd.back();
    }
    write_file(fs::path(cfg.out) / "summary.json", summary.dump(2) + "\n");
    std::cout << "simulate: " << result.curves.size() << " trials, mean final regret "
              << (groups.empty() ? 0.0 : groups.front().mean.back()) << "\n";
    return 0;
}

int cmd_compare(const pricelab::RunConfig& cfg)
{
    emit_resolved(cfg);
    pricelab::PolicyParams params = pricelab::policy_params(cfg);
    double beta = cfg.betas.front();
    long horizon = cfg.horizons.back();

    pricelab::EnvSpec spec;
    if (cfg.env_kind == "calibrated") {
        if (cfg.model_path.empty())
            throw std::runtime_error("compare: env.model path required for calibrated runs");
        pricelab::CalibratedModel model =
            pricelab::model_from_json(read_file(cfg.model_path));
        spec.calibrated = true;
        spec.beta = beta;
        spec.noise_grid = model.grid;
        spec.noise_cdf = model.cdf;
        spec.context_pool = model.covariate_pool;
        spec.utility_theta = model.theta;
        spec.utility_intercept = model.intercept;
        spec.p_min = model.price_lo;
        spec.p_max = model.price_hi;
        // the calibrated utility is handed to the policies, with the fit's
        // error scale driving the smoothing formulas
        params.know_utility = true;
        params.ilpr.eps_m = pricelab::semireal_eps_m(model);
    } else {
        spec = pricelab::synthetic_env_spec(cfg, beta);
    }

    std::vector<long> checkpoints = log_spaced(horizon, cfg.curve_points);
    std::vector<pricelab::TrialConfig> trials;
    for (const auto& policy : cfg.policies)
        for (int i = 0; i < cfg.trials; ++i) {
            pricelab::TrialConfig t;
            t.trial_id = i;
            t.policy = policy;
            t.env = spec;
            t.horizon = horizon;
            t.checkpoints = checkpoints;
            t.seed = cfg.seed; // shared seed: same customers for every policy
            t.params = params;
            trials.push_back(std::move(t));
        }

    pricelab::SweepResult result = pricelab::run_sweep(trials, cfg.parallelism);
    write_file(fs::path(cfg.out) / "curves.csv", pricelab::curves_csv(result.curves));

    auto groups = group_curves(result.curves);
    std::vector<pricelab::SvgSeries> series;
    json finals;
    std::map<std::string, std::map<int, double>> final_by_policy;
    for (const auto& c : result.curves)
        final_by_policy[c.policy][c.trial_id] = c.cumulative_regret.back();
    for (const auto& g : groups) {
        pricelab::SvgSeries s;
        s.label = g.policy;
        s.x = g.horizons;
        s.y = g.mean;
        s.band = g.sd;
        series.push_back(std::move(s));
        double n = static_cast<double>(g.rows.size());
        finals[g.policy] = {{"mean", g.mean.back()},
                            {"sd", g.sd.back()},
                            {"se", g.sd.back() / std::sqrt(std::max(n, 1.0))},
                            {"n_trials", g.rows.size()}};
    }
    write_file(fs::path(cfg.out) / "plots" / "compare.svg",
               pricelab::loglog_svg(series, "Policy comparison", "t",
                                    "cumulative regret"));

    // paired differences against the first policy (same trial seeds)
    json pairwise = json::array();
    const std::string& ref = cfg.policies.front();
    for (const auto& policy : cfg.policies) {
        if (policy == ref)
            continue;
        std::vector<double> diffs;
        for (const auto& [id, v] : final_by_policy[ref]) {
            auto it = final_by_policy[policy].find(id);
            if (it != final_by_policy[policy].end())
                diffs.push_back(it->second - v);
        }
        if (diffs.size() < 2)
            continue;
        double n = static_cast<double>(diffs.size());
        double mean = 0;
        for (double d : diffs)
            mean += d;
        mean /= n;
        double var = 0;
        for (double d : diffs)
            var += (d - mean) * (d - mean);
        double se = std::sqrt(var / (n - 1.0)) / std::sqrt(n);
        pairwise.push_back({{"reference", ref},
                            {"other", policy},
                            {"mean_diff", mean},
                            {"se_diff", se},
                            {"margin_ok", mean > 2.0 * se}});
        std::cout << "compare: " << ref << " vs " << policy << ": mean diff " << mean
                  << " (se " << se << ")\n";
    }

    json summary;
    summary["command"] = "compare";
    summary["beta"] = beta;
    summary["horizon"] = horizon;
    summary["policies"] = cfg.policies;
    summary["seed"] = cfg.seed;
    summary["trials"] = cfg.trials;
    summary["env_kind"] = cfg.env_kind;
    summary["n_failures"] = result.failures.size();
    summary["failures"] = failures_json(result);
    summary["final"] = finals;
    summary["pairwise"] = pairwise;
    write_file(fs::path(cfg.out) / "summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_calibrate(const pricelab::RunConfig& cfg)
{
    emit_resolved(cfg);
    if (cfg.cal_data.empty())
        throw std::runtime_error("calibrate: set [calibrate] data to the sales CSV path");
    auto datasets = pricelab::read_sales_csv(cfg.cal_data);
    auto kept = pricelab::screen_products(datasets, cfg.cal_min_rows, cfg.cal_frac_lo,
                                          cfg.cal_frac_hi);

    json products = json::array();
    std::vector<std::string> kept_ids;
    for (const auto& d : kept) {
        pricelab::CalibratedModel model = pricelab::calibrate_product(
            d, cfg.cal_ridge, cfg.cal_sigma_steps, cfg.cal_grid_n);
        write_file(fs::path(cfg.out) / "models" / (d.product_id + ".json"),
                   pricelab::model_to_json(model));
        kept_ids.push_back(d.product_id);
        long purchases = 0;
        for (const auto& r : d.rows)
            purchases += r.units_ordered > 0 ? 1 : 0;
        products.push_back(
            {{"product_id", d.product_id},
             {"rows", d.rows.size()},
             {"purchase_fraction",
              static_cast<double>(purchases) / static_cast<double>(d.rows.size())},
             {"price_lo", model.price_lo},
             {"price_hi", model.price_hi}});
    }

    json summary;
    summary["command"] = "calibrate";
    summary["data"] = cfg.cal_data;
    summary["products_total"] = datasets.size();
    summary["products_kept"] = kept.size();
    summary["kept"] = kept_ids;
    summary["products"] = products;
    write_file(fs::path(cfg.out) / "summary.json", summary.dump(2) + "\n");
    std::cout << "calibrate: kept " << kept.size() << " of " << datasets.size()
              << " products\n";
    return 0;
}

int cmd_report(const pricelab::RunConfig& cfg)
{
    emit_resolved(cfg);
    auto curves =
        pricelab::curves_from_csv(read_file(fs::path(cfg.out) / "curves.csv"));
    json summary;
    summary["command"] = "report";
    summary["n_curves"] = curves.size();
    summary.update(analyze_curves(curves, cfg));
    write_file(fs::path(cfg.out) / "summary.json", summary.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dynamic-pricing simulation laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    Flags flags;
    app.add_option("--config", flags.config_path, "config file path");
    app.add_option("--out", flags.out, "output directory");
    auto* seed_opt = app.add_option("--seed", flags.seed, "root RNG seed");
    app.add_option("--parallelism", flags.parallelism, "worker count");
    app.add_option("--policy", flags.policy, "policy name");
    app.add_option("--beta", flags.betas, "comma-separated smoothness list");
    app.add_option("--horizons", flags.horizons, "comma-separated horizon list");
    app.add_option("--trials", flags.trials, "trials per cell");

    auto* simulate = app.add_subcommand("simulate", "single-cell regret curves");
    auto* sweep = app.add_subcommand("sweep", "beta x horizon regret-exponent sweep");
    auto* calibrate = app.add_subcommand("calibrate", "fit demand models from sales data");
    auto* compare = app.add_subcommand("compare", "multi-policy comparison at one horizon");
    auto* report = app.add_subcommand("report", "slope analysis of an existing sweep CSV");

    CLI11_PARSE(app, argc, argv);
    flags.seed_set = seed_opt->count() > 0;

    try {
        pricelab::RunConfig cfg = resolve_config(flags);
        if (simulate->parsed())
            return cmd_simulate(cfg);
        if (sweep->parsed())
            return cmd_sweep(cfg);
        if (calibrate->parsed())
            return cmd_calibrate(cfg);
        if (compare->parsed())
            return cmd_compare(cfg);
        if (report->parsed())
            return cmd_report(cfg);
        throw std::runtime_error("no command selected");
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
