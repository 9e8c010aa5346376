#include "pricelab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pricelab {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

[[noreturn]] void bad_value(const std::string& path, const std::string& what)
{
    throw std::runtime_error("config: key " + path + ": " + what);
}

double parse_double(const std::string& v, const std::string& path)
{
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size())
            bad_value(path, "trailing characters in '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        bad_value(path, "not a number: '" + v + "'");
    } catch (const std::out_of_range&) {
        bad_value(path, "out of range: '" + v + "'");
    }
}

long parse_long(const std::string& v, const std::string& path)
{
    try {
        std::size_t used = 0;
        long x = std::stol(v, &used);
        if (used != v.size())
            bad_value(path, "trailing characters in '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        bad_value(path, "not an integer: '" + v + "'");
    } catch (const std::out_of_range&) {
        bad_value(path, "out of range: '" + v + "'");
    }
}

int parse_int(const std::string& v, const std::string& path)
{
    long x = parse_long(v, path);
    if (x < -2147483647L || x > 2147483647L)
        bad_value(path, "out of int range");
    return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& v, const std::string& path)
{
    try {
        std::size_t used = 0;
        unsigned long long x = std::stoull(v, &used);
        if (used != v.size())
            bad_value(path, "trailing characters in '" + v + "'");
        return x;
    } catch (const std::exception&) {
        bad_value(path, "not an unsigned integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& path)
{
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    bad_value(path, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ','))
        parts.push_back(trim(item));
    return parts;
}

std::vector<double> parse_doubles(const std::string& v, const std::string& path)
{
    std::vector<double> out;
    for (const auto& s : split_list(v))
        out.push_back(parse_double(s, path));
    return out;
}

std::vector<long> parse_longs(const std::string& v, const std::string& path)
{
    std::vector<long> out;
    for (const auto& s : split_list(v))
        out.push_back(parse_long(s, path));
    return out;
}

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ",";
        out += fmt_double(v[i]);
    }
    return out;
}

std::string join_longs(const std::vector<long>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::string join_strings(const std::vector<std::string>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ",";
        out += v[i];
    }
    return out;
}

void apply_key(RunConfig& c, const std::string& sec, const std::string& key,
               const std::string& val)
{
    const std::string path = sec + "." + key;
    if (sec == "run") {
        if (key == "seed")
            c.seed = parse_u64(val, path);
        else if (key == "parallelism")
            c.parallelism = parse_int(val, path);
        else if (key == "out")
            c.out = val;
        else if (key == "policy")
            c.policy = val;
        else if (key == "policies")
            c.policies = split_list(val);
        else if (key == "betas")
            c.betas = parse_doubles(val, path);
        else if (key == "horizons")
            c.horizons = parse_longs(val, path);
        else if (key == "trials")
            c.trials = parse_int(val, path);
        else if (key == "know_utility")
            c.know_utility = parse_bool(val, path);
        else if (key == "curve_points")
            c.curve_points = parse_int(val, path);
        else
            bad_value(path, "unknown key");
    } else if (sec == "env") {
        if (key == "kind")
            c.env_kind = val;
        else if (key == "rho")
            c.rho = parse_double(val, path);
        else if (key == "n_bumps")
            c.n_bumps = parse_int(val, path);
        else if (key == "bump_half_width")
            c.bump_half_width = parse_double(val, path);
        else if (key == "support_lo")
            c.support_lo = parse_double(val, path);
        else if (key == "support_hi")
            c.support_hi = parse_double(val, path);
        else if (key == "context_lo")
            c.context_lo = parse_double(val, path);
        else if (key == "context_hi")
            c.context_hi = parse_double(val, path);
        else if (key == "p_min")
            c.p_min = parse_double(val, path);
        else if (key == "p_max")
            c.p_max = parse_double(val, path);
        else if (key == "utility_theta")
            c.utility_theta = parse_doubles(val, path);
        else if (key == "utility_intercept")
            c.utility_intercept = parse_double(val, path);
        else if (key == "model")
            c.model_path = val;
        else
            bad_value(path, "unknown key");
    } else if (sec == "ilpr") {
        if (key == "t0")
            c.t0 = parse_int(val, path);
        else if (key == "t0m")
            c.t0m = parse_int(val, path);
        else if (key == "grid_n")
            c.grid_n = parse_int(val, path);
        else if (key == "bandwidth_scale")
            c.bandwidth_scale = parse_double(val, path);
        else if (key == "c_delta")
            c.c_delta = parse_double(val, path);
        else if (key == "kappa")
            c.kappa = parse_double(val, path);
        else if (key == "c_v")
            c.c_v = parse_double(val, path);
        else if (key == "delta_clip_fraction")
            c.delta_clip_fraction = parse_double(val, path);
        else if (key == "v_clip")
            c.v_clip = parse_double(val, path);
        else if (key == "add_eps_m_to_delta")
            c.add_eps_m_to_delta = parse_bool(val, path);
        else if (key == "b0_scale")
            c.b0_scale = parse_double(val, path);
        else if (key == "a1b1_widen")
            c.a1b1_widen = parse_double(val, path);
        else if (key == "stage_from_2l")
            c.stage_from_2l = parse_bool(val, path);
        else if (key == "c1_floor")
            c.c1_floor = parse_double(val, path);
        else if (key == "order_unknown")
            c.order_unknown = parse_int(val, path);
        else if (key == "model_class")
            c.model_class = val;
        else if (key == "sparse_s")
            c.sparse_s = parse_int(val, path);
        else
            bad_value(path, "unknown key");
    } else if (sec == "kernel") {
        if (key == "episode_base")
            c.kernel_episode_base = parse_long(val, path);
        else if (key == "explore_c")
            c.kernel_explore_c = parse_double(val, path);
        else if (key == "bandwidth_scale")
            c.kernel_bandwidth_scale = parse_double(val, path);
        else if (key == "grid_n")
            c.kernel_grid_n = parse_int(val, path);
        else if (key == "density_floor")
            c.kernel_density_floor = parse_double(val, path);
        else if (key == "root_step")
            c.kernel_root_step = parse_double(val, path);
        else
            bad_value(path, "unknown key");
    } else if (sec == "dip") {
        if (key == "init_exponent")
            c.dip_init_exponent = parse_int(val, path);
        else if (key == "ucb_c")
            c.dip_ucb_c = parse_double(val, path);
        else if (key == "ridge")
            c.dip_ridge = parse_double(val, path);
        else
            bad_value(path, "unknown key");
    } else if (sec == "analytics") {
        if (key == "n_boot")
            c.n_boot = parse_int(val, path);
        else
            bad_value(path, "unknown key");
    } else if (sec == "calibrate") {
        if (key == "ridge")
            c.cal_ridge = parse_double(val, path);
        else if (key == "sigma_steps")
            c.cal_sigma_steps = parse_double(val, path);
        else if (key == "grid_n")
            c.cal_grid_n = parse_int(val, path);
        else if (key == "min_rows")
            c.cal_min_rows = parse_long(val, path);
        else if (key == "frac_lo")
            c.cal_frac_lo = parse_double(val, path);
        else if (key == "frac_hi")
            c.cal_frac_hi = parse_double(val, path);
        else if (key == "data")
            c.cal_data = val;
        else
            bad_value(path, "unknown key");
    } else {
        throw std::runtime_error("config: unknown section [" + sec + "]");
    }
}

} // namespace

RunConfig parse_config_text(const std::string& text)
{
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    long n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("config: line " + std::to_string(n) +
                                         ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(n) +
                                     ": expected key = value");
        if (section.empty())
            throw std::runtime_error("config: line " + std::to_string(n) +
                                     ": key outside any section");
        try {
            apply_key(cfg, section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(std::string(e.what()) + " (line " +
                                     std::to_string(n) + ")");
        }
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string emit_config(const RunConfig& c)
{
    std::string out;
    out += "[run]\n";
    out += "seed = " + std::to_string(c.seed) + "\n";
    out += "parallelism = " + std::to_string(c.parallelism) + "\n";
    out += "out = " + c.out + "\n";
    out += "policy = " + c.policy + "\n";
    out += "policies = " + join_strings(c.policies) + "\n";
    out += "betas = " + join_doubles(c.betas) + "\n";
    out += "horizons = " + join_longs(c.horizons) + "\n";
    out += "trials = " + std::to_string(c.trials) + "\n";
    out += std::string("know_utility = ") + (c.know_utility ? "true" : "false") + "\n";
    out += "curve_points = " + std::to_string(c.curve_points) + "\n";
    out += "\n[env]\n";
    out += "kind = " + c.env_kind + "\n";
    out += "rho = " + fmt_double(c.rho) + "\n";
    out += "n_bumps = " + std::to_string(c.n_bumps) + "\n";
    out += "bump_half_width = " + fmt_double(c.bump_half_width) + "\n";
    out += "support_lo = " + fmt_double(c.support_lo) + "\n";
    out += "support_hi = " + fmt_double(c.support_hi) + "\n";
    out += "context_lo = " + fmt_double(c.context_lo) + "\n";
    out += "context_hi = " + fmt_double(c.context_hi) + "\n";
    out += "p_min = " + fmt_double(c.p_min) + "\n";
    out += "p_max = " + fmt_double(c.p_max) + "\n";
    out += "utility_theta = " + join_doubles(c.utility_theta) + "\n";
    out += "utility_intercept = " + fmt_double(c.utility_intercept) + "\n";
    out += "model = " + c.model_path + "\n";
    out += "\n[ilpr]\n";
    out += "t0 = " + std::to_string(c.t0) + "\n";
    out += "t0m = " + std::to_string(c.t0m) + "\n";
    out += "grid_n = " + std::to_string(c.grid_n) + "\n";
    out += "bandwidth_scale = " + fmt_double(c.bandwidth_scale) + "\n";
    out += "c_delta = " + fmt_double(c.c_delta) + "\n";
    out += "kappa = " + fmt_double(c.kappa) + "\n";
    out += "c_v = " + fmt_double(c.c_v) + "\n";
    out += "delta_clip_fraction = " + fmt_double(c.delta_clip_fraction) + "\n";
    out += "v_clip = " + fmt_double(c.v_clip) + "\n";
    out += std::string("add_eps_m_to_delta = ") +
           (c.add_eps_m_to_delta ? "true" : "false") + "\n";
    out += "b0_scale = " + fmt_double(c.b0_scale) + "\n";
    out += "a1b1_widen = " + fmt_double(c.a1b1_widen) + "\n";
    out += std::string("stage_from_2l = ") + (c.stage_from_2l ? "true" : "false") + "\n";
    out += "c1_floor = " + fmt_double(c.c1_floor) + "\n";
    out += "order_unknown = " + std::to_string(c.order_unknown) + "\n";
    out += "model_class = " + c.model_class + "\n";
    out += "sparse_s = " + std::to_string(c.sparse_s) + "\n";
    out += "\n[kernel]\n";
    out += "episode_base = " + std::to_string(c.kernel_episode_base) + "\n";
    out += "explore_c = " + fmt_double(c.kernel_explore_c) + "\n";
    out += "bandwidth_scale = " + fmt_double(c.kernel_bandwidth_scale) + "\n";
    out += "grid_n = " + std::to_string(c.kernel_grid_n) + "\n";
    out += "density_floor = " + fmt_double(c.kernel_density_floor) + "\n";
    out += "root_step = " + fmt_double(c.kernel_root_step) + "\n";
    out += "\n[dip]\n";
    out += "init_exponent = " + std::to_string(c.dip_init_exponent) + "\n";
    out += "ucb_c = " + fmt_double(c.dip_ucb_c) + "\n";
    out += "ridge = " + fmt_double(c.dip_ridge) + "\n";
    out += "\n[analytics]\n";
    out += "n_boot = " + std::to_string(c.n_boot) + "\n";
    out += "\n[calibrate]\n";
    out += "ridge = " + fmt_double(c.cal_ridge) + "\n";
    out += "sigma_steps = " + fmt_double(c.cal_sigma_steps) + "\n";
    out += "grid_n = " + std::to_string(c.cal_grid_n) + "\n";
    out += "min_rows = " + std::to_string(c.cal_min_rows) + "\n";
    out += "frac_lo = " + fmt_double(c.cal_frac_lo) + "\n";
    out += "frac_hi = " + fmt_double(c.cal_frac_hi) + "\n";
    out += "data = " + c.cal_data + "\n";
    return out;
}

void validate_config(const RunConfig& c)
{
    auto fail = [](const std::string& path, const std::string& what) {
        throw std::runtime_error("config: key " + path + ": " + what);
    };
    const std::vector<std::string> known_policies = {"ilpr", "kernel", "dip", "oracle",
                                                     "uniform"};
    auto known = [&](const std::string& p) {
        return std::find(known_policies.begin(), known_policies.end(), p) !=
               known_policies.end();
    };
    if (c.parallelism < 1)
        fail("run.parallelism", "must be >= 1");
    if (!known(c.policy))
        fail("run.policy", "unknown policy '" + c.policy + "'");
    for (const auto& p : c.policies)
        if (!known(p))
            fail("run.policies", "unknown policy '" + p + "'");
    if (c.policies.empty())
        fail("run.policies", "must not be empty");
    if (c.betas.empty())
        fail("run.betas", "must not be empty");
    for (double b : c.betas)
        if (!(b > 1.0))
            fail("run.betas", "smoothness values must exceed 1");
    if (c.horizons.empty())
        fail("run.horizons", "must not be empty");
    for (std::size_t i = 0; i < c.horizons.size(); ++i)
        if (c.horizons[i] < 1 || (i > 0 && c.horizons[i] <= c.horizons[i - 1]))
            fail("run.horizons", "must be positive and strictly increasing");
    if (c.trials < 1)
        fail("run.trials", "must be >= 1");
    if (c.curve_points < 2)
        fail("run.curve_points", "must be >= 2");
    if (c.env_kind != "synthetic" && c.env_kind != "calibrated")
        fail("env.kind", "must be synthetic or calibrated");
    if (!(c.rho > 0))
        fail("env.rho", "must be positive");
    if (c.n_bumps < 1)
        fail("env.n_bumps", "must be >= 1");
    if (!(c.bump_half_width > 0))
        fail("env.bump_half_width", "must be positive");
    if (!(c.support_lo < c.support_hi))
        fail("env.support_lo", "support interval must be nonempty");
    if (!(c.context_lo <= c.context_hi))
        fail("env.context_lo", "context interval must be ordered");
    if (!(c.p_min < c.p_max))
        fail("env.p_min", "price interval must be nonempty");
    if (c.utility_theta.empty())
        fail("env.utility_theta", "must not be empty");
    if (c.t0 < 2)
        fail("ilpr.t0", "must be >= 2");
    if (c.t0m < 0)
        fail("ilpr.t0m", "must be >= 0 (0 = automatic)");
    if (c.grid_n < 11)
        fail("ilpr.grid_n", "must be >= 11");
    if (!(c.bandwidth_scale > 0))
        fail("ilpr.bandwidth_scale", "must be positive");
    if (!(c.c_delta > 0))
        fail("ilpr.c_delta", "must be positive");
    if (c.kappa < 0)
        fail("ilpr.kappa", "must be >= 0");
    if (!(c.c_v > 0))
        fail("ilpr.c_v", "must be positive");
    if (!(c.delta_clip_fraction > 0) || c.delta_clip_fraction > 0.5)
        fail("ilpr.delta_clip_fraction", "must be in (0, 0.5]");
    if (c.v_clip < 0 || c.v_clip > 0.5)
        fail("ilpr.v_clip", "must be in [0, 0.5]");
    if (!(c.b0_scale >= 0))
        fail("ilpr.b0_scale", "must be >= 0");
    if (!(c.a1b1_widen >= 0))
        fail("ilpr.a1b1_widen", "must be >= 0");
    if (!(c.c1_floor > 0))
        fail("ilpr.c1_floor", "must be positive");
    if (c.order_unknown < 1)
        fail("ilpr.order_unknown", "must be >= 1");
    if (c.model_class != "linear" && c.model_class != "sparse_linear")
        fail("ilpr.model_class", "must be linear or sparse_linear");
    if (c.sparse_s < 1)
        fail("ilpr.sparse_s", "must be >= 1");
    if (c.kernel_episode_base < 2)
        fail("kernel.episode_base", "must be >= 2");
    if (!(c.kernel_explore_c > 0))
        fail("kernel.explore_c", "must be positive");
    if (!(c.kernel_bandwidth_scale > 0))
        fail("kernel.bandwidth_scale", "must be positive");
    if (c.kernel_grid_n < 11)
        fail("kernel.grid_n", "must be >= 11");
    if (!(c.kernel_density_floor > 0))
        fail("kernel.density_floor", "must be positive");
    if (!(c.kernel_root_step > 0) || c.kernel_root_step > 1)
        fail("kernel.root_step", "must be in (0, 1]");
    if (c.dip_init_exponent < 1 || c.dip_init_exponent > 20)
        fail("dip.init_exponent", "must be in [1, 20]");
    if (!(c.dip_ucb_c > 0))
        fail("dip.ucb_c", "must be positive");
    if (!(c.dip_ridge > 0))
        fail("dip.ridge", "must be positive");
    if (c.n_boot < 1)
        fail("analytics.n_boot", "must be >= 1");
    if (!(c.cal_ridge >= 0))
        fail("calibrate.ridge", "must be >= 0");
    if (!(c.cal_sigma_steps > 0))
        fail("calibrate.sigma_steps", "must be positive");
    if (c.cal_grid_n < 3)
        fail("calibrate.grid_n", "must be >= 3");
    if (c.cal_min_rows < 1)
        fail("calibrate.min_rows", "must be >= 1");
    if (!(c.cal_frac_lo >= 0) || !(c.cal_frac_hi <= 1) ||
        !(c.cal_frac_lo < c.cal_frac_hi))
        fail("calibrate.frac_lo", "need 0 <= frac_lo < frac_hi <= 1");
}

EnvSpec synthetic_env_spec(const RunConfig& c, double beta)
{
    EnvSpec s;
    s.calibrated = false;
    s.beta = beta;
    s.rho = c.rho;
    s.n_bumps = c.n_bumps;
    s.bump_half_width = c.bump_half_width;
    s.support_lo = c.support_lo;
    s.support_hi = c.support_hi;
    s.context_lo = c.context_lo;
    s.context_hi = c.context_hi;
    s.utility_theta = c.utility_theta;
    s.utility_intercept = c.utility_intercept;
    s.p_min = c.p_min;
    s.p_max = c.p_max;
    return s;
}

PolicyParams policy_params(const RunConfig& c)
{
    PolicyParams p;
    p.know_utility = c.know_utility;
    p.t0m_auto = c.t0m == 0;

    p.ilpr.t0 = c.t0;
    p.ilpr.t0m = c.t0m;
    p.ilpr.grid_n = c.grid_n;
    p.ilpr.bandwidth_scale = c.bandwidth_scale;
    p.ilpr.smoothing.c_delta = c.c_delta;
    p.ilpr.smoothing.kappa = c.kappa;
    p.ilpr.smoothing.c_v = c.c_v;
    p.ilpr.smoothing.delta_clip_fraction = c.delta_clip_fraction;
    p.ilpr.smoothing.v_clip_hi = c.v_clip;
    p.ilpr.smoothing.add_eps_m_to_delta = c.add_eps_m_to_delta;
    p.ilpr.b0_scale = c.b0_scale;
    p.ilpr.a1b1_widen = c.a1b1_widen;
    p.ilpr.stage_from_2l = c.stage_from_2l;
    p.ilpr.c1_floor = c.c1_floor;
    p.ilpr.order_unknown = c.order_unknown;
    p.ilpr.model_class = c.model_class == "sparse_linear" ? ModelClass::sparse_linear
                                                          : ModelClass::linear;
    p.ilpr.sparse_s = c.sparse_s;

    p.kernel.episode_base = c.kernel_episode_base;
    p.kernel.explore_c = c.kernel_explore_c;
    p.kernel.bandwidth_scale = c.kernel_bandwidth_scale;
    p.kernel.grid_n = c.kernel_grid_n;
    p.kernel.density_floor = c.kernel_density_floor;
    p.kernel.root_step = c.kernel_root_step;

    p.dip.init_exponent = c.dip_init_exponent;
    p.dip.ucb_c = c.dip_ucb_c;
    p.dip.ridge = c.dip_ridge;
    return p;
}

} // namespace pricelab
