#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pricelab/sim_harness.hpp"

namespace pricelab {

//! Flat run configuration mirroring every module's tunables, grouped into
//! sections [run], [env], [ilpr], [kernel], [dip], [analytics], [calibrate].
//! Unknown sections or keys are rejected by name; emit/parse round-trips
//! exactly (doubles serialized with 17 significant digits).
struct RunConfig {
    // [run]
    std::uint64_t seed = 12345;
    int parallelism = 1;
    std::string out = "out";
    std::string policy = "ilpr";
    std::vector<std::string> policies = {"ilpr", "kernel", "dip"};
    std::vector<double> betas = {2.0, 2.5};
    std::vector<long> horizons = {2000, 4000, 8000, 16000, 32000};
    int trials = 50;
    bool know_utility = false;
    int curve_points = 24;

    // [env]
    std::string env_kind = "synthetic"; // synthetic | calibrated
    double rho = 5.0;
    int n_bumps = 10;
    double bump_half_width = 1.0 / 45.0;
    double support_lo = -0.3, support_hi = 0.3;
    double context_lo = 0.35, context_hi = 0.65;
    double p_min = 0.0, p_max = 1.0;
    std::vector<double> utility_theta = {1.0};
    double utility_intercept = 0.0;
    std::string model_path; // calibrated-model JSON for env_kind = calibrated

    // [ilpr]
    int t0 = 100;
    int t0m = 0; // 0 = ceil(sqrt(4 T)) per trial
    int grid_n = 301;
    double bandwidth_scale = 0.5;
    double c_delta = 2.5;
    double kappa = 0.0;
    double c_v = 3.0;
    double delta_clip_fraction = 0.10;
    double v_clip = 0.01;
    bool add_eps_m_to_delta = false;
    double b0_scale = 1.0;
    double a1b1_widen = 0.05;
    bool stage_from_2l = false;
    double c1_floor = 0.05;
    int order_unknown = 2;
    std::string model_class = "linear"; // linear | sparse_linear
    int sparse_s = 5;

    // [kernel]
    long kernel_episode_base = 200;
    double kernel_explore_c = 5.0;
    double kernel_bandwidth_scale = 0.5;
    int kernel_grid_n = 301;
    double kernel_density_floor = 1e-3;
    double kernel_root_step = 0.35;

    // [dip]
    int dip_init_exponent = 7;
    double dip_ucb_c = 0.025;
    double dip_ridge = 0.1;

    // [analytics]
    int n_boot = 2000;

    // [calibrate]
    double cal_ridge = 1.0;
    double cal_sigma_steps = 2.0;
    int cal_grid_n = 201;
    long cal_min_rows = 300;
    double cal_frac_lo = 0.05;
    double cal_frac_hi = 0.95;
    std::string cal_data;

    bool operator==(const RunConfig&) const = default;
};

//! Parses the sectioned key = value format; # and ; start comment lines.
//! Unknown keys raise errors naming "section.key"; malformed values raise
//! errors with the key path and line number.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

//! Emits every key in a fixed order; parse(emit(cfg)) == cfg.
std::string emit_config(const RunConfig& cfg);

//! Cross-field validation (ranges, name sets); throws on violations.
void validate_config(const RunConfig& cfg);

//! Sweep-cell helpers.
EnvSpec synthetic_env_spec(const RunConfig& cfg, double beta);
PolicyParams policy_params(const RunConfig& cfg);

} // namespace pricelab
