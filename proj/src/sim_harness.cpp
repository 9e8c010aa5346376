#include "pricelab/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pricelab {

namespace {

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

DemandEnvironment build_environment(const EnvSpec& spec)
{
    UtilityModel utility{spec.utility_theta, spec.utility_intercept};
    if (spec.calibrated) {
        ContextDist contexts;
        contexts.kind = ContextDist::Kind::empirical_pool;
        contexts.pool = spec.context_pool;
        return DemandEnvironment(spec.noise_grid, spec.noise_cdf, std::move(utility),
                                 std::move(contexts), spec.p_min, spec.p_max);
    }
    SyntheticCdfConfig cc;
    cc.beta = spec.beta;
    cc.rho = spec.rho;
    cc.n_bumps = spec.n_bumps;
    cc.bump_half_width = spec.bump_half_width;
    cc.support_lo = spec.support_lo;
    cc.support_hi = spec.support_hi;
    ContextDist contexts;
    contexts.kind = ContextDist::Kind::uniform_box;
    contexts.lo.assign(spec.utility_theta.size(), spec.context_lo);
    contexts.hi.assign(spec.utility_theta.size(), spec.context_hi);
    return DemandEnvironment(build_synthetic_cdf(cc), std::move(utility),
                             std::move(contexts), spec.p_min, spec.p_max);
}

std::unique_ptr<PricingPolicy> make_policy(const TrialConfig& cfg,
                                           const DemandEnvironment& env,
                                           std::uint64_t policy_seed)
{
    const DemandEnvironment* envp = &env;
    auto known_m = [envp](const std::vector<double>& x) { return envp->mean_utility(x); };

    if (cfg.policy == "ilpr") {
        IlprConfig c = cfg.params.ilpr;
        c.p_min = env.p_min();
        c.p_max = env.p_max();
        c.horizon = cfg.horizon;
        c.beta = cfg.env.beta;
        c.know_utility = cfg.params.know_utility;
        c.support_lo = env.support_lo();
        c.support_hi = env.support_hi();
        if (!c.know_utility && cfg.params.t0m_auto)
            c.t0m = static_cast<int>(
                std::ceil(std::sqrt(4.0 * static_cast<double>(cfg.horizon))));
        if (c.know_utility)
            return std::make_unique<IlprPolicy>(c, policy_seed, known_m);
        return std::make_unique<IlprPolicy>(c, policy_seed);
    }
    if (cfg.policy == "kernel") {
        KernelBaselineConfig c = cfg.params.kernel;
        c.p_min = env.p_min();
        c.p_max = env.p_max();
        c.beta = cfg.env.beta;
        c.know_utility = cfg.params.know_utility;
        if (c.know_utility)
            return std::make_unique<KernelBaselinePolicy>(c, policy_seed, known_m);
        return std::make_unique<KernelBaselinePolicy>(c, policy_seed);
    }
    if (cfg.policy == "dip") {
        DipConfig c = cfg.params.dip;
        c.p_min = env.p_min();
        c.p_max = env.p_max();
        return std::make_unique<DipPolicy>(c, policy_seed);
    }
    if (cfg.policy == "oracle")
        return std::make_unique<OraclePolicy>(env);
    if (cfg.policy == "uniform")
        return std::make_unique<UniformPolicy>(env.p_min(), env.p_max(), policy_seed);
    throw std::invalid_argument("unknown policy: " + cfg.policy);
}

RegretCurve run_trial(const TrialConfig& cfg, const DemandEnvironment& env)
{
    if (cfg.horizon <= 0)
        throw std::invalid_argument("trial: horizon must be positive");
    if (cfg.checkpoints.empty() || cfg.checkpoints.back() != cfg.horizon)
        throw std::invalid_argument("trial: last checkpoint must equal the horizon");
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
        if (cfg.checkpoints[i] < 1 || cfg.checkpoints[i] > cfg.horizon ||
            (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1]))
            throw std::invalid_argument("trial: checkpoints must be increasing in [1, T]");
    }

    Rng env_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(cfg.trial_id), "env"));
    std::uint64_t policy_seed =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(cfg.trial_id), "policy");
    auto policy = make_policy(cfg, env, policy_seed);

    RegretCurve curve;
    curve.trial_id = cfg.trial_id;
    curve.policy = cfg.policy;
    curve.beta = cfg.env.beta;
    curve.seed = cfg.seed;
    curve.checkpoints = cfg.checkpoints;
    curve.cumulative_regret.reserve(cfg.checkpoints.size());

    double cum = 0.0;
    std::size_t next_cp = 0;
    for (long t = 1; t <= cfg.horizon; ++t) {
        std::vector<double> x = env.draw_context(env_rng);
        double p = policy->next_price(x);
        OutcomeRecord rec = env.step(x, p, env_rng);
        policy->observe(x, p, rec.purchased);
        cum += rec.regret_increment;
        if (next_cp < cfg.checkpoints.size() && t == cfg.checkpoints[next_cp]) {
            curve.cumulative_regret.push_back(cum);
            ++next_cp;
        }
    }
    return curve;
}

RegretCurve run_trial(const TrialConfig& cfg)
{
    DemandEnvironment env = build_environment(cfg.env);
    return run_trial(cfg, env);
}

SweepResult run_sweep(const std::vector<TrialConfig>& trials, int parallelism)
{
    SweepResult result;
    if (trials.empty())
        return result;
    if (parallelism < 1)
        throw std::invalid_argument("sweep: parallelism must be >= 1");

    // one environment per distinct spec, shared across trials
    std::vector<EnvSpec> specs;
    std::vector<std::shared_ptr<DemandEnvironment>> envs;
    std::vector<std::size_t> env_of(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        std::size_t k = 0;
        for (; k < specs.size(); ++k)
            if (specs[k] == trials[i].env)
                break;
        if (k == specs.size()) {
            specs.push_back(trials[i].env);
            envs.push_back(std::make_shared<DemandEnvironment>(
                build_environment(trials[i].env)));
        }
        env_of[i] = k;
    }

    std::vector<std::optional<RegretCurve>> slots(trials.size());
    std::vector<std::optional<TrialFailure>> fails(trials.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= trials.size())
                return;
            try {
                slots[i] = run_trial(trials[i], *envs[env_of[i]]);
            } catch (const std::exception& e) {
                fails[i] = TrialFailure{i, trials[i].trial_id, e.what()};
            }
        }
    };

    int workers = std::min<std::size_t>(parallelism, trials.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (slots[i])
            result.curves.push_back(std::move(*slots[i]));
        else if (fails[i])
            result.failures.push_back(std::move(*fails[i]));
    }
    return result;
}

std::string curves_csv(const std::vector<RegretCurve>& curves)
{
    std::string out = "trial_id,policy,beta,seed,checkpoint,cumulative_regret\n";
    for (const auto& c : curves) {
        for (std::size_t k = 0; k < c.checkpoints.size(); ++k) {
            out += std::to_string(c.trial_id);
            out += ',';
            out += c.policy;
            out += ',';
            out += fmt_double(c.beta);
            out += ',';
            out += std::to_string(c.seed);
            out += ',';
            out += std::to_string(c.checkpoints[k]);
            out += ',';
            out += fmt_double(c.cumulative_regret[k]);
            out += '\n';
        }
    }
    return out;
}

std::vector<RegretCurve> curves_from_csv(const std::string& text)
{
    std::vector<RegretCurve> curves;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        return curves;
    if (line != "trial_id,policy,beta,seed,checkpoint,cumulative_regret")
        throw std::runtime_error("curves csv: unexpected header: " + line);

    // rows of one curve are contiguous, keyed by (trial_id, policy, beta, seed)
    long n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string f_id, f_policy, f_beta, f_seed, f_cp, f_reg;
        if (!std::getline(row, f_id, ',') || !std::getline(row, f_policy, ',') ||
            !std::getline(row, f_beta, ',') || !std::getline(row, f_seed, ',') ||
            !std::getline(row, f_cp, ',') || !std::getline(row, f_reg))
            throw std::runtime_error("curves csv: malformed line " + std::to_string(n));
        int id = std::stoi(f_id);
        double beta = std::stod(f_beta);
        std::uint64_t seed = std::stoull(f_seed);
        if (curves.empty() || curves.back().trial_id != id ||
            curves.back().policy != f_policy || curves.back().beta != beta ||
            curves.back().seed != seed) {
            RegretCurve c;
            c.trial_id = id;
            c.policy = f_policy;
            c.beta = beta;
            c.seed = seed;
            curves.push_back(std::move(c));
        }
        curves.back().checkpoints.push_back(std::stol(f_cp));
        curves.back().cumulative_regret.push_back(std::stod(f_reg));
    }
    return curves;
}

} // namespace pricelab
