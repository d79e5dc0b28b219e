#include "quintic/spx_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "path_kernel.hpp"

namespace quintic {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// sqrt(xi0(t_i) / g(t_i)) per grid time; sigma_{t_i} = factor[i] * p(X_{t_i}).
// At t = 0 with alpha0 = 0 the ratio is 0/0; sigma_0 is then defined through
// the first-step limit, which collapses to 0 because p(X_0) = alpha0 = 0.
std::vector<double> vol_factors(const ModelParams& params, const ForwardVarianceCurve& curve,
                                const std::vector<double>& times) {
    std::vector<double> factor(times.size() - 1);
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        try {
            factor[i] = std::sqrt(curve.value(times[i]) / normalization_g(params, times[i]));
        } catch (const DegenerateNormalization&) {
            factor[i] = 0.0;
        }
    }
    return factor;
}

double kahan_mean(const std::vector<double>& v) {
    double acc = 0.0, comp = 0.0;
    for (double s : v) {
        const double term = s - comp;
        const double next = acc + term;
        comp = (next - acc) - term;
        acc = next;
    }
    return acc / double(v.size());
}

McPrice sample_stats(const std::vector<double>& samples) {
    McPrice out;
    out.n_effective = samples.size();
    const double mean = kahan_mean(samples);
    double acc = 0.0, comp = 0.0;
    for (double s : samples) {
        const double d = s - mean;
        const double term = d * d - comp;
        const double next = acc + term;
        comp = (next - acc) - term;
        acc = next;
    }
    out.value = mean;
    if (samples.size() > 1)
        out.std_error = std::sqrt(acc / double(samples.size() - 1) / double(samples.size()));
    return out;
}

void run_blocks(std::size_t n_streams, int threads, const std::function<void(std::size_t, std::size_t)>& work) {
    const int n_threads = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n_streams, 1)));
    if (n_threads <= 1) {
        work(0, n_streams);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_streams + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
        const std::size_t lo = std::min(n_streams, t * chunk);
        const std::size_t hi = std::min(n_streams, lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
}

} // namespace

void McConfig::validate() const {
    if (n_paths == 0) throw InvalidDomain("McConfig: n_paths must be positive");
    if (antithetic && n_paths % 2 != 0)
        throw InvalidDomain("McConfig: antithetic requires an even path count");
    if (steps_per_year < 52)
        throw InvalidDomain("McConfig: steps_per_year must be >= 52 to resolve epsilon = 1/52");
}

std::vector<PathRecord> simulate_sw(const ModelParams& params, const ForwardVarianceCurve& curve,
                                    const PathGrid& grid, std::uint64_t seed, int threads) {
    params.validate();
    grid.validate();
    const auto& times = grid.times;
    const std::size_t n_steps = grid.n_steps();
    const auto cache = detail::make_step_cache(params.ou, times);
    const auto factor = vol_factors(params, curve, times);
    std::vector<double> dt(n_steps), sqrt_dt(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        dt[i] = times[i + 1] - times[i];
        sqrt_dt[i] = std::sqrt(dt[i]);
    }

    std::vector<PathRecord> records(grid.n_paths);
    const std::size_t n_streams = grid.antithetic ? grid.n_paths / 2 : grid.n_paths;
    const double rho = params.rho;
    run_blocks(n_streams, resolve_threads(threads), [&](std::size_t lo, std::size_t hi) {
        detail::walk_streams(cache, grid.antithetic, seed, lo, hi,
                             [&](std::size_t p, std::size_t i, double y, double x_prev,
                                 double x_next) {
                                 auto& rec = records[p];
                                 if (i == 0) rec = PathRecord{};
                                 const double sigma = factor[i] * poly_eval(params.alpha, x_prev);
                                 const double s2dt = sigma * sigma * dt[i];
                                 rec.integrated_total_var += s2dt;
                                 rec.log_sw += -0.5 * rho * rho * s2dt +
                                               rho * sigma * sqrt_dt[i] * y;
                                 if (i + 1 == n_steps) {
                                     rec.integrated_rho2_var = rho * rho * rec.integrated_total_var;
                                     rec.x_terminal = x_next;
                                 }
                             });
    });
    return records;
}

namespace {

// conditional-Black price given the F^W leg of one path
double conditional_black(const PathRecord& rec, double spot, double strike, double maturity,
                         double rho, OptionType flag) {
    const double forward = spot * std::exp(rec.log_sw);
    const double var = std::max((1.0 - rho * rho) * rec.integrated_total_var, 0.0);
    return black_price(forward, strike, maturity, std::sqrt(var / maturity), flag);
}

std::vector<double> pair_samples(const std::vector<PathRecord>& records, bool antithetic,
                                 const std::function<double(const PathRecord&)>& f) {
    std::vector<double> out;
    if (antithetic) {
        out.reserve(records.size() / 2);
        for (std::size_t k = 0; k + 1 < records.size(); k += 2)
            out.push_back(0.5 * (f(records[k]) + f(records[k + 1])));
    } else {
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(f(r));
    }
    return out;
}

struct ControlContext {
    bool active = false;
    double proxy_var = 0.0;   // deterministic total-variance proxy on the grid
    bool analytic = false;    // E[Q] in closed form (constant-vol parameter sets)
    std::vector<PathRecord> pilot; // pilot records when E[Q] needs estimating
    double pilot_se_scale = 0.0;
};

double discrete_xi_integral(const ForwardVarianceCurve& curve, const std::vector<double>& times) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        acc += curve.value(times[i]) * (times[i + 1] - times[i]);
    return acc;
}

bool constant_vol(const ModelParams& params) {
    return params.alpha[1] == 0.0 && params.alpha[2] == 0.0 && params.alpha[3] == 0.0;
}

ControlContext make_control_context(const ModelParams& params, const ForwardVarianceCurve& curve,
                                    const PathGrid& grid, const McConfig& cfg) {
    ControlContext ctx;
    if (!cfg.control_variate) return ctx;
    ctx.active = true;
    ctx.proxy_var = discrete_xi_integral(curve, grid.times);
    ctx.analytic = constant_vol(params);
    if (!ctx.analytic) {
        // independent pilot run used only to center the control
        PathGrid pilot_grid = grid;
        pilot_grid.n_paths = std::min<std::size_t>(grid.n_paths, 100000);
        if (pilot_grid.antithetic && pilot_grid.n_paths % 2 != 0) ++pilot_grid.n_paths;
        ctx.pilot = simulate_sw(params, curve, pilot_grid,
                                cfg.seed ^ 0xC0FFEE5EEDull, cfg.threads);
    }
    return ctx;
}

McPrice estimate_with_control(const std::vector<PathRecord>& records, bool antithetic,
                              const ControlContext& ctx, double spot, double strike,
                              double maturity, double rho, OptionType flag) {
    auto payoff = [&](const PathRecord& r) {
        return conditional_black(r, spot, strike, maturity, rho, flag);
    };
    const auto p = pair_samples(records, antithetic, payoff);
    if (!ctx.active) return sample_stats(p);

    const double q_vol = std::sqrt(std::max((1.0 - rho * rho) * ctx.proxy_var, 0.0) / maturity);
    auto control = [&](const PathRecord& r) {
        return black_price(spot * std::exp(r.log_sw), strike, maturity, q_vol, flag);
    };
    const auto q = pair_samples(records, antithetic, control);

    double eq = 0.0, eq_se = 0.0;
    if (ctx.analytic) {
        // log S^W Gaussian with variance rho^2 * proxy_var and mean -1/2 of it:
        // convolving the lognormal forward into the Black vol restores the full
        // proxy variance.
        eq = black_price(spot, strike, maturity, std::sqrt(ctx.proxy_var / maturity), flag);
    } else {
        const auto qp = pair_samples(ctx.pilot, antithetic, control);
        const auto stats = sample_stats(qp);
        eq = stats.value;
        eq_se = stats.std_error;
    }

    const double p_mean = kahan_mean(p);
    const double q_mean = kahan_mean(q);
    double cov = 0.0, var_q = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        cov += (p[j] - p_mean) * (q[j] - q_mean);
        var_q += (q[j] - q_mean) * (q[j] - q_mean);
    }
    const double lambda = (var_q > 1e-300) ? cov / var_q : 0.0;

    std::vector<double> adj(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) adj[j] = p[j] - lambda * (q[j] - eq);
    McPrice out = sample_stats(adj);
    out.std_error = std::sqrt(out.std_error * out.std_error +
                              lambda * lambda * eq_se * eq_se);
    return out;
}

} // namespace

McPrice mixed_option_price(const ModelParams& params, const ForwardVarianceCurve& curve,
                           double spot, double maturity, double strike, OptionType flag,
                           const McConfig& cfg) {
    if (!(spot > 0.0 && strike > 0.0 && maturity > 0.0))
        throw InvalidDomain("mixed_option_price: spot, strike, maturity must be > 0");
    cfg.validate();
    const auto grid = make_uniform_grid(maturity, cfg.steps_per_year, cfg.n_paths, cfg.antithetic);
    const auto records = simulate_sw(params, curve, grid, cfg.seed, cfg.threads);
    const auto ctx = make_control_context(params, curve, grid, cfg);
    return estimate_with_control(records, cfg.antithetic, ctx, spot, strike, maturity, params.rho,
                                 flag);
}

McPrice naive_option_price(const ModelParams& params, const ForwardVarianceCurve& curve,
                           double spot, double maturity, double strike, OptionType flag,
                           const McConfig& cfg) {
    if (!(spot > 0.0 && strike > 0.0 && maturity > 0.0))
        throw InvalidDomain("naive_option_price: spot, strike, maturity must be > 0");
    cfg.validate();
    params.validate();
    const auto grid = make_uniform_grid(maturity, cfg.steps_per_year, cfg.n_paths, false);
    const auto& times = grid.times;
    const std::size_t n_steps = grid.n_steps();
    const auto cache = detail::make_step_cache(params.ou, times);
    const auto factor = vol_factors(params, curve, times);
    const double rho = params.rho;
    const double rho_perp = std::sqrt(std::max(1.0 - rho * rho, 0.0));
    const double sign = (flag == OptionType::Call) ? 1.0 : -1.0;

    std::vector<double> payoffs(grid.n_paths, 0.0);
    run_blocks(grid.n_paths, resolve_threads(cfg.threads), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            std::mt19937_64 eng(detail::substream_seed(cfg.seed ^ 0x7E57ED5A17ull, p));
            std::normal_distribution<double> normal;
            double x = 0.0, log_s = 0.0;
            for (std::size_t i = 0; i < n_steps; ++i) {
                const double y = normal(eng);
                const double z = normal(eng);
                const double sigma = factor[i] * poly_eval(params.alpha, x);
                const double dt = times[i + 1] - times[i];
                log_s += -0.5 * sigma * sigma * dt +
                         sigma * std::sqrt(dt) * (rho * y + rho_perp * z);
                x = x * cache.decay[i] + cache.sd[i] * y;
            }
            payoffs[p] = std::max(sign * (spot * std::exp(log_s) - strike), 0.0);
        }
    });
    return sample_stats(payoffs);
}

std::vector<SpxSmilePoint> spx_smile(const ModelParams& params, const ForwardVarianceCurve& curve,
                                     double spot, double maturity,
                                     const std::vector<double>& strikes, const McConfig& cfg) {
    if (!(spot > 0.0 && maturity > 0.0))
        throw InvalidDomain("spx_smile: spot and maturity must be > 0");
    cfg.validate();
    const auto grid = make_uniform_grid(maturity, cfg.steps_per_year, cfg.n_paths, cfg.antithetic);
    const auto records = simulate_sw(params, curve, grid, cfg.seed, cfg.threads);
    const auto ctx = make_control_context(params, curve, grid, cfg);

    std::vector<SpxSmilePoint> out;
    out.reserve(strikes.size());
    for (double k : strikes) {
        SpxSmilePoint pt;
        pt.strike = k;
        pt.price = estimate_with_control(records, cfg.antithetic, ctx, spot, k, maturity,
                                         params.rho, OptionType::Call);
        try {
            pt.implied_vol = implied_vol(pt.price.value, spot, k, maturity, OptionType::Call);
            const double lo_price = pt.price.value - pt.price.std_error;
            const double hi_price = pt.price.value + pt.price.std_error;
            const double intrinsic = std::max(spot - k, 0.0);
            pt.iv_low = (lo_price > intrinsic)
                            ? implied_vol(lo_price, spot, k, maturity, OptionType::Call)
                            : 0.0;
            pt.iv_high = (hi_price < spot)
                             ? implied_vol(hi_price, spot, k, maturity, OptionType::Call)
                             : pt.implied_vol;
            pt.ok = true;
        } catch (const OutOfBoundsPrice&) {
            pt.ok = false;
        }
        out.push_back(pt);
    }
    return out;
}

McPrice martingale_check(const ModelParams& params, const ForwardVarianceCurve& curve,
                         double maturity, const McConfig& cfg) {
    if (!(maturity > 0.0)) throw InvalidDomain("martingale_check: maturity must be > 0");
    cfg.validate();
    if (params.rho > 0.0) throw InvalidDomain("martingale_check: requires rho <= 0");
    const auto grid = make_uniform_grid(maturity, cfg.steps_per_year, cfg.n_paths, cfg.antithetic);
    const auto records = simulate_sw(params, curve, grid, cfg.seed, cfg.threads);
    // E[S_T | F^W] = S_0 exp(log S^W_T): the orthogonal leg integrates out.
    const auto samples = pair_samples(records, cfg.antithetic,
                                      [](const PathRecord& r) { return std::exp(r.log_sw); });
    return sample_stats(samples);
}

} // namespace quintic
