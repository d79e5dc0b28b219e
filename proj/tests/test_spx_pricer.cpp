#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quintic/spx_pricer.hpp"
#include "test_helpers.hpp"

using namespace quintic;

namespace {

ModelParams published_params() {
    ModelParams p;
    p.alpha = {0.5907, 1.0, 0.2893, 0.0549};
    p.rho = -0.6843;
    p.ou = OuSpec::constant_h(1.0 / 52.0, -0.0358);
    return p;
}

ModelParams constant_vol_params(double rho = -0.7) {
    ModelParams p;
    p.alpha = {1.0, 0.0, 0.0, 0.0};
    p.rho = rho;
    p.ou = OuSpec::constant_h(1.0 / 52.0, -0.0358);
    return p;
}

const ForwardVarianceCurve kFlat = ForwardVarianceCurve::parametric(0.04, 1.0, 0.04);

McConfig small_cfg(std::size_t n_paths = 1 << 14, std::uint64_t seed = 7u) {
    McConfig cfg;
    cfg.n_paths = n_paths;
    cfg.steps_per_year = 312;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("McConfig validation") {
    McConfig cfg = small_cfg();
    CHECK_NOTHROW(cfg.validate());
    cfg.n_paths = 101;
    CHECK_THROWS_AS(cfg.validate(), InvalidDomain); // antithetic needs even paths
    cfg.antithetic = false;
    CHECK_NOTHROW(cfg.validate());
    cfg.steps_per_year = 12;
    CHECK_THROWS_AS(cfg.validate(), InvalidDomain);
}

TEST_CASE("rho = 0 freezes the F^W leg") {
    ModelParams p = published_params();
    p.rho = 0.0;
    const auto grid = make_uniform_grid(0.5, 104, 128, true);
    const auto records = simulate_sw(p, kFlat, grid, 5u);
    for (const auto& r : records) {
        CHECK(r.log_sw == 0.0);
        CHECK(r.integrated_rho2_var == 0.0);
        CHECK(r.integrated_total_var > 0.0);
    }
}

TEST_CASE("simulate_sw consumes exactly the simulate_exact draws") {
    const auto params = published_params();
    const auto grid = make_uniform_grid(0.25, 312, 64, true);
    const auto records = simulate_sw(params, kFlat, grid, 42u);
    const auto paths = simulate_exact(params.ou, grid, 42u);
    for (std::size_t p = 0; p < grid.n_paths; ++p)
        CHECK(records[p].x_terminal == paths.state(p, paths.n_times - 1));
}

TEST_CASE("simulate_sw recursion replays from the exact-path draws") {
    const auto params = published_params();
    const auto grid = make_uniform_grid(0.3, 104, 8, true);
    const auto records = simulate_sw(params, kFlat, grid, 11u);
    const auto paths = simulate_exact(params.ou, grid, 11u);
    for (std::size_t p = 0; p < grid.n_paths; ++p) {
        double log_sw = 0.0, tv = 0.0;
        for (std::size_t i = 0; i + 1 < grid.times.size(); ++i) {
            const double dt = grid.times[i + 1] - grid.times[i];
            const double sigma =
                vol_from_state(params, kFlat, grid.times[i], paths.state(p, i));
            tv += sigma * sigma * dt;
            log_sw += -0.5 * params.rho * params.rho * sigma * sigma * dt +
                      params.rho * sigma * std::sqrt(dt) * paths.draw(p, i);
        }
        CHECK(records[p].log_sw == doctest::Approx(log_sw).epsilon(1e-13));
        CHECK(records[p].integrated_total_var == doctest::Approx(tv).epsilon(1e-13));
        CHECK(records[p].integrated_rho2_var ==
              doctest::Approx(params.rho * params.rho * tv).epsilon(1e-13));
    }
}

TEST_CASE("constant-vol log S^W is Gaussian with the closed-form moments") {
    const auto p = constant_vol_params(-0.7);
    const double T = 0.5, sigma2 = 0.04;
    const auto grid = make_uniform_grid(T, 104, 200'000, false);
    const auto records = simulate_sw(p, kFlat, grid, 99u);
    std::vector<double> vals(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) vals[i] = records[i].log_sw;
    const auto stat = testutil::mean_and_error(vals);
    const double expected_mean = -0.5 * p.rho * p.rho * sigma2 * T;
    const double expected_var = p.rho * p.rho * sigma2 * T;
    CHECK(std::fabs(stat.mean - expected_mean) <= 5.0 * stat.std_error);
    std::vector<double> sq(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        sq[i] = (vals[i] - expected_mean) * (vals[i] - expected_mean);
    const auto vstat = testutil::mean_and_error(sq);
    CHECK(std::fabs(vstat.mean - expected_var) <= 5.0 * vstat.std_error);
    // per-path integrated variance is deterministic here
    for (const auto& r : records)
        CHECK(r.integrated_total_var == doctest::Approx(sigma2 * T).epsilon(1e-12));
}

TEST_CASE("integrated variance averages to the curve's Riemann sum") {
    const auto params = published_params();
    const auto curve = ForwardVarianceCurve::parametric(0.03, 2.0, 0.06);
    const double T = 0.5;
    const auto grid = make_uniform_grid(T, 312, 1'000'000, true);
    const auto records = simulate_sw(params, curve, grid, 2024u);
    std::vector<double> tv(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) tv[i] = records[i].integrated_total_var;
    const auto stat = testutil::mean_and_error(tv);
    double riemann = 0.0;
    for (std::size_t i = 0; i + 1 < grid.times.size(); ++i)
        riemann += curve.value(grid.times[i]) * (grid.times[i + 1] - grid.times[i]);
    CHECK(std::fabs(stat.mean - riemann) <= 5.0 * stat.std_error);
    // and the Riemann sum tracks the integral at this resolution
    const double integral = adaptive_simpson([&](double t) { return curve.value(t); }, 0.0, T);
    CHECK(riemann == doctest::Approx(integral).epsilon(2e-3));
}

TEST_CASE("constant-vol mixed price hits the Black formula") {
    const auto p = constant_vol_params(-0.7);
    const McConfig cfg = small_cfg(1 << 15);
    for (double k : {0.8, 1.0, 1.25}) {
        const auto mc = mixed_call_price(p, kFlat, 1.0, 0.5, k, cfg);
        const double ref = black_price(1.0, k, 0.5, 0.2, OptionType::Call);
        CHECK(std::fabs(mc.value - ref) <= std::max(3.0 * mc.std_error, 1e-10));
        // analytic control variate collapses the estimator variance
        CHECK(mc.std_error < 1e-10);
    }
}

TEST_CASE("rho = 0 constant-vol estimator is deterministic") {
    const auto p = constant_vol_params(0.0);
    McConfig cfg = small_cfg(256);
    cfg.control_variate = false;
    const auto mc = mixed_call_price(p, kFlat, 1.0, 0.25, 1.0, cfg);
    CHECK(mc.value == doctest::Approx(black_price(1.0, 1.0, 0.25, 0.2, OptionType::Call))
                          .epsilon(1e-12));
    CHECK(mc.std_error == 0.0);
}

TEST_CASE("put-call parity within joint error") {
    const auto params = published_params();
    const McConfig cfg = small_cfg(1 << 15);
    const double k = 1.05, T = 0.25;
    const auto call = mixed_option_price(params, kFlat, 1.0, T, k, OptionType::Call, cfg);
    const auto put = mixed_option_price(params, kFlat, 1.0, T, k, OptionType::Put, cfg);
    const double gap = (call.value - put.value) - (1.0 - k);
    const double joint = std::sqrt(call.std_error * call.std_error +
                                   put.std_error * put.std_error);
    CHECK(std::fabs(gap) <= std::max(3.0 * joint, 1e-10));
}

TEST_CASE("turbocharged estimator beats the naive estimator at equal budget") {
    const auto params = published_params();
    McConfig cfg = small_cfg(1 << 14, 3u);
    const auto turbo = mixed_call_price(params, kFlat, 1.0, 0.25, 1.0, cfg);
    const auto naive = naive_option_price(params, kFlat, 1.0, 0.25, 1.0, OptionType::Call, cfg);
    CHECK(turbo.std_error < naive.std_error);
    // both should agree on the value within joint noise
    const double joint = std::sqrt(turbo.std_error * turbo.std_error +
                                   naive.std_error * naive.std_error);
    CHECK(std::fabs(turbo.value - naive.value) <= 4.0 * joint);
}

TEST_CASE("control variate preserves the mean and reduces variance") {
    const auto params = published_params();
    McConfig with = small_cfg(1 << 15, 17u);
    McConfig without = with;
    without.control_variate = false;
    const auto a = mixed_call_price(params, kFlat, 1.0, 0.25, 1.0, with);
    const auto b = mixed_call_price(params, kFlat, 1.0, 0.25, 1.0, without);
    const double joint = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(std::fabs(a.value - b.value) <= 3.0 * joint);
    CHECK(a.std_error <= b.std_error);
}

TEST_CASE("antithetic pair averaging is symmetric under a global draw flip") {
    const auto params = published_params();
    const auto grid = make_uniform_grid(0.25, 104, 32, true);
    const auto records = simulate_sw(params, kFlat, grid, 23u);
    // flipping Y -> -Y swaps the members of each antithetic pair, so any
    // pair-averaged statistic is unchanged identically; verify the pairing
    const auto paths = simulate_exact(params.ou, grid, 23u);
    for (std::size_t k = 0; k + 1 < grid.n_paths; k += 2)
        for (std::size_t i = 0; i + 1 < paths.n_times; ++i)
            CHECK(paths.draw(k, i) == -paths.draw(k + 1, i));
    const double a = 0.5 * (std::exp(records[0].log_sw) + std::exp(records[1].log_sw));
    const double b = 0.5 * (std::exp(records[1].log_sw) + std::exp(records[0].log_sw));
    CHECK(a == b);
}

TEST_CASE("smile on shared paths: flat for constant vol, stable across seeds") {
    const auto p = constant_vol_params(-0.7);
    McConfig cfg = small_cfg(100'000 / 2 * 2, 5u);
    cfg.control_variate = false; // exercise the stochastic path
    const std::vector<double> strikes{0.9, 0.95, 1.0, 1.05, 1.1};
    const auto smile = spx_smile(p, kFlat, 1.0, 0.25, strikes, cfg);
    for (const auto& pt : smile) {
        REQUIRE(pt.ok);
        CHECK(std::fabs(pt.implied_vol - 0.2) < 1e-3); // 10 bps
        CHECK(pt.iv_low <= pt.implied_vol);
        CHECK(pt.implied_vol <= pt.iv_high);
    }

    const auto params = published_params();
    McConfig run1 = small_cfg(1 << 15, 1u);
    McConfig run2 = small_cfg(1 << 15, 2u);
    const auto s1 = spx_smile(params, kFlat, 1.0, 0.25, strikes, run1);
    const auto s2 = spx_smile(params, kFlat, 1.0, 0.25, strikes, run2);
    for (std::size_t i = 0; i < strikes.size(); ++i) {
        REQUIRE(s1[i].ok);
        REQUIRE(s2[i].ok);
        const double band1 = s1[i].iv_high - s1[i].implied_vol;
        const double band2 = s2[i].iv_high - s2[i].implied_vol;
        CHECK(std::fabs(s1[i].implied_vol - s2[i].implied_vol) <=
              3.0 * std::sqrt(band1 * band1 + band2 * band2) + 1e-6);
    }
}

TEST_CASE("at-the-money skew has the sign of rho") {
    const auto params = published_params();
    McConfig cfg = small_cfg(1 << 16, 9u);
    const auto smile = spx_smile(params, kFlat, 1.0, 0.25, {0.98, 1.02}, cfg);
    REQUIRE(smile[0].ok);
    REQUIRE(smile[1].ok);
    const double lo_se = smile[0].iv_high - smile[0].implied_vol;
    const double hi_se = smile[1].iv_high - smile[1].implied_vol;
    const double diff = smile[1].implied_vol - smile[0].implied_vol;
    CHECK(diff < 0.0);
    CHECK(std::fabs(diff) > 3.0 * std::sqrt(lo_se * lo_se + hi_se * hi_se));
}

TEST_CASE("martingale check") {
    // rho = 0: the per-path conditional mean is identically 1
    ModelParams p0 = published_params();
    p0.rho = 0.0;
    McConfig cfg = small_cfg(1 << 12);
    auto mc = martingale_check(p0, kFlat, 0.5, cfg);
    CHECK(mc.value == 1.0);
    CHECK(mc.std_error == 0.0);

    // constant vol, any rho
    mc = martingale_check(constant_vol_params(-0.9), kFlat, 0.5, cfg);
    CHECK(std::fabs(mc.value - 1.0) <= std::max(3.0 * mc.std_error, 1e-12));

    // published parameters
    McConfig big = small_cfg(1 << 17, 31u);
    mc = martingale_check(published_params(), kFlat, 1.0, big);
    CHECK(std::fabs(mc.value - 1.0) <= 3.0 * mc.std_error);
    CHECK(mc.n_effective == (std::size_t{1} << 16));

    ModelParams bad = published_params();
    bad.rho = 0.0; // fine
    CHECK_NOTHROW(martingale_check(bad, kFlat, 0.1, cfg));
}

TEST_CASE("step-halving weak error stays below quote resolution") {
    const auto params = published_params();
    McConfig coarse = small_cfg(1'000'000, 101u);
    coarse.steps_per_year = 312;
    McConfig fine = coarse;
    fine.steps_per_year = 624;
    const double T = 0.25, K = 1.0;
    const auto a = mixed_call_price(params, kFlat, 1.0, T, K, coarse);
    const auto b = mixed_call_price(params, kFlat, 1.0, T, K, fine);
    // The left-endpoint scheme carries a real O(dt) weak error (~11 vol bps at
    // the default resolution) that the variance-reduced estimator resolves, so
    // a 1-standard-error bound cannot hold; it is kept visible as a warning.
    WARN(std::fabs(a.value - b.value) <= std::max(a.std_error, b.std_error));
    // hard bound: the shift stays below a 25 bps implied-vol move
    const double vega = black_vega(1.0, K, T, 0.2);
    CHECK(std::fabs(a.value - b.value) <= 0.0025 * vega);
}
