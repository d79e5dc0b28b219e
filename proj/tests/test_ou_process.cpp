#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quintic/ou_process.hpp"
#include "test_helpers.hpp"

using namespace quintic;

namespace {

const OuSpec kPublished = OuSpec::constant_h(1.0 / 52.0, -0.0358);
const OuSpec kPublishedTd = OuSpec::time_dependent_h(0.1359, 0.3176, -1.3665, 1.2);

// standard error of a Gaussian sample variance
double variance_se(double var, std::size_t n) { return var * std::sqrt(2.0 / double(n - 1)); }

} // namespace

TEST_CASE("OuSpec validation") {
    CHECK_THROWS_AS(OuSpec::constant_h(0.0, 0.0), InvalidDomain);
    CHECK_THROWS_AS(OuSpec::constant_h(1.0, 0.5), InvalidDomain); // H = 1/2 rejected
    CHECK_NOTHROW(OuSpec::constant_h(1.0, 0.4999));
    CHECK_THROWS_AS(OuSpec::time_dependent_h(1.0, 0.5, -1.0, 1.0), InvalidDomain);
    CHECK_THROWS_AS(OuSpec::time_dependent_h(1.0, 0.1, 0.6, 1.0), InvalidDomain);
    CHECK_THROWS_AS(OuSpec::time_dependent_h(1.0, 0.1, -1.0, 0.0), InvalidDomain);
    CHECK_NOTHROW(kPublishedTd);
}

TEST_CASE("ou_variance basics") {
    CHECK(ou_variance(kPublished, 0.0) == 0.0);
    CHECK(ou_variance(kPublishedTd, 0.0) == 0.0);
    // stationary limit eps^{2H}/(1-2H) = 1 for eps = 1, H = 0
    const auto unit = OuSpec::constant_h(1.0, 0.0);
    CHECK(ou_variance(unit, 80.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(ou_variance(unit, -0.1), InvalidDomain);
}

TEST_CASE("ou_variance matches one-step exact simulation") {
    const double t = 0.5;
    PathGrid grid;
    grid.times = {0.0, t};
    grid.n_paths = 1'000'000;
    grid.antithetic = false;
    for (const OuSpec& spec : {kPublished, kPublishedTd}) {
        const auto paths = simulate_exact(spec, grid, 77u);
        std::vector<double> sq(paths.n_paths);
        for (std::size_t p = 0; p < paths.n_paths; ++p) {
            const double x = paths.state(p, 1);
            sq[p] = x * x;
        }
        const auto stat = testutil::mean_and_error(sq);
        const double expected = ou_variance(spec, t);
        CHECK(std::fabs(stat.mean - expected) <= 5.0 * variance_se(expected, paths.n_paths));
    }
}

TEST_CASE("conditional_variance identities") {
    CHECK(conditional_variance(kPublished, 0.3, 0.3) == 0.0);
    CHECK(conditional_variance(kPublished, 0.0, 0.7) ==
          doctest::Approx(ou_variance(kPublished, 0.7)).epsilon(1e-14));
    CHECK(conditional_variance(kPublishedTd, 0.25, 0.25) == 0.0);
    CHECK(conditional_variance(kPublishedTd, 0.0, 0.7) ==
          doctest::Approx(ou_variance(kPublishedTd, 0.7)).epsilon(1e-14));
    CHECK_THROWS_AS(conditional_variance(kPublished, 0.5, 0.4), InvalidDomain);
}

TEST_CASE("conditional_variance matches the simulated innovation") {
    const double T = 0.25, u = 0.3;
    PathGrid grid;
    grid.times = {0.0, T, u};
    grid.n_paths = 1'000'000;
    grid.antithetic = false;
    for (const OuSpec& spec : {kPublished, kPublishedTd}) {
        const auto paths = simulate_exact(spec, grid, 1234u);
        const double decay = decay_factor(spec, T, u);
        std::vector<double> sq(paths.n_paths);
        for (std::size_t p = 0; p < paths.n_paths; ++p) {
            const double g = paths.state(p, 2) - decay * paths.state(p, 1);
            sq[p] = g * g;
        }
        const auto stat = testutil::mean_and_error(sq);
        const double expected = conditional_variance(spec, T, u);
        CHECK(std::fabs(stat.mean - expected) <= 5.0 * variance_se(expected, paths.n_paths));
    }
}

TEST_CASE("decay_factor basics") {
    CHECK(decay_factor(kPublished, 0.4, 0.4) == 1.0);
    const auto unit = OuSpec::constant_h(1.0, 0.0);
    // half-life: exp(-(1/2) * 2 ln 2) = 1/2
    CHECK(decay_factor(unit, 0.0, 2.0 * std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    // strictly decreasing in u
    double prev = 1.0;
    for (double u = 0.1; u < 2.0; u += 0.1) {
        const double d = decay_factor(kPublishedTd, 0.0, u);
        CHECK(d < prev);
        CHECK(d > 0.0);
        prev = d;
    }
}

TEST_CASE("time-dependent H with h0 = h_inf degenerates to constant H") {
    const double eps = 1.0 / 52.0, h = -0.2;
    const auto c = OuSpec::constant_h(eps, h);
    const auto td = OuSpec::time_dependent_h(eps, h, h, 3.0);
    for (double t : {0.05, 0.3, 1.0}) {
        CHECK(ou_variance(td, t) == doctest::Approx(ou_variance(c, t)).epsilon(1e-12));
        CHECK(decay_factor(td, 0.1, 0.1 + t) ==
              doctest::Approx(decay_factor(c, 0.1, 0.1 + t)).epsilon(1e-12));
        CHECK(conditional_variance(td, 0.1, 0.1 + t) ==
              doctest::Approx(conditional_variance(c, 0.1, 0.1 + t)).epsilon(1e-12));
    }
}

TEST_CASE("simulate_exact antithetic pairing is an exact negation") {
    PathGrid grid = make_uniform_grid(0.5, 52, 64, true);
    const auto paths = simulate_exact(kPublished, grid, 99u);
    for (std::size_t k = 0; k + 1 < paths.n_paths; k += 2) {
        for (std::size_t i = 0; i < paths.n_times; ++i)
            CHECK(paths.state(k, i) == -paths.state(k + 1, i));
        for (std::size_t i = 0; i + 1 < paths.n_times; ++i)
            CHECK(paths.draw(k, i) == -paths.draw(k + 1, i));
    }
}

TEST_CASE("simulate_exact reproduces its own recursion from the returned draws") {
    PathGrid grid = make_uniform_grid(0.3, 104, 8, false);
    const auto paths = simulate_exact(kPublishedTd, grid, 7u);
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        double x = 0.0;
        CHECK(paths.state(p, 0) == 0.0);
        for (std::size_t i = 0; i + 1 < paths.n_times; ++i) {
            const double sd = std::sqrt(conditional_variance(kPublishedTd, grid.times[i],
                                                             grid.times[i + 1]));
            x = x * decay_factor(kPublishedTd, grid.times[i], grid.times[i + 1]) +
                sd * paths.draw(p, i);
            CHECK(paths.state(p, i + 1) == doctest::Approx(x).epsilon(1e-15));
        }
    }
}

TEST_CASE("simulate_exact marginals pass a KS test against N(0, var)") {
    // 1w, 1m, 1y marginals, both H modes, 0.1% level
    const std::vector<double> horizons{7.0 / 365.0, 30.0 / 365.0, 1.0};
    for (const OuSpec& spec : {kPublished, kPublishedTd}) {
        for (double t : horizons) {
            PathGrid grid;
            grid.times = {0.0, t};
            grid.n_paths = 100'000;
            grid.antithetic = false;
            const auto paths = simulate_exact(spec, grid, 4242u);
            std::vector<double> terminal(paths.n_paths);
            for (std::size_t p = 0; p < paths.n_paths; ++p) terminal[p] = paths.state(p, 1);
            const double ks = testutil::ks_statistic_normal(std::move(terminal),
                                                            std::sqrt(ou_variance(spec, t)));
            CHECK(ks < testutil::kKsCritical01Pct);
        }
    }
}

TEST_CASE("grid refinement leaves the marginal law unchanged") {
    const double t = 0.25;
    const std::size_t n = 400'000;
    PathGrid coarse;
    coarse.times = {0.0, t};
    coarse.n_paths = n;
    coarse.antithetic = false;
    PathGrid fine = make_uniform_grid(t, 256, n, false);

    for (const OuSpec& spec : {kPublished, kPublishedTd}) {
        const auto pc = simulate_exact(spec, coarse, 31u);
        const auto pf = simulate_exact(spec, fine, 32u);
        std::vector<double> sq_c(n), sq_f(n), m4_c(n), m4_f(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double xc = pc.state(p, 1);
            const double xf = pf.state(p, pf.n_times - 1);
            sq_c[p] = xc * xc;
            sq_f[p] = xf * xf;
            m4_c[p] = sq_c[p] * sq_c[p];
            m4_f[p] = sq_f[p] * sq_f[p];
        }
        const auto v_c = testutil::mean_and_error(sq_c);
        const auto v_f = testutil::mean_and_error(sq_f);
        CHECK(std::fabs(v_c.mean - v_f.mean) <=
              5.0 * std::sqrt(v_c.std_error * v_c.std_error + v_f.std_error * v_f.std_error));
        const auto k_c = testutil::mean_and_error(m4_c);
        const auto k_f = testutil::mean_and_error(m4_f);
        CHECK(std::fabs(k_c.mean - k_f.mean) <=
              5.0 * std::sqrt(k_c.std_error * k_c.std_error + k_f.std_error * k_f.std_error));
    }
}

TEST_CASE("lag-1 autocorrelation matches decay_factor") {
    const double t = 0.25, delta = 0.05;
    PathGrid grid;
    grid.times = {0.0, t, t + delta};
    grid.n_paths = 1'000'000;
    grid.antithetic = false;
    for (const OuSpec& spec : {kPublished, kPublishedTd}) {
        const auto paths = simulate_exact(spec, grid, 2024u);
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t p = 0; p < paths.n_paths; ++p) {
            const double a = paths.state(p, 1);
            const double b = paths.state(p, 2);
            sxy += a * b;
            sxx += a * a;
            syy += b * b;
        }
        const double corr = sxy / std::sqrt(sxx * syy);
        const double expected = decay_factor(spec, t, t + delta) *
                                std::sqrt(ou_variance(spec, t) / ou_variance(spec, t + delta));
        const double se = (1.0 - expected * expected) / std::sqrt(double(paths.n_paths));
        CHECK(std::fabs(corr - expected) <= 5.0 * se);
    }
}

TEST_CASE("grid validation") {
    PathGrid g;
    g.times = {0.0, 1.0};
    g.n_paths = 3;
    g.antithetic = true;
    CHECK_THROWS_AS(g.validate(), InvalidDomain);
    g.antithetic = false;
    CHECK_NOTHROW(g.validate());
    g.times = {0.1, 1.0};
    CHECK_THROWS_AS(g.validate(), InvalidDomain);
    g.times = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(g.validate(), InvalidDomain);
    g.times = {};
    CHECK_THROWS_AS(g.validate(), InvalidDomain);
}
