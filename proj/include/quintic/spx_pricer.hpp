#pragma once

#include <cstdint>
#include <vector>

#include "quintic/model.hpp"
#include "quintic/numerics.hpp"
#include "quintic/ou_process.hpp"

namespace quintic {

struct McConfig {
    std::size_t n_paths = std::size_t{1} << 19;
    int steps_per_year = 312; // 6 steps per epsilon = 1/52 characteristic time
    std::uint64_t seed = 0;
    bool antithetic = true;
    bool control_variate = true;
    int threads = 1; // 0 = hardware concurrency

    void validate() const;
};

struct McPrice {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0; // pair-averaged sample count
};

/// Terminal per-path state of the F^W-measurable leg.
struct PathRecord {
    double log_sw = 0.0;               // log(S^W)_T, Euler with left-endpoint vol
    double integrated_rho2_var = 0.0;  // rho^2 * sum sigma_{t_i}^2 dt_i
    double integrated_total_var = 0.0; // sum sigma_{t_i}^2 dt_i
    double x_terminal = 0.0;           // X_T, for diagnostics
};

/// Simulates X exactly and log(S^W) by Euler, driven by one shared set of
/// Gaussian draws per path (identical to the draws simulate_exact returns for
/// the same grid and seed).
std::vector<PathRecord> simulate_sw(const ModelParams& params, const ForwardVarianceCurve& curve,
                                    const PathGrid& grid, std::uint64_t seed, int threads = 1);

/// Conditional-Black (mixing) estimator with antithetic pairing and an optional
/// control variate built on the deterministic variance proxy.
McPrice mixed_option_price(const ModelParams& params, const ForwardVarianceCurve& curve,
                           double spot, double maturity, double strike, OptionType flag,
                           const McConfig& cfg);

inline McPrice mixed_call_price(const ModelParams& params, const ForwardVarianceCurve& curve,
                                double spot, double maturity, double strike, const McConfig& cfg) {
    return mixed_option_price(params, curve, spot, maturity, strike, OptionType::Call, cfg);
}

/// Plain two-Brownian Euler estimator (no conditioning, no antithetic, no
/// control variate); the baseline the turbocharged estimator is compared to.
McPrice naive_option_price(const ModelParams& params, const ForwardVarianceCurve& curve,
                           double spot, double maturity, double strike, OptionType flag,
                           const McConfig& cfg);

struct SpxSmilePoint {
    double strike = 0.0;
    McPrice price;
    double implied_vol = 0.0;
    double iv_low = 0.0;  // from inverting value - 1 std error
    double iv_high = 0.0; // from inverting value + 1 std error
    bool ok = false;      // false when the inversion band was unusable
};

/// All strikes priced on one shared path set (common random numbers).
std::vector<SpxSmilePoint> spx_smile(const ModelParams& params, const ForwardVarianceCurve& curve,
                                     double spot, double maturity,
                                     const std::vector<double>& strikes, const McConfig& cfg);

/// Monte Carlo estimate of E[S_T]/S_0 through the mixing representation
/// (per-path conditional mean). Expected value 1 for a true martingale.
McPrice martingale_check(const ModelParams& params, const ForwardVarianceCurve& curve,
                         double maturity, const McConfig& cfg);

} // namespace quintic
