#pragma once

#include <cstdint>
#include <vector>

#include "quintic/errors.hpp"

namespace quintic {

/// Mean-reversion / vol-of-vol description of the driving factor X:
///   dX_t = -lambda(t) X_t dt + eta(t) dW_t,  X_0 = 0,
/// with lambda(t) = (1/2 - H(t))/epsilon and eta(t) = epsilon^{H(t)-1/2}.
/// H is either a constant h < 1/2 or H(t) = h0 e^{-kappa t} + h_inf (1 - e^{-kappa t}).
struct OuSpec {
    double epsilon = 1.0 / 52.0;
    bool td = false;
    double h = 0.0;                          // constant-H mode
    double h0 = 0.0, h_inf = 0.0, kappa = 1.0; // time-dependent-H mode

    static OuSpec constant_h(double epsilon, double h);
    static OuSpec time_dependent_h(double epsilon, double h0, double h_inf, double kappa);

    bool time_dependent() const { return td; }
    double h_at(double t) const;
    double lambda_at(double t) const;
    double eta_at(double t) const;
    /// Closed-form integral of lambda over [0, t].
    double lambda_integral(double t) const;
};

/// Var[X_t].
double ou_variance(const OuSpec& spec, double t);

/// Variance of the innovation G_T^u = X_u - X_T e^{-∫_T^u lambda}; Gaussian,
/// mean zero, independent of F_T.
double conditional_variance(const OuSpec& spec, double T, double u);

/// e^{-∫_T^u lambda(s) ds}, the factor multiplying X_T in the decomposition of X_u.
double decay_factor(const OuSpec& spec, double T, double u);

struct PathGrid {
    std::vector<double> times;  // times[0] = 0, strictly increasing
    std::size_t n_paths = 0;
    bool antithetic = false;

    void validate() const;
    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
};

PathGrid make_uniform_grid(double maturity, int steps_per_year, std::size_t n_paths,
                           bool antithetic);

struct OuPaths {
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    std::vector<double> x;      // row-major [n_paths][n_times]
    std::vector<double> draws;  // row-major [n_paths][n_times - 1]

    double state(std::size_t p, std::size_t i) const { return x[p * n_times + i]; }
    double draw(std::size_t p, std::size_t i) const { return draws[p * (n_times - 1) + i]; }
};

/// Exact-in-law simulation of X on the grid:
///   X_{t_{i+1}} = X_{t_i} decay_factor(t_i, t_{i+1}) + sd_i Y_i,
/// sd_i^2 = conditional_variance(t_i, t_{i+1}), Y_i iid standard normal.
/// Path 2k+1 uses the negated draws of path 2k when antithetic. The draws are
/// returned so the SPX pricer can reuse them for the correlated Brownian leg.
/// Deterministic given (spec, grid, seed).
OuPaths simulate_exact(const OuSpec& spec, const PathGrid& grid, std::uint64_t seed);

} // namespace quintic
