#pragma once

#include <functional>
#include <vector>

namespace quintic {

struct NelderMeadOptions {
    int max_evals = 600;
    double f_tol = 1e-12;      // simplex spread termination
    double x_tol = 1e-10;
    int restarts = 0;          // re-seed a shrunk simplex at the best point
    double initial_step = 0.1; // fraction of the box width per coordinate
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool budget_exhausted = false;
};

/// Derivative-free simplex search with box constraints enforced by projection.
/// Every point handed to the objective lies inside [lower, upper]. The result
/// is never worse than f(x0).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0,
                             const std::vector<double>& lower,
                             const std::vector<double>& upper,
                             const NelderMeadOptions& opt = {});

} // namespace quintic
