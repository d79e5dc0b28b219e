#include "quintic/ou_process.hpp"

#include <cmath>

#include "path_kernel.hpp"
#include "quintic/numerics.hpp"

namespace quintic {

namespace {

const QuadratureRule& gl64() {
    static const QuadratureRule rule = make_quadrature(QuadKind::GaussLegendre, 64, 0.0, 1.0);
    return rule;
}

} // namespace

OuSpec OuSpec::constant_h(double epsilon, double h) {
    if (!(epsilon > 0.0)) throw InvalidDomain("OuSpec: epsilon must be > 0");
    if (!(h < 0.5)) throw InvalidDomain("OuSpec: constant H must be < 1/2");
    OuSpec s;
    s.epsilon = epsilon;
    s.td = false;
    s.h = h;
    return s;
}

OuSpec OuSpec::time_dependent_h(double epsilon, double h0, double h_inf, double kappa) {
    if (!(epsilon > 0.0)) throw InvalidDomain("OuSpec: epsilon must be > 0");
    if (!(kappa > 0.0)) throw InvalidDomain("OuSpec: kappa must be > 0");
    // H(t) is monotone between h0 and h_inf, so the sup over t >= 0 is their max.
    if (!(h0 < 0.5 && h_inf < 0.5))
        throw InvalidDomain("OuSpec: H(t) must stay below 1/2 for all t");
    OuSpec s;
    s.epsilon = epsilon;
    s.td = true;
    s.h0 = h0;
    s.h_inf = h_inf;
    s.kappa = kappa;
    return s;
}

double OuSpec::h_at(double t) const {
    if (!td) return h;
    const double e = std::exp(-kappa * t);
    return h0 * e + h_inf * (1.0 - e);
}

double OuSpec::lambda_at(double t) const { return (0.5 - h_at(t)) / epsilon; }

double OuSpec::eta_at(double t) const { return std::pow(epsilon, h_at(t) - 0.5); }

double OuSpec::lambda_integral(double t) const {
    if (!td) return (0.5 - h) / epsilon * t;
    return ((0.5 - h_inf) * t - (h0 - h_inf) * (-std::expm1(-kappa * t)) / kappa) / epsilon;
}

double conditional_variance(const OuSpec& spec, double T, double u) {
    if (!(u >= T)) throw InvalidDomain("conditional_variance: requires u >= T");
    if (u == T) return 0.0;
    if (!spec.time_dependent()) {
        const double one_minus_2h = 1.0 - 2.0 * spec.h;
        return std::pow(spec.epsilon, 2.0 * spec.h) / one_minus_2h *
               (-std::expm1(-one_minus_2h * (u - T) / spec.epsilon));
    }
    // ∫_T^u exp(-2(Λ(u) - Λ(s))) eta(s)^2 ds by Gauss-Legendre on [T, u].
    const double lam_u = spec.lambda_integral(u);
    const auto& rule = gl64();
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) {
        const double s = T + (u - T) * rule.nodes[j];
        const double eta = spec.eta_at(s);
        acc += rule.weights[j] * std::exp(-2.0 * (lam_u - spec.lambda_integral(s))) * eta * eta;
    }
    return acc * (u - T);
}

double ou_variance(const OuSpec& spec, double t) {
    if (!(t >= 0.0)) throw InvalidDomain("ou_variance: requires t >= 0");
    return conditional_variance(spec, 0.0, t);
}

double decay_factor(const OuSpec& spec, double T, double u) {
    if (!(u >= T)) throw InvalidDomain("decay_factor: requires u >= T");
    if (!spec.time_dependent()) return std::exp(-(0.5 - spec.h) * (u - T) / spec.epsilon);
    return std::exp(-(spec.lambda_integral(u) - spec.lambda_integral(T)));
}

void PathGrid::validate() const {
    if (times.empty() || times[0] != 0.0)
        throw InvalidDomain("PathGrid: times must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw InvalidDomain("PathGrid: times must be strictly increasing");
    if (n_paths == 0) throw InvalidDomain("PathGrid: n_paths must be positive");
    if (antithetic && n_paths % 2 != 0)
        throw InvalidDomain("PathGrid: antithetic requires an even path count");
}

PathGrid make_uniform_grid(double maturity, int steps_per_year, std::size_t n_paths,
                           bool antithetic) {
    if (!(maturity > 0.0)) throw InvalidDomain("make_uniform_grid: maturity must be > 0");
    if (steps_per_year < 1) throw InvalidDomain("make_uniform_grid: steps_per_year must be >= 1");
    const auto n_steps = static_cast<std::size_t>(std::ceil(maturity * steps_per_year));
    PathGrid grid;
    grid.times.resize(std::max<std::size_t>(n_steps, 1) + 1);
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        grid.times[i] = maturity * double(i) / double(grid.times.size() - 1);
    grid.times.back() = maturity;
    grid.n_paths = n_paths;
    grid.antithetic = antithetic;
    grid.validate();
    return grid;
}

OuPaths simulate_exact(const OuSpec& spec, const PathGrid& grid, std::uint64_t seed) {
    grid.validate();
    const std::size_t n_times = grid.times.size();
    const std::size_t n_steps = n_times - 1;
    OuPaths out;
    out.n_paths = grid.n_paths;
    out.n_times = n_times;
    out.x.assign(grid.n_paths * n_times, 0.0);
    out.draws.assign(grid.n_paths * n_steps, 0.0);

    const auto cache = detail::make_step_cache(spec, grid.times);
    const std::size_t n_streams = grid.antithetic ? grid.n_paths / 2 : grid.n_paths;
    detail::walk_streams(cache, grid.antithetic, seed, 0, n_streams,
                         [&](std::size_t p, std::size_t i, double y, double, double x_next) {
                             out.x[p * n_times + i + 1] = x_next;
                             out.draws[p * n_steps + i] = y;
                         });
    return out;
}

} // namespace quintic
