#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "quintic/model.hpp"
#include "quintic/numerics.hpp"

namespace quintic {

/// VIX window, 30 days under ACT/365.
inline constexpr double kVixDelta = 30.0 / 365.0;

/// VIX_T^2 = scale * sum_i beta_i X_T^i with X_T ~ N(0, sigma_xt^2).
struct VixPolynomial {
    double maturity = 0.0;
    std::array<double, 11> beta{};
    double sigma_xt = 0.0;
    double scale = 0.0; // 100^2 / Delta

    /// VIX^2 at state x, in VIX-points-squared units.
    double h(double x) const {
        double acc = beta[10];
        for (int i = 9; i >= 0; --i) acc = acc * x + beta[i];
        return scale * acc;
    }
};

/// Conditional-moment construction of the VIX^2 polynomial; the u-integrals use
/// Gauss-Legendre on [T, T+Delta], split at curve breakpoints for piecewise
/// curves.
VixPolynomial build_vix_polynomial(const ModelParams& params, const ForwardVarianceCurve& curve,
                                   double maturity, int gl_points = 128);

/// E[VIX_T] = sum_j w_j sqrt(h(sigma_xt x_j)) under the probabilist
/// Gauss-Hermite rule. Throws NegativePolynomial if h turns negative at a node.
double vix_future(const VixPolynomial& poly, const QuadratureRule& quad);

/// E[(VIX_T - K)^+] (or the put counterpart).
double vix_option(const VixPolynomial& poly, const QuadratureRule& quad, double strike,
                  OptionType flag = OptionType::Call);

struct VixSmilePoint {
    double strike = 0.0;
    double price = 0.0;
    std::optional<double> implied_vol; // empty when inversion was skipped
};

struct VixSmile {
    double maturity = 0.0;
    double future = 0.0;
    std::vector<VixSmilePoint> points;
    std::vector<std::string> skipped; // one report entry per skipped strike
};

/// Implied vols against the model's own future as forward; out-of-bounds
/// strikes are skipped with a report entry, not fatal.
VixSmile vix_smile(const ModelParams& params, const ForwardVarianceCurve& curve, double maturity,
                   const std::vector<double>& strikes, int quad_nodes = 400);

} // namespace quintic
