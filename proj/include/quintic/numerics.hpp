#pragma once

#include <functional>
#include <vector>

#include "quintic/errors.hpp"

namespace quintic {

double norm_cdf(double x);
double norm_pdf(double x);

/// p-th absolute moment of N(0, sigma^2): 0 for odd p, sigma^p (p-1)!! for even p.
double gaussian_moment(int p, double sigma);

enum class QuadKind {
    GaussHermiteProbabilist, // integrates against the standard normal density
    GaussLegendre            // integrates over [a, b]
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    QuadKind kind = QuadKind::GaussLegendre;

    std::size_t size() const { return nodes.size(); }

    double integrate(const std::function<double(double)>& f) const {
        double acc = 0.0, comp = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double term = weights[i] * f(nodes[i]) - comp;
            const double next = acc + term;
            comp = (next - acc) - term;
            acc = next;
        }
        return acc;
    }
};

/// Nodes and weights for the requested family. [a, b] applies to Gauss-Legendre
/// only. Generation is stable up to n = 1000; Hermite weights that fall below
/// the smallest normal double are floored at it rather than flushed to zero.
QuadratureRule make_quadrature(QuadKind kind, int n, double a = 0.0, double b = 1.0);

enum class OptionType { Call, Put };

struct BlackInputs {
    double forward;   // F(T) > 0
    double strike;    // K > 0
    double maturity;  // T > 0, year fraction
    double vol;       // sigma(K, T) >= 0
    OptionType flag = OptionType::Call;
};

/// Undiscounted Black price (the model carries no rates or dividends).
double black_price(const BlackInputs& in);
double black_price(double forward, double strike, double maturity, double vol,
                   OptionType flag = OptionType::Call);
double black_vega(double forward, double strike, double maturity, double vol);

/// Unique vol matching the given price, to absolute price tolerance 1e-10.
/// Bisection bracketed on [1e-6, 5] refined by safeguarded Newton steps.
/// Throws OutOfBoundsPrice when price is not strictly between intrinsic value
/// and the no-arbitrage bound (forward for calls, strike for puts).
double implied_vol(double price, double forward, double strike, double maturity,
                   OptionType flag = OptionType::Call);

/// Adaptive Simpson to the requested tolerances (used for the log-contract
/// strike integrals).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-8, double abs_tol = 1e-14);

} // namespace quintic
