#include "quintic/vix_pricer.hpp"

#include <algorithm>
#include <cmath>

namespace quintic {

namespace {

// binomial coefficients up to C(10, 10)
constexpr std::array<std::array<double, 11>, 11> make_binomials() {
    std::array<std::array<double, 11>, 11> c{};
    for (int n = 0; n <= 10; ++n) {
        c[n][0] = 1.0;
        for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0.0);
    }
    return c;
}

constexpr auto kBinom = make_binomials();

void accumulate_beta(const ModelParams& params, const ForwardVarianceCurve& curve, double T,
                     double lo, double hi, const QuadratureRule& unit_rule,
                     const std::array<double, 11>& conv, std::array<double, 11>& beta) {
    for (std::size_t j = 0; j < unit_rule.size(); ++j) {
        const double u = lo + (hi - lo) * unit_rule.nodes[j];
        const double w = (hi - lo) * unit_rule.weights[j];
        const double density = w * curve.value(u) / normalization_g(params, u);
        const double cond_sd = std::sqrt(conditional_variance(params.ou, T, u));
        const double decay = decay_factor(params.ou, T, u);
        std::array<double, 11> moment{};
        for (int m = 0; m <= 10; ++m) moment[m] = gaussian_moment(m, cond_sd);
        double decay_pow = 1.0;
        for (int i = 0; i <= 10; ++i) {
            double sum = 0.0;
            for (int k = i; k <= 10; ++k) {
                if (conv[k] == 0.0) continue;
                sum += conv[k] * kBinom[k][i] * moment[k - i];
            }
            beta[i] += density * sum * decay_pow;
            decay_pow *= decay;
        }
    }
}

} // namespace

VixPolynomial build_vix_polynomial(const ModelParams& params, const ForwardVarianceCurve& curve,
                                   double maturity, int gl_points) {
    params.validate();
    if (!(maturity > 0.0)) throw InvalidDomain("build_vix_polynomial: maturity must be > 0");
    const double T = maturity;
    const double hi = T + kVixDelta;
    const auto conv = self_convolve(params.alpha);
    const auto unit_rule = make_quadrature(QuadKind::GaussLegendre, gl_points, 0.0, 1.0);

    // split the window at curve breakpoints so each panel is smooth
    std::vector<double> edges{T};
    if (curve.kind() == ForwardVarianceCurve::Kind::PiecewiseConstant) {
        for (double b : curve.breakpoints())
            if (b > T && b < hi) edges.push_back(b);
    }
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());

    VixPolynomial poly;
    poly.maturity = T;
    poly.scale = 100.0 * 100.0 / kVixDelta;
    poly.sigma_xt = std::sqrt(ou_variance(params.ou, T));
    for (std::size_t e = 0; e + 1 < edges.size(); ++e)
        accumulate_beta(params, curve, T, edges[e], edges[e + 1], unit_rule, conv, poly.beta);

    // h is a conditional expectation of a non-negative quantity; verify on a
    // wide state grid that the numerical coefficients kept that property.
    const double span = 10.0 * std::max(poly.sigma_xt, 1e-8);
    for (int i = 0; i <= 500; ++i) {
        const double x = -span + 2.0 * span * double(i) / 500.0;
        if (poly.h(x) < 0.0)
            throw NegativePolynomial("build_vix_polynomial: VIX^2 polynomial negative at x = " +
                                     std::to_string(x));
    }
    return poly;
}

double vix_future(const VixPolynomial& poly, const QuadratureRule& quad) {
    if (quad.kind != QuadKind::GaussHermiteProbabilist)
        throw InvalidDomain("vix_future: requires a probabilist Gauss-Hermite rule");
    double acc = 0.0, comp = 0.0;
    for (std::size_t j = 0; j < quad.size(); ++j) {
        const double hx = poly.h(poly.sigma_xt * quad.nodes[j]);
        if (hx < 0.0)
            throw NegativePolynomial("vix_future: VIX^2 negative at a quadrature node");
        const double term = quad.weights[j] * std::sqrt(hx) - comp;
        const double next = acc + term;
        comp = (next - acc) - term;
        acc = next;
    }
    return acc;
}

double vix_option(const VixPolynomial& poly, const QuadratureRule& quad, double strike,
                  OptionType flag) {
    if (quad.kind != QuadKind::GaussHermiteProbabilist)
        throw InvalidDomain("vix_option: requires a probabilist Gauss-Hermite rule");
    if (!(strike > 0.0)) throw InvalidDomain("vix_option: strike must be > 0");
    const double sign = (flag == OptionType::Call) ? 1.0 : -1.0;

    // The payoff kinks where h(sigma x) = K^2; integrating the raw kink through
    // a fixed rule would cap the accuracy near 1e-3, so the Gaussian integral
    // is split at the exercise boundaries and each smooth piece is handled by
    // Gauss-Legendre panels against the normal density. The rule argument sets
    // the per-panel node budget.
    const double limit = 14.0; // the normal density is ~1e-43 out here
    auto in_region = [&](double x) {
        const double hx = poly.h(poly.sigma_xt * x);
        if (hx < 0.0) throw NegativePolynomial("vix_option: VIX^2 negative inside the support");
        return sign * (std::sqrt(hx) - strike) > 0.0;
    };

    // locate exercise boundaries by scanning for sign changes, then bisecting
    std::vector<double> edges{-limit};
    const int scan = 4000;
    bool prev_in = in_region(-limit);
    std::vector<bool> region_flags{prev_in};
    for (int i = 1; i <= scan; ++i) {
        const double x = -limit + 2.0 * limit * double(i) / scan;
        const bool cur_in = in_region(x);
        if (cur_in != prev_in) {
            double lo = x - 2.0 * limit / scan, hi = x;
            for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (in_region(mid) == prev_in) lo = mid; else hi = mid;
            }
            edges.push_back(0.5 * (lo + hi));
            region_flags.push_back(cur_in);
            prev_in = cur_in;
        }
    }
    edges.push_back(limit);

    const int panel_nodes = std::max<int>(32, static_cast<int>(quad.size()) / 4);
    const auto unit = make_quadrature(QuadKind::GaussLegendre, panel_nodes, 0.0, 1.0);
    double acc = 0.0;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        if (!region_flags[e]) continue;
        // keep sub-panels narrow so the per-panel rule is exact to roundoff
        const int pieces = std::max(1, static_cast<int>(std::ceil((edges[e + 1] - edges[e]) / 2.0)));
        for (int piece = 0; piece < pieces; ++piece) {
            const double lo = edges[e] + (edges[e + 1] - edges[e]) * double(piece) / pieces;
            const double hi = edges[e] + (edges[e + 1] - edges[e]) * double(piece + 1) / pieces;
            double panel = 0.0;
            for (std::size_t j = 0; j < unit.size(); ++j) {
                const double x = lo + (hi - lo) * unit.nodes[j];
                const double hx = poly.h(poly.sigma_xt * x);
                panel += unit.weights[j] * sign * (std::sqrt(std::max(hx, 0.0)) - strike) *
                         norm_pdf(x);
            }
            acc += (hi - lo) * panel;
        }
    }
    return acc;
}

VixSmile vix_smile(const ModelParams& params, const ForwardVarianceCurve& curve, double maturity,
                   const std::vector<double>& strikes, int quad_nodes) {
    const auto poly = build_vix_polynomial(params, curve, maturity);
    const auto quad = make_quadrature(QuadKind::GaussHermiteProbabilist, quad_nodes);
    VixSmile smile;
    smile.maturity = maturity;
    smile.future = vix_future(poly, quad);
    for (double k : strikes) {
        VixSmilePoint pt;
        pt.strike = k;
        pt.price = vix_option(poly, quad, k);
        try {
            pt.implied_vol = implied_vol(pt.price, smile.future, k, maturity, OptionType::Call);
        } catch (const OutOfBoundsPrice&) {
            smile.skipped.push_back("strike " + std::to_string(k) +
                                    ": price outside invertible band");
        }
        smile.points.push_back(pt);
    }
    return smile;
}

} // namespace quintic
