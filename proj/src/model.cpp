#include "quintic/model.hpp"

#include <algorithm>
#include <cmath>

#include "quintic/numerics.hpp"

namespace quintic {

void ModelParams::validate() const {
    double total = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw InvalidDomain("ModelParams: alpha coefficients must be >= 0");
        total += a;
    }
    if (!(total > 0.0)) throw InvalidDomain("ModelParams: at least one alpha must be positive");
    if (!(rho >= -1.0 && rho <= 0.0)) throw InvalidDomain("ModelParams: rho must lie in [-1, 0]");
}

double poly_eval(const std::array<double, 4>& alpha, double x) {
    const double x2 = x * x;
    // alpha0 + x (alpha1 + x^2 (alpha3 + x^2 alpha5))
    return alpha[0] + x * (alpha[1] + x2 * (alpha[2] + x2 * alpha[3]));
}

std::array<double, 11> self_convolve(const std::array<double, 4>& alpha) {
    const std::array<double, 6> full{alpha[0], alpha[1], 0.0, alpha[2], 0.0, alpha[3]};
    std::array<double, 11> conv{};
    for (int j = 0; j <= 5; ++j)
        for (int k = 0; k <= 5; ++k) conv[j + k] += full[j] * full[k];
    return conv;
}

double normalization_g(const ModelParams& params, double u) {
    const auto conv = self_convolve(params.alpha);
    const double sigma = std::sqrt(ou_variance(params.ou, u));
    double g = 0.0;
    for (int k = 0; k <= 10; ++k)
        if (conv[k] != 0.0) g += conv[k] * gaussian_moment(k, sigma);
    if (!(g > 0.0))
        throw DegenerateNormalization("normalization_g: g(u) = 0 (u = 0 with alpha0 = 0)");
    return g;
}

ForwardVarianceCurve ForwardVarianceCurve::parametric(double a, double b, double c) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0))
        throw InvalidDomain("ForwardVarianceCurve: parametric a, b, c must be > 0");
    ForwardVarianceCurve cv;
    cv.kind_ = Kind::Parametric;
    cv.a_ = a;
    cv.b_ = b;
    cv.c_ = c;
    return cv;
}

ForwardVarianceCurve ForwardVarianceCurve::spline_squared(
    std::vector<std::pair<double, double>> nodes) {
    if (nodes.empty()) throw InvalidDomain("ForwardVarianceCurve: spline needs >= 1 node");
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i].second >= 0.0))
            throw InvalidDomain("ForwardVarianceCurve: spline node values must be >= 0");
        if (i > 0 && !(nodes[i].first > nodes[i - 1].first))
            throw InvalidDomain("ForwardVarianceCurve: spline node times must be distinct");
    }
    ForwardVarianceCurve cv;
    cv.kind_ = Kind::SplineSquared;
    cv.nodes_ = std::move(nodes);
    cv.build_spline();
    return cv;
}

ForwardVarianceCurve ForwardVarianceCurve::piecewise_constant(std::vector<double> breakpoints,
                                                              std::vector<double> values) {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
        throw InvalidDomain("ForwardVarianceCurve: need n+1 breakpoints for n values");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw InvalidDomain("ForwardVarianceCurve: breakpoints must increase");
    for (double v : values)
        if (!(v > 0.0)) throw InvalidDomain("ForwardVarianceCurve: piecewise values must be > 0");
    ForwardVarianceCurve cv;
    cv.kind_ = Kind::PiecewiseConstant;
    cv.breaks_ = std::move(breakpoints);
    cv.values_ = std::move(values);
    return cv;
}

void ForwardVarianceCurve::build_spline() {
    // Natural cubic spline second derivatives via the tridiagonal sweep.
    const std::size_t n = nodes_.size();
    spline_m_.assign(n, 0.0);
    if (n < 3) return; // constant or linear segment
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = nodes_[i].first - nodes_[i - 1].first;
        const double h1 = nodes_[i + 1].first - nodes_[i].first;
        const double rhs = 6.0 * ((nodes_[i + 1].second - nodes_[i].second) / h1 -
                                  (nodes_[i].second - nodes_[i - 1].second) / h0);
        const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 2; i >= 1; --i) spline_m_[i] = d[i] - c[i] * spline_m_[i + 1];
}

double ForwardVarianceCurve::value(double t) const {
    if (!(t >= 0.0)) throw InvalidDomain("ForwardVarianceCurve: t must be >= 0");
    switch (kind_) {
    case Kind::Parametric:
        return c_ + (a_ - c_) * std::exp(-b_ * t);
    case Kind::SplineSquared: {
        double x;
        if (t <= nodes_.front().first) {
            x = nodes_.front().second; // flat extrapolation in x
        } else if (t >= nodes_.back().first) {
            x = nodes_.back().second;
        } else {
            std::size_t i = 1;
            while (nodes_[i].first < t) ++i;
            const double h = nodes_[i].first - nodes_[i - 1].first;
            const double u = (t - nodes_[i - 1].first) / h;
            const double v = 1.0 - u;
            x = v * nodes_[i - 1].second + u * nodes_[i].second +
                h * h / 6.0 *
                    ((v * v * v - v) * spline_m_[i - 1] + (u * u * u - u) * spline_m_[i]);
        }
        return x * x;
    }
    case Kind::PiecewiseConstant: {
        if (t < breaks_.front()) return values_.front();
        if (t >= breaks_.back()) return values_.back();
        const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
        return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
    }
    }
    return 0.0;
}

ForwardVarianceCurve ForwardVarianceCurve::with_scaled_nodes(
    const std::vector<double>& factors) const {
    if (kind_ != Kind::SplineSquared)
        throw InvalidDomain("with_scaled_nodes: only spline curves have tweakable nodes");
    if (factors.size() != nodes_.size())
        throw InvalidDomain("with_scaled_nodes: one factor per node required");
    auto scaled = nodes_;
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i].second *= factors[i];
    return spline_squared(std::move(scaled));
}

double xi0_eval(const ForwardVarianceCurve& curve, double t) { return curve.value(t); }

double vol_from_state(const ModelParams& params, const ForwardVarianceCurve& curve, double t,
                      double x) {
    return std::sqrt(curve.value(t) / normalization_g(params, t)) * poly_eval(params.alpha, x);
}

nlohmann::json to_json(const ModelParams& params) {
    nlohmann::json j{{"alpha0", params.alpha[0]},
                     {"alpha1", params.alpha[1]},
                     {"alpha3", params.alpha[2]},
                     {"alpha5", params.alpha[3]},
                     {"rho", params.rho},
                     {"epsilon", params.ou.epsilon}};
    if (params.ou.time_dependent()) {
        j["h0"] = params.ou.h0;
        j["h_inf"] = params.ou.h_inf;
        j["kappa"] = params.ou.kappa;
    } else {
        j["h"] = params.ou.h;
    }
    return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
    ModelParams p;
    p.alpha = {j.at("alpha0").get<double>(), j.at("alpha1").get<double>(),
               j.at("alpha3").get<double>(), j.at("alpha5").get<double>()};
    p.rho = j.at("rho").get<double>();
    const double eps = j.value("epsilon", 1.0 / 52.0);
    if (j.contains("h0")) {
        p.ou = OuSpec::time_dependent_h(eps, j.at("h0").get<double>(),
                                        j.at("h_inf").get<double>(), j.at("kappa").get<double>());
    } else {
        p.ou = OuSpec::constant_h(eps, j.at("h").get<double>());
    }
    p.validate();
    return p;
}

nlohmann::json to_json(const ForwardVarianceCurve& curve) {
    switch (curve.kind()) {
    case ForwardVarianceCurve::Kind::Parametric:
        return {{"type", "parametric"},
                {"params",
                 {{"a", curve.param_a()}, {"b", curve.param_b()}, {"c", curve.param_c()}}}};
    case ForwardVarianceCurve::Kind::SplineSquared: {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& [t, x] : curve.nodes()) nodes.push_back({t, x});
        return {{"type", "spline_squared"}, {"nodes", nodes}};
    }
    case ForwardVarianceCurve::Kind::PiecewiseConstant:
        return {{"type", "piecewise_constant"},
                {"breakpoints", curve.breakpoints()},
                {"values", curve.values()}};
    }
    return {};
}

ForwardVarianceCurve curve_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "parametric") {
        const auto& p = j.at("params");
        return ForwardVarianceCurve::parametric(p.at("a").get<double>(), p.at("b").get<double>(),
                                                p.at("c").get<double>());
    }
    if (type == "spline_squared") {
        std::vector<std::pair<double, double>> nodes;
        for (const auto& n : j.at("nodes"))
            nodes.emplace_back(n.at(0).get<double>(), n.at(1).get<double>());
        return ForwardVarianceCurve::spline_squared(std::move(nodes));
    }
    if (type == "piecewise_constant") {
        return ForwardVarianceCurve::piecewise_constant(
            j.at("breakpoints").get<std::vector<double>>(),
            j.at("values").get<std::vector<double>>());
    }
    throw InvalidDomain("curve_from_json: unknown curve type '" + type + "'");
}

} // namespace quintic
