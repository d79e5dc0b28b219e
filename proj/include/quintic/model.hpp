#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quintic/errors.hpp"
#include "quintic/ou_process.hpp"

namespace quintic {

/// Calibratable parameter set: quintic coefficients (alpha2 = alpha4 = 0
/// implied), spot-vol correlation, and the driving-factor description.
struct ModelParams {
    std::array<double, 4> alpha{1.0, 0.0, 0.0, 0.0}; // alpha0, alpha1, alpha3, alpha5
    double rho = 0.0;                                // in [-1, 0]
    OuSpec ou = OuSpec::constant_h(1.0 / 52.0, 0.0);

    void validate() const;
    /// True when the proven-martingale conditions hold (rho <= 0, alpha5 > 0).
    bool martingale_regime() const { return rho <= 0.0 && alpha[3] > 0.0; }
};

/// alpha0 + alpha1 x + alpha3 x^3 + alpha5 x^5 via Horner.
double poly_eval(const std::array<double, 4>& alpha, double x);

/// Coefficients of p(x)^2: (a*a)_k = sum_j a_j a_{k-j}, k = 0..10.
std::array<double, 11> self_convolve(const std::array<double, 4>& alpha);

/// g(u) = E[p(X_u)^2]. Throws DegenerateNormalization when it evaluates to
/// zero (only possible at u = 0 with alpha0 = 0).
double normalization_g(const ModelParams& params, double u);

class ForwardVarianceCurve {
  public:
    enum class Kind { Parametric, SplineSquared, PiecewiseConstant };

    /// a e^{-bt} + c (1 - e^{-bt}) with a, b, c > 0.
    static ForwardVarianceCurve parametric(double a, double b, double c);
    /// Natural cubic spline through (t_i, x_i), squared on evaluation; flat in
    /// x beyond the end nodes.
    static ForwardVarianceCurve spline_squared(std::vector<std::pair<double, double>> nodes);
    /// values[i] on [breakpoints[i], breakpoints[i+1]); right-continuous, flat
    /// beyond the ends.
    static ForwardVarianceCurve piecewise_constant(std::vector<double> breakpoints,
                                                   std::vector<double> values);

    Kind kind() const { return kind_; }
    double value(double t) const; // xi_0(t)

    // representation accessors
    double param_a() const { return a_; }
    double param_b() const { return b_; }
    double param_c() const { return c_; }
    const std::vector<std::pair<double, double>>& nodes() const { return nodes_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }

    /// Same spline with node values x_i scaled by per-node factors (used by the
    /// calibrator to tweak a stripped curve).
    ForwardVarianceCurve with_scaled_nodes(const std::vector<double>& factors) const;

  private:
    ForwardVarianceCurve() = default;
    void build_spline();

    Kind kind_ = Kind::Parametric;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0;
    std::vector<std::pair<double, double>> nodes_;
    std::vector<double> spline_m_; // spline second derivatives
    std::vector<double> breaks_;
    std::vector<double> values_;
};

double xi0_eval(const ForwardVarianceCurve& curve, double t);

/// sigma_t = sqrt(xi_0(t)) p(x) / sqrt(g(t)). Signed through p(x); the squared
/// value is what enters variance accumulation downstream.
double vol_from_state(const ModelParams& params, const ForwardVarianceCurve& curve, double t,
                      double x);

// JSON round trip. Field names: alpha0, alpha1, alpha3, alpha5, rho, epsilon,
// h | h0/h_inf/kappa; curves: {type, params | nodes | breakpoints+values}.
nlohmann::json to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ForwardVarianceCurve& curve);
ForwardVarianceCurve curve_from_json(const nlohmann::json& j);

} // namespace quintic
