#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quintic/market_data.hpp"
#include "quintic/model.hpp"
#include "quintic/spx_pricer.hpp"

namespace quintic {

struct CalibrationWeights {
    double c1 = 1.0; // SPX implied-vol term
    double c2 = 0.1; // VIX implied-vol term
    double c3 = 0.5; // VIX futures term

    void validate() const {
        if (!(c1 >= 0.0 && c2 >= 0.0 && c3 >= 0.0) || (c1 == 0.0 && c2 == 0.0 && c3 == 0.0))
            throw InvalidDomain("CalibrationWeights: need non-negative weights, not all zero");
    }
};

enum class Regime {
    ParametricCurve = 1, // <= 2 SPX slices + 1 VIX slice; free {alpha, rho, H, a, b, c}
    StrippedCurve = 2,   // maturities <= 4 months; free {alpha, rho, H, curve nodes}
    TimeDependentH = 3   // maturities <= 18 months; free {alpha, rho, H0, Hinf, kappa, eps, nodes}
};

struct FreeParams {
    bool alpha = true;
    bool rho = true;
    bool h = true; // constant h, or the (h0, h_inf, kappa) triple in time-dependent mode
    bool epsilon = false;
    bool curve_params = false; // parametric a, b, c
    bool curve_nodes = false;  // multiplicative factors on stripped spline nodes
};

struct ParamBounds {
    double alpha_lo = 0.0, alpha_hi = 5.0;
    double rho_lo = -1.0, rho_hi = 0.0;
    double h_lo = -3.0, h_hi = 0.49;
    double h0_lo = -3.0, h0_hi = 0.49;
    double h_inf_lo = -3.0, h_inf_hi = 0.49;
    double kappa_lo = 0.01, kappa_hi = 10.0;
    double epsilon_lo = 1.0 / 252.0, epsilon_hi = 1.0;
    double curve_a_lo = 1e-4, curve_a_hi = 1.0;
    double curve_b_lo = 0.01, curve_b_hi = 20.0;
    double curve_c_lo = 1e-4, curve_c_hi = 1.0;
    double node_lo = 0.7, node_hi = 1.3; // tweaks stay anchored to the market strip
};

struct CalibrationProblem {
    QuoteSet spx;
    QuoteSet vix; // slice spot_or_future doubles as the futures quote
    Regime regime = Regime::ParametricCurve;
    CalibrationWeights weights;
    McConfig mc;                 // SPX pricing during the search
    std::optional<McConfig> report_mc; // final repricing; defaults to mc with 2^19 paths
    FreeParams free_params;
    ParamBounds bounds;
    int budget = 600;
    int restarts = 3;
    int vix_quad_nodes = 400;
    std::optional<ModelParams> initial_params;
    std::optional<ForwardVarianceCurve> initial_curve;
};

struct ObjectiveBreakdown {
    double total = 0.0;
    double rmse_spx = 0.0;
    double rmse_vix = 0.0;
    double rmse_fut = 0.0;
};

struct InstrumentResidual {
    std::string kind; // "spx" | "vix" | "vix_future"
    double maturity = 0.0;
    double strike = 0.0; // 0 for futures
    double market = 0.0; // implied vol, or futures price
    double model = 0.0;
};

/// c1 sqrt(sum spx iv errors^2) + c2 sqrt(sum vix iv errors^2) + c3 sqrt(sum
/// futures errors^2); SPX legs priced with the problem's fixed-seed Monte Carlo
/// config (common random numbers), VIX legs by quadrature. Throws
/// UnpriceableInstrument listing offending quotes.
ObjectiveBreakdown objective(const CalibrationProblem& problem, const ModelParams& params,
                             const ForwardVarianceCurve& curve,
                             std::vector<InstrumentResidual>* residuals = nullptr);

struct CalibrationResult {
    ModelParams params;
    ForwardVarianceCurve curve = ForwardVarianceCurve::parametric(0.04, 1.0, 0.04);
    ObjectiveBreakdown objective;
    std::vector<InstrumentResidual> residuals;
    int iterations = 0;
    int evaluations = 0;
    bool budget_exhausted = false;
};

/// Bounded simplex search from the given starting point; deterministic given
/// the problem's seed, and never worse than the initial objective.
CalibrationResult calibrate(const CalibrationProblem& problem, const ModelParams& initial,
                            const ForwardVarianceCurve& initial_curve);

/// Applies the per-regime free-parameter sets and initializations (parametric
/// curve for regime 1, stripped spline for regimes 2 and 3), then calibrates.
/// Throws RegimeMismatch when quote coverage contradicts the declared regime.
CalibrationResult staged_calibrate(const CalibrationProblem& problem);

} // namespace quintic
