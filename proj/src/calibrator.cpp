#include "quintic/calibrator.hpp"

#include <algorithm>
#include <cmath>

#include "quintic/optim.hpp"
#include "quintic/vix_pricer.hpp"

namespace quintic {

namespace {

double market_iv(const QuoteSlice& slice, const Quote& q) {
    return implied_vol(q.mid, slice.spot_or_future, q.strike, slice.maturity, q.flag);
}

} // namespace

ObjectiveBreakdown objective(const CalibrationProblem& problem, const ModelParams& params,
                             const ForwardVarianceCurve& curve,
                             std::vector<InstrumentResidual>* residuals) {
    problem.weights.validate();
    params.validate();
    std::vector<std::string> unpriceable;

    double ss_spx = 0.0;
    for (const auto& slice : problem.spx.slices) {
        std::vector<double> strikes;
        strikes.reserve(slice.quotes.size());
        for (const auto& q : slice.quotes) strikes.push_back(q.strike);
        const auto smile = spx_smile(params, curve, slice.spot_or_future, slice.maturity, strikes,
                                     problem.mc);
        for (std::size_t i = 0; i < slice.quotes.size(); ++i) {
            if (!smile[i].ok) {
                unpriceable.push_back("spx T=" + std::to_string(slice.maturity) +
                                      " K=" + std::to_string(slice.quotes[i].strike));
                continue;
            }
            const double mkt = market_iv(slice, slice.quotes[i]);
            const double err = smile[i].implied_vol - mkt;
            ss_spx += err * err;
            if (residuals)
                residuals->push_back({"spx", slice.maturity, slice.quotes[i].strike, mkt,
                                      smile[i].implied_vol});
        }
    }

    double ss_vix = 0.0, ss_fut = 0.0;
    for (const auto& slice : problem.vix.slices) {
        const auto poly = build_vix_polynomial(params, curve, slice.maturity);
        const auto quad = make_quadrature(QuadKind::GaussHermiteProbabilist,
                                          problem.vix_quad_nodes);
        const double fut = vix_future(poly, quad);
        const double fut_err = fut - slice.spot_or_future;
        ss_fut += fut_err * fut_err;
        if (residuals)
            residuals->push_back({"vix_future", slice.maturity, 0.0, slice.spot_or_future, fut});
        for (const auto& q : slice.quotes) {
            const double model_price = vix_option(poly, quad, q.strike, q.flag);
            double model_vol = 0.0, mkt_vol = 0.0;
            try {
                model_vol = implied_vol(model_price, fut, q.strike, slice.maturity, q.flag);
                mkt_vol = market_iv(slice, q);
            } catch (const OutOfBoundsPrice&) {
                unpriceable.push_back("vix T=" + std::to_string(slice.maturity) +
                                      " K=" + std::to_string(q.strike));
                continue;
            }
            const double err = model_vol - mkt_vol;
            ss_vix += err * err;
            if (residuals)
                residuals->push_back({"vix", slice.maturity, q.strike, mkt_vol, model_vol});
        }
    }

    if (!unpriceable.empty()) {
        std::string msg = "objective: unpriceable instruments:";
        for (const auto& s : unpriceable) msg += " [" + s + "]";
        throw UnpriceableInstrument(msg);
    }

    ObjectiveBreakdown out;
    out.rmse_spx = std::sqrt(ss_spx);
    out.rmse_vix = std::sqrt(ss_vix);
    out.rmse_fut = std::sqrt(ss_fut);
    out.total = problem.weights.c1 * out.rmse_spx + problem.weights.c2 * out.rmse_vix +
                problem.weights.c3 * out.rmse_fut;
    return out;
}

namespace {

// Flat parameter-vector encoding of the free coordinates.
struct Encoding {
    const CalibrationProblem* problem = nullptr;
    ModelParams base;
    ForwardVarianceCurve base_curve = ForwardVarianceCurve::parametric(0.04, 1.0, 0.04);
    bool td = false;
    std::size_t n_nodes = 0;

    std::vector<double> x0, lo, hi;

    void push(double v, double l, double h) {
        x0.push_back(v);
        lo.push_back(l);
        hi.push_back(h);
    }

    void build() {
        const auto& fp = problem->free_params;
        const auto& b = problem->bounds;
        td = base.ou.time_dependent();
        if (fp.alpha)
            for (double a : base.alpha) push(a, b.alpha_lo, b.alpha_hi);
        if (fp.rho) push(base.rho, b.rho_lo, b.rho_hi);
        if (fp.h) {
            if (td) {
                push(base.ou.h0, b.h0_lo, b.h0_hi);
                push(base.ou.h_inf, b.h_inf_lo, b.h_inf_hi);
                push(base.ou.kappa, b.kappa_lo, b.kappa_hi);
            } else {
                push(base.ou.h, b.h_lo, b.h_hi);
            }
        }
        if (fp.epsilon) push(base.ou.epsilon, b.epsilon_lo, b.epsilon_hi);
        if (fp.curve_params) {
            if (base_curve.kind() != ForwardVarianceCurve::Kind::Parametric)
                throw InvalidDomain("calibrate: curve_params free but curve is not parametric");
            push(base_curve.param_a(), b.curve_a_lo, b.curve_a_hi);
            push(base_curve.param_b(), b.curve_b_lo, b.curve_b_hi);
            push(base_curve.param_c(), b.curve_c_lo, b.curve_c_hi);
        }
        if (fp.curve_nodes) {
            if (base_curve.kind() != ForwardVarianceCurve::Kind::SplineSquared)
                throw InvalidDomain("calibrate: curve_nodes free but curve is not a spline");
            n_nodes = base_curve.nodes().size();
            for (std::size_t i = 0; i < n_nodes; ++i) push(1.0, b.node_lo, b.node_hi);
        }
    }

    std::pair<ModelParams, ForwardVarianceCurve> decode(const std::vector<double>& x) const {
        const auto& fp = problem->free_params;
        ModelParams p = base;
        ForwardVarianceCurve curve = base_curve;
        std::size_t i = 0;
        if (fp.alpha)
            for (auto& a : p.alpha) a = x[i++];
        if (fp.rho) p.rho = x[i++];
        if (fp.h) {
            if (td) {
                const double h0 = x[i++], h_inf = x[i++], kappa = x[i++];
                p.ou = OuSpec::time_dependent_h(p.ou.epsilon, h0, h_inf, kappa);
            } else {
                p.ou = OuSpec::constant_h(p.ou.epsilon, x[i++]);
            }
        }
        if (fp.epsilon) {
            const double eps = x[i++];
            p.ou = td ? OuSpec::time_dependent_h(eps, p.ou.h0, p.ou.h_inf, p.ou.kappa)
                      : OuSpec::constant_h(eps, p.ou.h);
        }
        if (fp.curve_params) {
            const double a = x[i++], b2 = x[i++], c = x[i++];
            curve = ForwardVarianceCurve::parametric(a, b2, c);
        }
        if (fp.curve_nodes) {
            std::vector<double> factors(x.begin() + i, x.begin() + i + n_nodes);
            i += n_nodes;
            curve = base_curve.with_scaled_nodes(factors);
        }
        return {p, curve};
    }
};

} // namespace

CalibrationResult calibrate(const CalibrationProblem& problem, const ModelParams& initial,
                            const ForwardVarianceCurve& initial_curve) {
    initial.validate();
    Encoding enc;
    enc.problem = &problem;
    enc.base = initial;
    enc.base_curve = initial_curve;
    enc.build();

    auto penalized = [&](const std::vector<double>& x) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!(x[i] >= enc.lo[i] && x[i] <= enc.hi[i]))
                throw InvalidDomain("calibrate: iterate escaped its bounds");
        try {
            const auto [p, c] = enc.decode(x);
            if (std::all_of(p.alpha.begin(), p.alpha.end(), [](double a) { return a == 0.0; }))
                return 1e10;
            return objective(problem, p, c).total;
        } catch (const UnpriceableInstrument&) {
            return 1e10;
        } catch (const NegativePolynomial&) {
            return 1e10;
        } catch (const DegenerateNormalization&) {
            return 1e10;
        }
    };

    NelderMeadOptions opt;
    opt.max_evals = problem.budget;
    opt.restarts = problem.restarts;
    opt.f_tol = 1e-10;
    opt.x_tol = 1e-8;
    const auto nm = nelder_mead(penalized, enc.x0, enc.lo, enc.hi, opt);

    CalibrationResult result;
    auto [p, c] = enc.decode(nm.x);
    result.params = p;
    result.curve = c;
    result.iterations = nm.iterations;
    result.evaluations = nm.evaluations;
    result.budget_exhausted = nm.budget_exhausted;

    CalibrationProblem report = problem;
    if (problem.report_mc) {
        report.mc = *problem.report_mc;
    } else {
        report.mc.n_paths = std::size_t{1} << 19;
    }
    result.objective = objective(report, p, c, &result.residuals);
    return result;
}

CalibrationResult staged_calibrate(const CalibrationProblem& problem) {
    double max_t = 0.0;
    for (const auto& s : problem.spx.slices) max_t = std::max(max_t, s.maturity);
    for (const auto& s : problem.vix.slices) max_t = std::max(max_t, s.maturity);

    CalibrationProblem staged = problem;
    ModelParams initial;
    if (problem.initial_params) {
        initial = *problem.initial_params;
    } else {
        initial.alpha = {1.0, 1.0, 0.25, 0.05};
        initial.rho = -0.6;
        initial.ou = OuSpec::constant_h(1.0 / 52.0, -0.1);
    }

    switch (problem.regime) {
    case Regime::ParametricCurve: {
        if (problem.spx.slices.size() > 2 || problem.vix.slices.size() > 1)
            throw RegimeMismatch("staged_calibrate: regime 1 handles <= 2 SPX slices and <= 1 "
                                 "VIX slice");
        staged.free_params = {};
        staged.free_params.alpha = true;
        staged.free_params.rho = true;
        staged.free_params.h = true;
        staged.free_params.curve_params = true;
        ForwardVarianceCurve curve = ForwardVarianceCurve::parametric(0.04, 2.0, 0.04);
        if (problem.initial_curve) {
            curve = *problem.initial_curve;
        } else if (!problem.spx.slices.empty()) {
            // seed the level from the shortest slice's ATM variance
            const auto& s = problem.spx.slices.front();
            const auto atm = std::min_element(
                s.quotes.begin(), s.quotes.end(), [&](const Quote& a, const Quote& b) {
                    return std::fabs(a.strike - s.spot_or_future) <
                           std::fabs(b.strike - s.spot_or_future);
                });
            if (atm != s.quotes.end()) {
                const double iv = implied_vol(atm->mid, s.spot_or_future, atm->strike, s.maturity,
                                              atm->flag);
                const double level = std::clamp(iv * iv, 1e-4, 1.0);
                curve = ForwardVarianceCurve::parametric(level, 2.0, level);
            }
        }
        return calibrate(staged, initial, curve);
    }
    case Regime::StrippedCurve: {
        if (max_t > 4.0 / 12.0 + 1e-9)
            throw RegimeMismatch("staged_calibrate: regime 2 covers maturities up to 4 months");
        staged.free_params = {};
        staged.free_params.alpha = true;
        staged.free_params.rho = true;
        staged.free_params.h = true;
        staged.free_params.curve_nodes = true;
        const auto curve = problem.initial_curve
                               ? *problem.initial_curve
                               : build_curve(strip_forward_variance(problem.spx),
                                             CurveStyle::Spline);
        return calibrate(staged, initial, curve);
    }
    case Regime::TimeDependentH: {
        if (max_t > 1.5 + 1e-9)
            throw RegimeMismatch("staged_calibrate: regime 3 covers maturities up to 18 months");
        staged.free_params = {};
        staged.free_params.alpha = true;
        staged.free_params.rho = true;
        staged.free_params.h = true;
        staged.free_params.epsilon = true;
        staged.free_params.curve_nodes = true;
        if (!initial.ou.time_dependent())
            initial.ou = OuSpec::time_dependent_h(initial.ou.epsilon, 0.1, -0.5, 1.0);
        const auto curve = problem.initial_curve
                               ? *problem.initial_curve
                               : build_curve(strip_forward_variance(problem.spx),
                                             CurveStyle::Spline);
        return calibrate(staged, initial, curve);
    }
    }
    throw InvalidDomain("staged_calibrate: unknown regime");
}

} // namespace quintic
