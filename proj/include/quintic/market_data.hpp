#pragma once

#include <string>
#include <vector>

#include "quintic/model.hpp"
#include "quintic/numerics.hpp"

namespace quintic {

enum class Underlying { Spx, Vix };

struct Quote {
    double strike = 0.0;
    double bid = 0.0;
    double ask = 0.0;
    double mid = 0.0;
    OptionType flag = OptionType::Call;
};

struct QuoteSlice {
    double maturity = 0.0;        // year fraction, ACT/365
    double spot_or_future = 0.0;  // SPX spot or VIX future for the slice
    std::vector<Quote> quotes;
};

struct QuoteSet {
    Underlying underlying = Underlying::Spx;
    std::vector<QuoteSlice> slices; // sorted by maturity

    std::size_t total_quotes() const {
        std::size_t n = 0;
        for (const auto& s : slices) n += s.quotes.size();
        return n;
    }
};

struct RejectedRow {
    std::size_t line = 0;
    std::string reason;
};

struct LoadResult {
    QuoteSet quotes;
    std::vector<RejectedRow> rejected; // malformed rows, reported not dropped silently
};

/// CSV with header `underlying,maturity,forward,strike,flag,bid,ask`.
/// Rows violating the quote invariants land in the rejection report. Rows of a
/// different underlying than the first accepted row are rejected too.
LoadResult load_quotes(const std::string& path);
void save_quotes(const QuoteSet& quotes, const std::string& path);

/// Five-parameter total-variance slice w(k) = a + b (rho (k-m) + sqrt((k-m)^2 + s^2)).
struct SviParams {
    double a = 0.0, b = 0.0, rho = 0.0, m = 0.0, s = 0.1;
    double total_variance(double k) const;
};

struct SliceFit {
    double maturity = 0.0;
    double forward = 0.0;
    SviParams svi;
    double rmse = 0.0; // in total-variance units

    double total_variance(double log_moneyness) const {
        return svi.total_variance(log_moneyness);
    }
    double vol(double log_moneyness) const;
    double price(double strike, OptionType flag) const;
};

/// Least-squares SVI fit to mid implied total variances. Needs >= 5 quotes;
/// throws FitFailure when the RMSE exceeds max_rmse.
SliceFit fit_slice(const QuoteSlice& slice, double max_rmse = 1e-2);

struct VarianceInterval {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double integral = 0.0; // ∫ xi_0 over [t_lo, t_hi]
};

struct StrippedVariance {
    std::vector<VarianceInterval> intervals; // contiguous, increasing
};

/// Log-contract values from the fitted slices, differenced per consecutive
/// maturity pair; the first interval [0, T_1] comes from the first slice alone.
/// Strike integrals run over K in [F e^{-8 sqrt(w)}, F e^{+8 sqrt(w)}] by
/// adaptive quadrature. A negative stripped integral throws ArbitrageError.
StrippedVariance strip_forward_variance(const QuoteSet& spx_quotes);

enum class CurveStyle { Spline, Piecewise };

/// Spline style: nodes at interval midpoints with x_i = sqrt(integral_i / dT_i)
/// (per-unit-time normalization), squared on evaluation. Piecewise style:
/// integral_i / dT_i on [T_i, T_{i+1}).
ForwardVarianceCurve build_curve(const StrippedVariance& stripped, CurveStyle style);

} // namespace quintic
