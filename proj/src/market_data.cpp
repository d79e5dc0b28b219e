#include "quintic/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "quintic/optim.hpp"

namespace quintic {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& v) {
    try {
        std::size_t pos = 0;
        v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

QuoteSlice& slice_for(QuoteSet& set, double maturity, double forward, bool& forward_mismatch) {
    forward_mismatch = false;
    for (auto& s : set.slices) {
        if (std::fabs(s.maturity - maturity) < 1e-12) {
            forward_mismatch = std::fabs(s.spot_or_future - forward) > 1e-9 * forward;
            return s;
        }
    }
    QuoteSlice s;
    s.maturity = maturity;
    s.spot_or_future = forward;
    set.slices.push_back(s);
    return set.slices.back();
}

} // namespace

LoadResult load_quotes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_quotes: cannot open '" + path + "'");
    LoadResult result;
    bool underlying_set = false;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true; // `underlying,maturity,forward,strike,flag,bid,ask`
            continue;
        }
        const auto f = split_csv(line);
        auto reject = [&](const std::string& why) {
            result.rejected.push_back({line_no, why});
        };
        if (f.size() != 7) {
            reject("expected 7 fields, got " + std::to_string(f.size()));
            continue;
        }
        Underlying u;
        if (f[0] == "SPX") u = Underlying::Spx;
        else if (f[0] == "VIX") u = Underlying::Vix;
        else {
            reject("unknown underlying '" + f[0] + "'");
            continue;
        }
        double maturity, forward, strike, bid, ask;
        if (!parse_double(f[1], maturity) || !parse_double(f[2], forward) ||
            !parse_double(f[3], strike) || !parse_double(f[5], bid) || !parse_double(f[6], ask)) {
            reject("unparseable numeric field");
            continue;
        }
        OptionType flag;
        if (f[4] == "C" || f[4] == "call") flag = OptionType::Call;
        else if (f[4] == "P" || f[4] == "put") flag = OptionType::Put;
        else {
            reject("unknown flag '" + f[4] + "'");
            continue;
        }
        if (!(maturity > 0.0)) { reject("maturity must be > 0"); continue; }
        if (!(forward > 0.0)) { reject("forward must be > 0"); continue; }
        if (!(strike > 0.0)) { reject("strike must be > 0"); continue; }
        if (!(bid <= ask)) { reject("bid > ask"); continue; }
        if (!(bid >= 0.0)) { reject("negative bid"); continue; }
        if (!underlying_set) {
            result.quotes.underlying = u;
            underlying_set = true;
        } else if (u != result.quotes.underlying) {
            reject("underlying differs from the file's first row");
            continue;
        }
        bool fwd_mismatch = false;
        auto& slice = slice_for(result.quotes, maturity, forward, fwd_mismatch);
        if (fwd_mismatch) {
            reject("forward differs from the slice's established value");
            continue;
        }
        if (std::any_of(slice.quotes.begin(), slice.quotes.end(), [&](const Quote& q) {
                return q.strike == strike && q.flag == flag;
            })) {
            reject("duplicate strike within slice");
            continue;
        }
        slice.quotes.push_back({strike, bid, ask, 0.5 * (bid + ask), flag});
    }
    std::sort(result.quotes.slices.begin(), result.quotes.slices.end(),
              [](const QuoteSlice& a, const QuoteSlice& b) { return a.maturity < b.maturity; });
    for (auto& s : result.quotes.slices)
        std::sort(s.quotes.begin(), s.quotes.end(),
                  [](const Quote& a, const Quote& b) { return a.strike < b.strike; });
    return result;
}

void save_quotes(const QuoteSet& quotes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("save_quotes: cannot open '" + path + "' for writing");
    out.precision(17);
    out << "underlying,maturity,forward,strike,flag,bid,ask\n";
    const char* u = quotes.underlying == Underlying::Spx ? "SPX" : "VIX";
    for (const auto& s : quotes.slices)
        for (const auto& q : s.quotes)
            out << u << ',' << s.maturity << ',' << s.spot_or_future << ',' << q.strike << ','
                << (q.flag == OptionType::Call ? 'C' : 'P') << ',' << q.bid << ',' << q.ask
                << '\n';
}

double SviParams::total_variance(double k) const {
    const double d = k - m;
    return a + b * (rho * d + std::sqrt(d * d + s * s));
}

double SliceFit::vol(double k) const {
    return std::sqrt(std::max(total_variance(k), 0.0) / maturity);
}

double SliceFit::price(double strike, OptionType flag) const {
    const double k = std::log(strike / forward);
    return black_price(forward, strike, maturity, vol(k), flag);
}

namespace {

// Given the SVI shape (rho, m, s), the slice is linear in (a, b); solve that
// pair by least squares with b >= 0 and the global minimum of w kept >= 0.
void linear_svi_fit(const std::vector<double>& k, const std::vector<double>& w, double rho,
                    double m, double s, double& a, double& b) {
    double s_phi = 0.0, s_phi2 = 0.0, s_w = 0.0, s_wphi = 0.0;
    const double n = double(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = k[i] - m;
        const double phi = rho * d + std::sqrt(d * d + s * s);
        s_phi += phi;
        s_phi2 += phi * phi;
        s_w += w[i];
        s_wphi += w[i] * phi;
    }
    const double det = n * s_phi2 - s_phi * s_phi;
    if (std::fabs(det) < 1e-14) {
        b = 0.0;
        a = s_w / n;
    } else {
        b = (n * s_wphi - s_phi * s_w) / det;
        if (b < 0.0) b = 0.0;
        a = (s_w - b * s_phi) / n;
    }
    // w_min = a + b s sqrt(1 - rho^2); lift a if the wings dip below zero
    const double w_min = a + b * s * std::sqrt(std::max(1.0 - rho * rho, 0.0));
    if (w_min < 0.0) a -= w_min;
}

double svi_rmse(const std::vector<double>& k, const std::vector<double>& w, const SviParams& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = p.total_variance(k[i]) - w[i];
        acc += d * d;
    }
    return std::sqrt(acc / double(k.size()));
}

} // namespace

SliceFit fit_slice(const QuoteSlice& slice, double max_rmse) {
    if (slice.quotes.size() < 5)
        throw InsufficientQuotes("fit_slice: need >= 5 quotes, slice has " +
                                 std::to_string(slice.quotes.size()));
    const double T = slice.maturity;
    const double F = slice.spot_or_future;

    auto ordered = slice.quotes;
    std::sort(ordered.begin(), ordered.end(),
              [](const Quote& a, const Quote& b) { return a.strike < b.strike; });
    std::vector<double> ks, ws;
    for (const auto& q : ordered) {
        const double iv = implied_vol(q.mid, F, q.strike, T, q.flag);
        ks.push_back(std::log(q.strike / F));
        ws.push_back(iv * iv * T);
    }

    const double k_lo = *std::min_element(ks.begin(), ks.end());
    const double k_hi = *std::max_element(ks.begin(), ks.end());
    const double k_span = std::max(k_hi - k_lo, 1e-3);

    // outer simplex over the shape (rho, m, s); inner linear solve for (a, b)
    auto objective = [&](const std::vector<double>& x) {
        SviParams p;
        p.rho = x[0];
        p.m = x[1];
        p.s = x[2];
        linear_svi_fit(ks, ws, p.rho, p.m, p.s, p.a, p.b);
        return svi_rmse(ks, ws, p);
    };
    NelderMeadOptions opt;
    opt.max_evals = 400;
    opt.restarts = 2;
    opt.f_tol = 1e-16;
    opt.x_tol = 1e-12;
    const std::vector<double> lower{-0.999, k_lo - k_span, 1e-4};
    const std::vector<double> upper{0.999, k_hi + k_span, 5.0};
    auto best = nelder_mead(objective, {0.0, 0.5 * (k_lo + k_hi), 0.2 * k_span}, lower, upper, opt);

    SliceFit fit;
    fit.maturity = T;
    fit.forward = F;
    fit.svi.rho = best.x[0];
    fit.svi.m = best.x[1];
    fit.svi.s = best.x[2];
    linear_svi_fit(ks, ws, fit.svi.rho, fit.svi.m, fit.svi.s, fit.svi.a, fit.svi.b);
    fit.rmse = svi_rmse(ks, ws, fit.svi);
    if (fit.rmse > max_rmse)
        throw FitFailure("fit_slice: RMSE " + std::to_string(fit.rmse) + " exceeds bound " +
                         std::to_string(max_rmse));
    return fit;
}

namespace {

// 2 * (∫_0^F P/K^2 dK + ∫_F^inf C/K^2 dK) from a fitted slice, in log-strike
// coordinates, truncated at +/- 8 total-variance standard deviations.
double log_contract_value(const SliceFit& fit) {
    const double w_atm = std::max(fit.total_variance(0.0), 1e-12);
    const double span = 8.0 * std::sqrt(w_atm);
    const double F = fit.forward;
    auto put_leg = [&](double k) {
        const double strike = F * std::exp(k);
        return fit.price(strike, OptionType::Put) / strike;
    };
    auto call_leg = [&](double k) {
        const double strike = F * std::exp(k);
        return fit.price(strike, OptionType::Call) / strike;
    };
    // dK = K dk turns P/K^2 dK into (P/K) dk
    const double puts = adaptive_simpson(put_leg, -span, 0.0, 1e-8, 1e-16);
    const double calls = adaptive_simpson(call_leg, 0.0, span, 1e-8, 1e-16);
    return 2.0 * (puts + calls);
}

} // namespace

StrippedVariance strip_forward_variance(const QuoteSet& spx_quotes) {
    if (spx_quotes.underlying != Underlying::Spx)
        throw InvalidDomain("strip_forward_variance: expected SPX quotes");
    if (spx_quotes.slices.size() < 2)
        throw InsufficientQuotes("strip_forward_variance: need >= 2 SPX maturities");

    std::vector<SliceFit> fits;
    fits.reserve(spx_quotes.slices.size());
    for (const auto& s : spx_quotes.slices) fits.push_back(fit_slice(s));

    StrippedVariance out;
    double prev_t = 0.0, prev_value = 0.0;
    for (const auto& fit : fits) {
        const double value = log_contract_value(fit);
        VarianceInterval iv{prev_t, fit.maturity, value - prev_value};
        if (iv.integral < 0.0)
            throw ArbitrageError("strip_forward_variance: negative integral on [" +
                                 std::to_string(iv.t_lo) + ", " + std::to_string(iv.t_hi) + "]");
        out.intervals.push_back(iv);
        prev_t = fit.maturity;
        prev_value = value;
    }
    return out;
}

ForwardVarianceCurve build_curve(const StrippedVariance& stripped, CurveStyle style) {
    if (stripped.intervals.empty())
        throw InvalidDomain("build_curve: no stripped intervals");
    if (style == CurveStyle::Piecewise) {
        std::vector<double> breaks{stripped.intervals.front().t_lo};
        std::vector<double> values;
        for (const auto& iv : stripped.intervals) {
            breaks.push_back(iv.t_hi);
            values.push_back(iv.integral / (iv.t_hi - iv.t_lo));
        }
        return ForwardVarianceCurve::piecewise_constant(std::move(breaks), std::move(values));
    }
    std::vector<std::pair<double, double>> nodes;
    for (const auto& iv : stripped.intervals)
        nodes.emplace_back(0.5 * (iv.t_lo + iv.t_hi),
                           std::sqrt(std::max(iv.integral, 0.0) / (iv.t_hi - iv.t_lo)));
    return ForwardVarianceCurve::spline_squared(std::move(nodes));
}

} // namespace quintic
