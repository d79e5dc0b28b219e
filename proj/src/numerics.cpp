#include "quintic/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

namespace quintic {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double gaussian_moment(int p, double sigma) {
    if (p < 0) throw InvalidDomain("gaussian_moment: p must be non-negative");
    if (p == 0) return 1.0;
    if (p % 2 == 1) return 0.0;
    double dd = 1.0; // (p-1)!!
    for (int k = p - 1; k > 1; k -= 2) dd *= k;
    return std::pow(sigma, p) * dd;
}

namespace {

// Implicit-shift QL sweep for a symmetric tridiagonal Jacobi matrix, tracking
// only the first eigenvector component (Golub-Welsch). d holds the diagonal on
// entry and the ascending eigenvalues on exit; e the subdiagonal in e[0..n-2];
// z the first-row vector, rotated along.
void imtqlx(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    if (n == 1) return;
    const double prec = std::numeric_limits<double>::epsilon();
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        while (true) {
            int m = l;
            for (; m < n - 1; ++m)
                if (std::fabs(e[m]) <= prec * (std::fabs(d[m]) + std::fabs(d[m + 1]))) break;
            if (m == l) break;
            if (++iter > 60) throw std::runtime_error("imtqlx: QL iteration did not converge");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            for (int i = m - 1; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                if (std::fabs(f) >= std::fabs(g)) {
                    c = g / f;
                    r = std::hypot(c, 1.0);
                    e[i + 1] = f * r;
                    s = 1.0 / r;
                    c *= s;
                } else {
                    s = f / g;
                    r = std::hypot(s, 1.0);
                    e[i + 1] = g * r;
                    c = 1.0 / r;
                    s *= c;
                }
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // sort eigenvalues ascending, permuting z along
    for (int i = 0; i < n - 1; ++i) {
        int k = i;
        for (int j = i + 1; j < n; ++j)
            if (d[j] < d[k]) k = j;
        if (k != i) {
            std::swap(d[i], d[k]);
            std::swap(z[i], z[k]);
        }
    }
}

void gauss_hermite_probabilist(int n, std::vector<double>& x, std::vector<double>& w) {
    // Jacobi matrix of the monic probabilist Hermite family: zero diagonal,
    // subdiagonal sqrt(k).
    std::vector<double> d(n, 0.0), e(n, 0.0), z(n, 0.0);
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(double(k));
    z[0] = 1.0; // mu0 = 1 for the standard normal weight
    imtqlx(d, e, z);
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        x[i] = d[i];
        w[i] = z[i] * z[i];
    }
    // enforce the exact symmetry of the rule and keep underflowed tail weights
    // positive
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double node = 0.5 * (x[j] - x[i]);
        x[i] = -node;
        x[j] = node;
        const double wt = 0.5 * (w[i] + w[j]);
        w[i] = w[j] = std::max(wt, DBL_MIN);
    }
    if (n % 2 == 1) {
        x[n / 2] = 0.0;
        w[n / 2] = std::max(w[n / 2], DBL_MIN);
    }
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double z1 = std::numeric_limits<double>::infinity();
        double pp = 0.0;
        while (std::fabs(z - z1) > 1e-15) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            z1 = z;
            z = z1 - p0 / pp;
        }
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        w[i] = 2.0 * half / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

} // namespace

QuadratureRule make_quadrature(QuadKind kind, int n, double a, double b) {
    if (n < 1) throw InvalidDomain("make_quadrature: n must be >= 1");
    QuadratureRule rule;
    rule.kind = kind;
    if (kind == QuadKind::GaussHermiteProbabilist) {
        gauss_hermite_probabilist(n, rule.nodes, rule.weights);
    } else {
        if (!(a < b)) throw InvalidDomain("make_quadrature: requires a < b for Gauss-Legendre");
        gauss_legendre(n, a, b, rule.nodes, rule.weights);
    }
    return rule;
}

double black_price(const BlackInputs& in) {
    if (!(in.forward > 0.0)) throw InvalidDomain("black_price: forward must be > 0");
    if (!(in.strike > 0.0)) throw InvalidDomain("black_price: strike must be > 0");
    if (!(in.maturity > 0.0)) throw InvalidDomain("black_price: maturity must be > 0");
    if (!(in.vol >= 0.0)) throw InvalidDomain("black_price: vol must be >= 0");
    const double sign = (in.flag == OptionType::Call) ? 1.0 : -1.0;
    const double stddev = in.vol * std::sqrt(in.maturity);
    if (stddev < 1e-14) return std::max(sign * (in.forward - in.strike), 0.0);
    const double d1 = std::log(in.forward / in.strike) / stddev + 0.5 * stddev;
    const double d2 = d1 - stddev;
    return sign * (in.forward * norm_cdf(sign * d1) - in.strike * norm_cdf(sign * d2));
}

double black_price(double forward, double strike, double maturity, double vol, OptionType flag) {
    return black_price(BlackInputs{forward, strike, maturity, vol, flag});
}

double black_vega(double forward, double strike, double maturity, double vol) {
    const double stddev = vol * std::sqrt(maturity);
    if (stddev < 1e-14) return 0.0;
    const double d1 = std::log(forward / strike) / stddev + 0.5 * stddev;
    return forward * norm_pdf(d1) * std::sqrt(maturity);
}

double implied_vol(double price, double forward, double strike, double maturity,
                   OptionType flag) {
    if (!(forward > 0.0 && strike > 0.0 && maturity > 0.0))
        throw InvalidDomain("implied_vol: forward, strike, maturity must be > 0");
    const double sign = (flag == OptionType::Call) ? 1.0 : -1.0;
    const double intrinsic = std::max(sign * (forward - strike), 0.0);
    const double upper = (flag == OptionType::Call) ? forward : strike;
    if (!(price > intrinsic) || !(price < upper))
        throw OutOfBoundsPrice("implied_vol: price outside (intrinsic, bound)");

    double lo = 1e-6, hi = 5.0;
    const double price_tol = 1e-10;
    auto f = [&](double v) { return black_price(forward, strike, maturity, v, flag) - price; };
    double flo = f(lo);
    if (flo >= 0.0) return lo; // price at or below the bracket floor value
    double v = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fv = f(v);
        if (fv > 0.0) hi = v; else lo = v;
        const double vega = black_vega(forward, strike, maturity, v);
        double vn = (vega > 1e-14) ? v - fv / vega : lo;
        if (!(vn > lo && vn < hi)) vn = 0.5 * (lo + hi);
        const double step = std::fabs(vn - v);
        v = vn;
        if (std::fabs(fv) < price_tol && step < 1e-11) break;
        if (hi - lo < 1e-15) break;
    }
    return v;
}

namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double m,
                     double fm, double b, double fb, double whole, double rel_tol, double abs_tol,
                     int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, flm, m, fm);
    const double right = simpson(m, fm, frm, b, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * std::max(abs_tol, rel_tol * std::fabs(left + right)))
        return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, lm, flm, m, fm, left, rel_tol, 0.5 * abs_tol, depth - 1) +
           adaptive_step(f, m, fm, rm, frm, b, fb, right, rel_tol, 0.5 * abs_tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                        double abs_tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = simpson(a, fa, fm, b, fb);
    return adaptive_step(f, a, fa, m, fm, b, fb, whole, rel_tol, abs_tol, 48);
}

} // namespace quintic
