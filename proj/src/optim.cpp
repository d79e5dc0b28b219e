#include "quintic/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quintic/errors.hpp"

namespace quintic {

namespace {

void clip(std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

} // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& lower,
                             const std::vector<double>& upper, const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    if (lower.size() != n || upper.size() != n)
        throw InvalidDomain("nelder_mead: bound dimensions do not match x0");
    for (std::size_t i = 0; i < n; ++i)
        if (!(lower[i] <= upper[i])) throw InvalidDomain("nelder_mead: lower > upper");
    clip(x0, lower, upper);

    NelderMeadResult res;
    res.x = x0;
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };
    res.f = eval(x0);
    if (n == 0) {
        res.evaluations = evals;
        return res;
    }

    double step_scale = opt.initial_step;
    for (int round = 0; round <= opt.restarts; ++round) {
        // simplex seeded at the incumbent best
        std::vector<std::vector<double>> xs(n + 1, res.x);
        std::vector<double> fs(n + 1);
        fs[0] = res.f;
        for (std::size_t i = 0; i < n; ++i) {
            double h = step_scale * (upper[i] - lower[i]);
            if (h == 0.0) h = step_scale * std::max(1.0, std::fabs(res.x[i]));
            xs[i + 1][i] += h;
            if (xs[i + 1][i] > upper[i]) xs[i + 1][i] = res.x[i] - h; // reflect into the box
            clip(xs[i + 1], lower, upper);
            if (evals >= opt.max_evals) break;
            fs[i + 1] = eval(xs[i + 1]);
        }
        if (evals >= opt.max_evals) {
            res.budget_exhausted = true;
            break;
        }

        bool converged = false;
        while (!converged && evals < opt.max_evals) {
            ++res.iterations;
            std::vector<std::size_t> idx(n + 1);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::sort(idx.begin(), idx.end(),
                      [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
            std::vector<std::vector<double>> xs2(n + 1);
            std::vector<double> fs2(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                xs2[k] = xs[idx[k]];
                fs2[k] = fs[idx[k]];
            }
            xs.swap(xs2);
            fs.swap(fs2);
            if (fs[0] < res.f) {
                res.f = fs[0];
                res.x = xs[0];
            }

            double size = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double span = 0.0;
                for (std::size_t k = 1; k <= n; ++k) span = std::max(span, std::fabs(xs[k][i] - xs[0][i]));
                size = std::max(size, span);
            }
            if (std::fabs(fs[n] - fs[0]) <= opt.f_tol && size <= opt.x_tol) {
                converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < n; ++i) centroid[i] += xs[k][i] / double(n);

            auto propose = [&](double coef) {
                std::vector<double> p(n);
                for (std::size_t i = 0; i < n; ++i)
                    p[i] = centroid[i] + coef * (centroid[i] - xs[n][i]);
                clip(p, lower, upper);
                return p;
            };

            const auto xr = propose(1.0);
            const double fr = eval(xr);
            if (fr < fs[0]) {
                if (evals < opt.max_evals) {
                    const auto xe = propose(2.0);
                    const double fe = eval(xe);
                    if (fe < fr) {
                        xs[n] = xe;
                        fs[n] = fe;
                    } else {
                        xs[n] = xr;
                        fs[n] = fr;
                    }
                } else {
                    xs[n] = xr;
                    fs[n] = fr;
                }
            } else if (fr < fs[n - 1]) {
                xs[n] = xr;
                fs[n] = fr;
            } else if (evals < opt.max_evals) {
                const bool outside = fr < fs[n];
                const auto xc = propose(outside ? 0.5 : -0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : fs[n])) {
                    xs[n] = xc;
                    fs[n] = fc;
                } else {
                    // shrink toward the best vertex
                    for (std::size_t k = 1; k <= n && evals < opt.max_evals; ++k) {
                        for (std::size_t i = 0; i < n; ++i)
                            xs[k][i] = xs[0][i] + 0.5 * (xs[k][i] - xs[0][i]);
                        fs[k] = eval(xs[k]);
                    }
                }
            }
        }
        for (std::size_t k = 0; k <= n; ++k) {
            if (fs[k] < res.f) {
                res.f = fs[k];
                res.x = xs[k];
            }
        }
        if (evals >= opt.max_evals) {
            res.budget_exhausted = !converged;
            break;
        }
        step_scale *= 0.3;
    }
    res.evaluations = evals;
    return res;
}

} // namespace quintic
