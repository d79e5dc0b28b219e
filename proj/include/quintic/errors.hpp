#pragma once

#include <stdexcept>
#include <string>

namespace quintic {

// Bad argument ranges (a >= b, negative maturity, ...).
struct InvalidDomain : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Option price outside the (intrinsic, upper-bound) band: bad or arbitrageable quote.
struct OutOfBoundsPrice : std::domain_error {
    using std::domain_error::domain_error;
};

// g(u) = E[p(X_u)^2] evaluated to zero; only possible at u = 0 with alpha0 = 0.
struct DegenerateNormalization : std::domain_error {
    using std::domain_error::domain_error;
};

// The VIX^2 polynomial evaluated negative at a quadrature node; the coefficient
// set violates its non-negativity invariant.
struct NegativePolynomial : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quote file could not be parsed at all (I/O or structural failure).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Slice has fewer quotes than the fit requires.
struct InsufficientQuotes : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Slice fit RMSE exceeded the configured bound.
struct FitFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Negative stripped variance integral: arbitrage or data error in that interval.
struct ArbitrageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One or more quoted instruments cannot be priced under the candidate parameters.
struct UnpriceableInstrument : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quote coverage contradicts the declared calibration regime.
struct RegimeMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace quintic
