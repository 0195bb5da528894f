#pragma once

#include <functional>

namespace xborder::numerics {

using ScalarFn = std::function<double(double)>;
using DomainFn = std::function<bool(double)>;

struct RootConfig {
    double rel_tolerance = 1e-12;
    double abs_tolerance = 1e-10;
    int max_iterations = 255;

    /// Throws Error(invalid_argument) unless every field is positive.
    void validate() const;

    /// Residual / bracket tolerance at a given iterate.
    double tolerance_at(double x) const;
};

struct RootResult {
    double root = 0.0;
    int iterations = 0;
    double residual = 0.0; // f(root)
};

/// Newton-Raphson from x0.
///
/// Converges when |f(x)| <= cfg.tolerance_at(x). A step that lands outside
/// `in_domain` (or where f is not finite) is halved up to 10 times before
/// giving up with NonConvergence. A zero or non-finite derivative throws
/// DerivativeVanished so the caller can fall back to bisection.
RootResult newton_raphson(const ScalarFn& f, const ScalarFn& df, double x0,
                          const RootConfig& cfg = {}, const DomainFn& in_domain = {});

/// Bisection on [lo, hi]; f(lo) and f(hi) must differ in sign (NoBracket
/// otherwise). Stops when |f(mid)| or the half-width drops under
/// cfg.tolerance_at(mid), or the bracket reaches floating-point resolution.
RootResult bisection(const ScalarFn& f, double lo, double hi, const RootConfig& cfg = {});

} // namespace xborder::numerics
