#include "xborder/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xborder/error.hpp"

namespace xborder::numerics {

namespace {

constexpr int kMaxStepHalvings = 10;

} // namespace

void RootConfig::validate() const {
    if (!(rel_tolerance > 0.0) || !(abs_tolerance > 0.0) || max_iterations < 1) {
        throw Error(ErrorKind::invalid_argument,
                    "RootConfig requires positive tolerances and max_iterations >= 1");
    }
}

double RootConfig::tolerance_at(double x) const {
    return std::max(abs_tolerance, rel_tolerance * std::abs(x));
}

RootResult newton_raphson(const ScalarFn& f, const ScalarFn& df, double x0, const RootConfig& cfg,
                          const DomainFn& in_domain) {
    cfg.validate();
    if (!std::isfinite(x0)) {
        throw Error(ErrorKind::invalid_argument, "newton_raphson: non-finite initial guess");
    }
    auto admissible = [&](double x) { return std::isfinite(x) && (!in_domain || in_domain(x)); };

    double x = x0;
    double fx = f(x);
    if (!std::isfinite(fx)) {
        throw Error(ErrorKind::invalid_argument, "newton_raphson: f not finite at initial guess");
    }
    if (std::abs(fx) <= cfg.tolerance_at(x)) return {x, 0, fx};

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const double d = df(x);
        const double step = fx / d;
        if (d == 0.0 || !std::isfinite(d) || !std::isfinite(step)) {
            std::ostringstream msg;
            msg << "derivative " << d << " at x=" << x << " (iteration " << it << ")";
            throw Error(ErrorKind::derivative_vanished, msg.str());
        }

        double scale = 1.0;
        double next = x - step;
        double fnext = admissible(next) ? f(next) : NAN;
        int halvings = 0;
        while (!std::isfinite(fnext)) {
            if (++halvings > kMaxStepHalvings) {
                throw Error(ErrorKind::non_convergence,
                            "newton_raphson: step left the valid domain after damping");
            }
            scale *= 0.5;
            next = x - scale * step;
            fnext = admissible(next) ? f(next) : NAN;
        }

        if (next == x) {
            // Step below floating-point resolution without meeting the tolerance.
            throw Error(ErrorKind::non_convergence, "newton_raphson: stagnated");
        }
        x = next;
        fx = fnext;
        if (std::abs(fx) <= cfg.tolerance_at(x)) return {x, it, fx};
    }
    std::ostringstream msg;
    msg << "newton_raphson: " << cfg.max_iterations << " iterations exhausted, |f|=" << std::abs(fx);
    throw Error(ErrorKind::non_convergence, msg.str());
}

RootResult bisection(const ScalarFn& f, double lo, double hi, const RootConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw Error(ErrorKind::invalid_argument, "bisection: non-finite bracket");
    }
    if (lo > hi) std::swap(lo, hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return {lo, 0, flo};
    if (fhi == 0.0) return {hi, 0, fhi};
    if (std::signbit(flo) == std::signbit(fhi)) {
        std::ostringstream msg;
        msg << "f(" << lo << ")=" << flo << " and f(" << hi << ")=" << fhi << " share a sign";
        throw Error(ErrorKind::no_bracket, msg.str());
    }
    const bool lo_negative = std::signbit(flo);

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        const double fm = f(mid);
        const double tol = cfg.tolerance_at(mid);
        if (fm == 0.0 || std::abs(fm) <= tol || 0.5 * (hi - lo) <= tol || mid == lo || mid == hi) {
            return {mid, it, fm};
        }
        if (std::signbit(fm) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw Error(ErrorKind::non_convergence, "bisection: iteration cap reached");
}

} // namespace xborder::numerics
