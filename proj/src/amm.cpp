#include "xborder/amm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "xborder/error.hpp"

namespace xborder::amm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double n_pow_n(std::size_t n) { return std::pow(static_cast<double>(n), static_cast<double>(n)); }

/// Amplification coefficient K as a function of K0, and dK/dK0.
struct Amplifier {
    bool crypto = false;
    double a = 0.0;
    double gamma = 0.0;

    static Amplifier of(const AmmParams& params) {
        return std::visit(Overloaded{
                              [](const CryptoswapParams& p) { return Amplifier{true, p.amplification, p.gamma}; },
                              [](const StableswapParams& p) { return Amplifier{false, p.amplification, 0.0}; },
                              [](const ClmmParams&) -> Amplifier {
                                  throw Error(ErrorKind::invalid_argument,
                                              "concentrated-liquidity pools have no D invariant");
                              },
                          },
                          params);
    }

    // K0 enters as 1 - K0 to keep gamma + 1 - K0 accurate near balance.
    double k(double k0, double one_minus_k0) const {
        if (!crypto) return a * k0;
        const double g = gamma + one_minus_k0;
        return a * k0 * gamma * gamma / (g * g);
    }

    double dk_dk0(double k0, double one_minus_k0) const {
        if (!crypto) return a;
        const double g = gamma + one_minus_k0;
        return a * gamma * gamma * (gamma + 1.0 + k0) / (g * g * g);
    }

    /// K(k0 + dk0) - K(k0) without cancellation.
    double k_delta(double k0, double one_minus_k0, double dk0) const {
        if (!crypto) return a * dk0;
        const double g = gamma + one_minus_k0;
        const double g_new = g - dk0;
        return a * gamma * gamma * dk0 * (g * g + 2.0 * k0 * g - k0 * dk0) / (g * g * g_new * g_new);
    }
};

/// K0 = prod(N*x_i/D) and 1 - K0.
std::pair<double, double> k0_of(std::span<const double> x, double d) {
    const double n = static_cast<double>(x.size());
    double k0 = 1.0;
    for (double xi : x) k0 *= n * xi / d;
    return {k0, 1.0 - k0};
}

double sum_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

void require_positive(std::span<const double> x) {
    if (x.size() < 2 || x.size() > 3) {
        throw Error(ErrorKind::invalid_argument, "Curve invariants support 2 or 3 tokens");
    }
    for (double v : x) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorKind::invalid_argument, "balances must be positive and finite");
        }
    }
}

double solve_d_impl(const Amplifier& amp, std::span<const double> x, const numerics::RootConfig& cfg) {
    require_positive(x);
    const double nn = n_pow_n(x.size());
    const double n = static_cast<double>(x.size());
    const double s = sum_of(x);

    auto residual = [&](double d) {
        const auto [k0, one_minus] = k0_of(x, d);
        return amp.k(k0, one_minus) * (s - d) - one_minus * d / nn;
    };
    auto derivative = [&](double d) {
        const auto [k0, one_minus] = k0_of(x, d);
        const double k = amp.k(k0, one_minus);
        const double dk = amp.dk_dk0(k0, one_minus);
        return -dk * n * k0 * (s - d) / d - k + (-one_minus - n * k0) / nn;
    };

    try {
        return numerics::newton_raphson(residual, derivative, s, cfg, [](double d) { return d > 0.0; }).root;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::non_convergence && e.kind() != ErrorKind::derivative_vanished) throw;
    }

    // Bisection fallback on [max x, N*sum], widened downwards if needed.
    double lo = *std::max_element(x.begin(), x.end());
    const double hi = n * s;
    for (int i = 0; i < 64 && residual(lo) <= 0.0; ++i) lo *= 0.5;
    return numerics::bisection(residual, lo, hi, cfg).root;
}

} // namespace

// ---------------------------------------------------------------------------

AmmKind kind_of(const AmmParams& params) {
    return std::visit(Overloaded{
                          [](const CryptoswapParams&) { return AmmKind::cryptoswap; },
                          [](const StableswapParams&) { return AmmKind::stableswap; },
                          [](const ClmmParams&) { return AmmKind::clmm; },
                      },
                      params);
}

std::string_view to_string(AmmKind kind) {
    switch (kind) {
    case AmmKind::cryptoswap: return "cryptoswap";
    case AmmKind::stableswap: return "stableswap";
    case AmmKind::clmm: return "clmm";
    }
    return "unknown";
}

std::optional<AmmKind> parse_amm_kind(std::string_view text) {
    if (text == "cryptoswap") return AmmKind::cryptoswap;
    if (text == "stableswap") return AmmKind::stableswap;
    if (text == "clmm") return AmmKind::clmm;
    return std::nullopt;
}

void validate(const AmmParams& params) {
    std::visit(Overloaded{
                   [](const CryptoswapParams& p) {
                       if (!(p.amplification > 0.0) || !(p.gamma > 0.0) || !(p.gamma < 1.0)) {
                           throw Error(ErrorKind::invalid_argument, "cryptoswap requires A > 0 and 0 < gamma < 1");
                       }
                   },
                   [](const StableswapParams& p) {
                       if (!(p.amplification > 0.0)) {
                           throw Error(ErrorKind::invalid_argument, "stableswap requires A > 0");
                       }
                   },
                   [](const ClmmParams& p) {
                       if (!(p.alpha > 1.0) || !std::isfinite(p.alpha)) {
                           throw Error(ErrorKind::invalid_argument, "clmm requires alpha > 1");
                       }
                   },
               },
               params);
}

// ---------------------------------------------------------------------------

Reserves::Reserves(std::vector<Reserve> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2 || entries_.size() > 3) {
        throw Error(ErrorKind::invalid_argument, "a pool holds 2 or 3 tokens");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(entries_[i].amount > 0.0) || !std::isfinite(entries_[i].amount)) {
            throw Error(ErrorKind::invalid_argument, "reserve of " + entries_[i].currency.code() + " must be positive");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (entries_[i].currency == entries_[j].currency) {
                throw Error(ErrorKind::invalid_argument, "duplicate currency " + entries_[i].currency.code());
            }
        }
    }
}

std::optional<std::size_t> Reserves::index_of(const Currency& c) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].currency == c) return i;
    }
    return std::nullopt;
}

double Reserves::amount(const Currency& c) const {
    const auto i = index_of(c);
    if (!i) throw Error(ErrorKind::invalid_argument, c.code() + " not in pool");
    return entries_[*i].amount;
}

std::vector<double> Reserves::amounts() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.amount);
    return out;
}

Reserves Reserves::scaled(double factor) const {
    auto copy = entries_;
    for (auto& e : copy) e.amount *= factor;
    return Reserves(std::move(copy));
}

Reserves Reserves::with_amount(std::size_t i, double amount) const {
    auto copy = entries_;
    copy.at(i).amount = amount;
    return Reserves(std::move(copy));
}

Reserves init_reserves(double n0, const std::vector<CurrencyRate>& rates) {
    if (!(n0 > 0.0) || !std::isfinite(n0)) {
        throw Error(ErrorKind::invalid_argument, "N0 must be positive");
    }
    std::vector<Reserve> entries;
    entries.reserve(rates.size());
    for (const auto& r : rates) {
        if (!(r.rate > 0.0) || !std::isfinite(r.rate)) {
            throw Error(ErrorKind::non_positive_rate, "rate for " + r.currency.code() + " must be positive");
        }
        entries.push_back({r.currency, r.rate * n0});
    }
    return Reserves(std::move(entries));
}

Pool Pool::create(std::string id, AmmParams params, double n0, std::vector<CurrencyRate> rates, double fee_rate) {
    validate(params);
    if (!(fee_rate >= 0.0) || fee_rate > 0.01) {
        throw Error(ErrorKind::invalid_argument, "fee_rate must lie in [0, 0.01]");
    }
    Pool pool;
    pool.id = std::move(id);
    pool.reserves = init_reserves(n0, rates);
    if (kind_of(params) == AmmKind::clmm && pool.reserves.size() != 2) {
        throw Error(ErrorKind::invalid_argument, "concentrated-liquidity pools hold exactly 2 tokens");
    }
    pool.params = params;
    pool.fee_rate = fee_rate;
    pool.creation_rates = std::move(rates);
    pool.creation_notional = n0;
    return pool;
}

bool Pool::supports(const Currency& a, const Currency& b) const {
    return a != b && reserves.contains(a) && reserves.contains(b);
}

std::vector<double> Pool::scaled_balances() const {
    std::vector<double> out;
    out.reserve(reserves.size());
    for (std::size_t i = 0; i < reserves.size(); ++i) out.push_back(reserves[i].amount / price_scale(i));
    return out;
}

double Pool::value(const RateTable& rates) const {
    double v = 0.0;
    for (const auto& e : reserves.entries()) v += e.amount / rates.rate(e.currency);
    return v;
}

// ---------------------------------------------------------------------------

double invariant_residual(const AmmParams& params, std::span<const double> balances, double d) {
    const auto amp = Amplifier::of(params);
    const auto [k0, one_minus] = k0_of(balances, d);
    return amp.k(k0, one_minus) * (sum_of(balances) - d) - one_minus * d / n_pow_n(balances.size());
}

double stableswap_solve_d(std::span<const double> balances, double amplification, const numerics::RootConfig& cfg) {
    validate(StableswapParams{amplification});
    return solve_d_impl(Amplifier{false, amplification, 0.0}, balances, cfg);
}

double cryptoswap_solve_d(std::span<const double> balances, double amplification, double gamma,
                          const numerics::RootConfig& cfg) {
    validate(CryptoswapParams{amplification, gamma});
    return solve_d_impl(Amplifier{true, amplification, gamma}, balances, cfg);
}

double stableswap_solve_d(const Reserves& reserves, double amplification, const numerics::RootConfig& cfg) {
    const auto x = reserves.amounts();
    return stableswap_solve_d(x, amplification, cfg);
}

double cryptoswap_solve_d(const Reserves& reserves, double amplification, double gamma,
                          const numerics::RootConfig& cfg) {
    const auto x = reserves.amounts();
    return cryptoswap_solve_d(x, amplification, gamma, cfg);
}

double solve_d(const AmmParams& params, std::span<const double> balances, const numerics::RootConfig& cfg) {
    validate(params);
    return solve_d_impl(Amplifier::of(params), balances, cfg);
}

double solve_input_delta(const AmmParams& params, std::span<const double> balances, double d, std::size_t in,
                         std::size_t out, double dy_out, const numerics::RootConfig& cfg) {
    require_positive(balances);
    if (in == out || in >= balances.size() || out >= balances.size()) {
        throw Error(ErrorKind::invalid_argument, "solve_input_delta: bad token indices");
    }
    if (!(dy_out >= 0.0)) throw Error(ErrorKind::invalid_argument, "output amount must be non-negative");
    if (dy_out >= balances[out]) {
        throw Error(ErrorKind::insufficient_liquidity, "output amount exceeds pool reserve");
    }
    if (dy_out == 0.0) return 0.0;

    const auto amp = Amplifier::of(params);
    const double nn = n_pow_n(balances.size());
    const auto [k0, one_minus] = k0_of(balances, d);
    const double k = amp.k(k0, one_minus);
    const double u = sum_of(balances) - d;
    const double x_in = balances[in];
    const double log_out = std::log1p(-dy_out / balances[out]);

    // Change of the residual relative to the current state. Written in
    // differences so small trades do not drown in the magnitude of D.
    auto state_after = [&](double delta) {
        const double dk0 = k0 * std::expm1(std::log1p(delta / x_in) + log_out);
        return dk0;
    };
    auto shift = [&](double delta) {
        const double dk0 = state_after(delta);
        const double dk = amp.k_delta(k0, one_minus, dk0);
        return dk * u + (k + dk) * (delta - dy_out) + dk0 * d / nn;
    };
    auto slope = [&](double delta) {
        const double dk0 = state_after(delta);
        const double k0n = k0 + dk0;
        const double one_minus_n = one_minus - dk0;
        const double xn = x_in + delta;
        const double u_n = u + (delta - dy_out);
        return amp.dk_dk0(k0n, one_minus_n) * (k0n / xn) * u_n + amp.k(k0n, one_minus_n) + (k0n / xn) * d / nn;
    };

    // Constant-product guess; Curve invariants are flatter, so it overshoots.
    const double guess = x_in * dy_out / (balances[out] - dy_out);
    try {
        return numerics::newton_raphson(shift, slope, guess, cfg, [](double v) { return v > 0.0; }).root;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::non_convergence && e.kind() != ErrorKind::derivative_vanished) throw;
    }
    double hi = guess;
    for (int i = 0; i < 200 && shift(hi) <= 0.0; ++i) hi *= 2.0;
    return numerics::bisection(shift, 0.0, hi, cfg).root;
}

// ---------------------------------------------------------------------------

double price_impact_fraction(double dx, double dy, double st) {
    if (!(dx > 0.0) || !(st > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "price_impact_fraction requires dx > 0 and st > 0");
    }
    return (dy / dx) / st - 1.0;
}

double clmm_price_impact(double dy, double n0, double s0, double st, double alpha) {
    if (!(alpha > 1.0) || !(n0 > 0.0) || !(s0 > 0.0) || !(st > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "clmm_price_impact requires alpha > 1 and positive n0, s0, st");
    }
    if (!(dy >= 0.0)) throw Error(ErrorKind::invalid_argument, "dy must be non-negative");
    const double depth = n0 * std::sqrt(s0 * st);
    if (dy > depth) {
        std::ostringstream msg;
        msg << "trade of " << dy << " exceeds in-range liquidity " << depth;
        throw Error(ErrorKind::range_exceeded, msg.str());
    }
    return dy / depth * (1.0 - 1.0 / std::sqrt(alpha));
}

SwapQuote swap_exact_out(const Pool& pool, const Currency& pay, const Currency& receive, double dy,
                         double spot_rate, const numerics::RootConfig& cfg) {
    if (pay == receive) throw Error(ErrorKind::invalid_argument, "pay and receive currencies must differ");
    const auto in = pool.reserves.index_of(pay);
    const auto out = pool.reserves.index_of(receive);
    if (!in || !out) {
        throw Error(ErrorKind::invalid_argument, "pool " + pool.id + " does not hold " + pay.code() + "/" +
                                                     receive.code());
    }
    if (!(dy > 0.0) || !std::isfinite(dy)) throw Error(ErrorKind::invalid_argument, "dy must be positive");
    if (!(spot_rate > 0.0) || !std::isfinite(spot_rate)) {
        throw Error(ErrorKind::invalid_argument, "spot rate must be positive");
    }
    if (dy >= pool.reserves[*out].amount) {
        throw Error(ErrorKind::insufficient_liquidity, "pool " + pool.id + " holds less than the requested output");
    }

    double dx = 0.0;
    if (pool.kind() == AmmKind::clmm) {
        const auto& p = std::get<ClmmParams>(pool.params);
        const double s0 = pool.price_scale(*out) / pool.price_scale(*in);
        const double n0_pay = pool.creation_notional * pool.price_scale(*in);
        double impact = 0.0;
        try {
            impact = clmm_price_impact(dy, n0_pay, s0, spot_rate, p.alpha);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::range_exceeded) throw;
            throw Error(ErrorKind::insufficient_liquidity, "pool " + pool.id + ": " + e.what());
        }
        dx = (dy + impact * dy) / spot_rate;
    } else {
        const auto xp = pool.scaled_balances();
        const double d = solve_d(pool.params, xp, cfg);
        const double dy_scaled = dy / pool.price_scale(*out);
        dx = solve_input_delta(pool.params, xp, d, *in, *out, dy_scaled, cfg) * pool.price_scale(*in);
    }

    SwapQuote q;
    q.pay = pay;
    q.receive = receive;
    q.input_amount = dx;
    q.output_amount = dy;
    q.spot_rate = spot_rate;
    q.executed_rate = dy / dx;
    q.price_impact_fraction = price_impact_fraction(dx, dy, spot_rate);
    q.price_impact_cost = spot_rate * dx - dy;
    q.reserves_after = pool.reserves.with_amount(*in, pool.reserves[*in].amount + dx)
                           .with_amount(*out, pool.reserves[*out].amount - dy);
    return q;
}

Pool apply(const Pool& pool, const SwapQuote& quote) {
    Pool next = pool;
    next.reserves = quote.reserves_after;
    return next;
}

double spot_price(const Pool& pool, const Currency& base, const Currency& quote, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw Error(ErrorKind::invalid_argument, "epsilon must lie in (0,1)");
    const auto ib = pool.reserves.index_of(base);
    const auto iq = pool.reserves.index_of(quote);
    if (!ib || !iq || *ib == *iq) throw Error(ErrorKind::invalid_argument, "spot_price: currencies not in pool");

    // Reference rate only matters for the concentrated-liquidity formula.
    const double reference = pool.price_scale(*iq) / pool.price_scale(*ib);

    const double dq = epsilon * pool.reserves[*iq].amount;
    const auto buy_quote = swap_exact_out(pool, base, quote, dq, reference);
    const double db = epsilon * pool.reserves[*ib].amount;
    const auto buy_base = swap_exact_out(pool, quote, base, db, 1.0 / reference);

    const double bid = dq / buy_quote.input_amount; // quote received per base paid
    const double ask = buy_base.input_amount / db;  // quote paid per base received
    return std::sqrt(bid * ask);
}

// ---------------------------------------------------------------------------

double clmm_liquidity(double x, double y, double price, double alpha) {
    if (!(alpha > 1.0) || !(price > 0.0) || !(x >= 0.0) || !(y >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "clmm_liquidity: bad arguments");
    }
    const double sp = std::sqrt(price);
    const double width = 1.0 - 1.0 / std::sqrt(alpha);
    return std::min(x * sp / width, y / (sp * width));
}

double clmm_exact_out_input(double x, double y, double price, double alpha, double dy) {
    const double l = clmm_liquidity(x, y, price, alpha);
    const double sp = std::sqrt(price);
    const double sa = std::sqrt(alpha);
    const double y_real = l * sp * (1.0 - 1.0 / sa);
    if (dy > y_real) throw Error(ErrorKind::range_exceeded, "trade leaves the liquidity range");
    const double x_virtual = x + l / (sp * sa);
    const double y_virtual = y + l * sp / sa;
    return x_virtual * dy / (y_virtual - dy);
}

} // namespace xborder::amm
