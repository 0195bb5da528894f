#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xborder/currency.hpp"
#include "xborder/numerics.hpp"

namespace xborder::amm {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Curve v2 style invariant: Stableswap with K = A*K0*gamma^2/(gamma+1-K0)^2,
/// K0 = prod(x)*N^N/D^N.
struct CryptoswapParams {
    double amplification = 50.0;
    double gamma = 1e-8;
};

/// Curve v1 style invariant: K = A*K0.
struct StableswapParams {
    double amplification = 50.0;
};

/// Concentrated constant product on the price range [S/alpha, S*alpha].
struct ClmmParams {
    double alpha = 1.2;
};

using AmmParams = std::variant<CryptoswapParams, StableswapParams, ClmmParams>;

enum class AmmKind { cryptoswap, stableswap, clmm };

AmmKind kind_of(const AmmParams& params);
std::string_view to_string(AmmKind kind);
std::optional<AmmKind> parse_amm_kind(std::string_view text);

/// Throws Error(invalid_argument) on A <= 0, gamma outside (0,1), alpha <= 1.
void validate(const AmmParams& params);

// ---------------------------------------------------------------------------
// Reserves and pools
// ---------------------------------------------------------------------------

struct Reserve {
    Currency currency;
    double amount = 0.0;
};

/// Ordered token balances of one pool; 2 or 3 distinct currencies, all > 0.
class Reserves {
public:
    Reserves() = default;
    explicit Reserves(std::vector<Reserve> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    const Reserve& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<Reserve>& entries() const noexcept { return entries_; }

    std::optional<std::size_t> index_of(const Currency& c) const;
    bool contains(const Currency& c) const { return index_of(c).has_value(); }
    double amount(const Currency& c) const;
    std::vector<double> amounts() const;

    Reserves scaled(double factor) const;
    Reserves with_amount(std::size_t i, double amount) const;

private:
    std::vector<Reserve> entries_;
};

/// Pool balances at creation: numeraire reserve = n0, every other reserve =
/// rate * n0 (x0 = N0, y0 = S0*N0, z0 = P0*N0).
Reserves init_reserves(double n0, const std::vector<CurrencyRate>& rates);

struct Pool {
    std::string id;
    AmmParams params;
    Reserves reserves;
    double fee_rate = 1e-4;
    /// Rates vs the numeraire at the last (re)initialisation, one per token in
    /// reserve order. Curve pools use them as the price scale of each token.
    std::vector<CurrencyRate> creation_rates;
    double creation_notional = 0.0; // N0

    /// Seeds a pool at `rates` with numeraire reserve `n0`.
    static Pool create(std::string id, AmmParams params, double n0, std::vector<CurrencyRate> rates,
                       double fee_rate = 1e-4);

    AmmKind kind() const { return kind_of(params); }
    bool supports(const Currency& a, const Currency& b) const;
    double price_scale(std::size_t i) const { return creation_rates.at(i).rate; }
    /// Reserves divided by their price scale (numeraire units).
    std::vector<double> scaled_balances() const;
    /// Pool value in numeraire units at the given rates.
    double value(const RateTable& rates) const;
};

// ---------------------------------------------------------------------------
// Curve invariants
// ---------------------------------------------------------------------------

/// F(x, D) / D^(N-1) = K*(sum - D) + (K0 - 1)*D/N^N, in reserve units.
/// Zero on the invariant surface. Only defined for Curve invariants.
double invariant_residual(const AmmParams& params, std::span<const double> balances, double d);

double stableswap_solve_d(std::span<const double> balances, double amplification,
                          const numerics::RootConfig& cfg = {});
double cryptoswap_solve_d(std::span<const double> balances, double amplification, double gamma,
                          const numerics::RootConfig& cfg = {});
double stableswap_solve_d(const Reserves& reserves, double amplification, const numerics::RootConfig& cfg = {});
double cryptoswap_solve_d(const Reserves& reserves, double amplification, double gamma,
                          const numerics::RootConfig& cfg = {});

/// Dispatches on params; throws invalid_argument for CLMM.
double solve_d(const AmmParams& params, std::span<const double> balances, const numerics::RootConfig& cfg = {});

/// Pay-side balance increment that keeps the invariant through `balances`
/// after `dy_out` leaves token `out`. Same units as `balances`.
double solve_input_delta(const AmmParams& params, std::span<const double> balances, double d, std::size_t in,
                         std::size_t out, double dy_out, const numerics::RootConfig& cfg = {});

// ---------------------------------------------------------------------------
// Swaps and price impact
// ---------------------------------------------------------------------------

struct SwapQuote {
    Currency pay;
    Currency receive;
    double input_amount = 0.0;          // dx, pay units
    double output_amount = 0.0;         // dy, receive units
    double price_impact_fraction = 0.0; // (dy/dx)/S - 1, signed
    double price_impact_cost = 0.0;     // S*dx - dy, receive units
    double executed_rate = 0.0;         // dy/dx
    double spot_rate = 0.0;             // S, receive units per pay unit
    Reserves reserves_after;
};

/// (dy/dx)/st - 1.
double price_impact_fraction(double dx, double dy, double st);

/// Concentrated-liquidity price impact dy/(n0*sqrt(s0*st)) * (1 - 1/sqrt(alpha)).
/// Throws RangeExceeded when dy > n0*sqrt(s0*st).
double clmm_price_impact(double dy, double n0, double s0, double st, double alpha);

/// Fee-free exact-output swap: receive `dy` of `receive`, pay the returned
/// input_amount of `pay`. `spot_rate` is the market rate S_t in receive units
/// per pay unit. The pool itself is not modified; see SwapQuote::reserves_after.
SwapQuote swap_exact_out(const Pool& pool, const Currency& pay, const Currency& receive, double dy,
                         double spot_rate, const numerics::RootConfig& cfg = {});

/// Pool with the post-trade reserves of `quote`.
Pool apply(const Pool& pool, const SwapQuote& quote);

/// Marginal price of `base` in `quote` units by finite differences: the
/// geometric mean of an exact-out buy of epsilon*quote_reserve and an
/// exact-out buy of epsilon*base_reserve. Error is O(epsilon^2).
double spot_price(const Pool& pool, const Currency& base, const Currency& quote, double epsilon = 1e-6);

// ---------------------------------------------------------------------------
// Concentrated liquidity on the full curve (x + L/sqrt(Su))(y + L*sqrt(Sl)) = L^2
// ---------------------------------------------------------------------------

/// Liquidity L of a position holding real balances (x, y) at price `price`
/// (y per x) on the range [price/alpha, price*alpha].
double clmm_liquidity(double x, double y, double price, double alpha);

/// Exact x paid to receive dy of y on the virtual constant-product curve.
double clmm_exact_out_input(double x, double y, double price, double alpha, double dy);

} // namespace xborder::amm
