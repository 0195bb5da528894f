#pragma once

#include <string_view>

#include "xborder/amm.hpp"

namespace xborder {

enum class Layer { l1, l2l3 };

std::string_view to_string(Layer layer);
Layer parse_layer(std::string_view text);

struct GasModel {
    double l1_gas_eur = 15.0;
    double l2_divisor = 50.0;

    void validate() const;
};

/// Costs of one executed swap, all in the reporting currency (EUR).
/// total is gas_fee + lp_fee + price_impact_cost, summed in that order.
struct CostBreakdown {
    double gas_fee = 0.0;
    double lp_fee = 0.0;
    double price_impact_cost = 0.0;
    double total = 0.0;
};

CostBreakdown make_breakdown(double gas_fee, double lp_fee, double price_impact_cost);

double gas_fee(Layer layer, const GasModel& model);

double lp_fee(double volume_eur, double fee_rate);

/// Gas + LP fee + price impact for `quote`. `to_eur` converts amounts of the
/// quote's receive currency to EUR (1 for EUR purchases). One gas fee is
/// charged per executed swap.
CostBreakdown total_swap_cost(const amm::SwapQuote& quote, Layer layer, const GasModel& model, double fee_rate,
                              double to_eur = 1.0);

/// Degenerate zero-volume trade: gas only.
CostBreakdown zero_volume_cost(Layer layer, const GasModel& model);

/// component / volume in basis points, rounded for display.
long basis_points(double component, double volume);

} // namespace xborder
