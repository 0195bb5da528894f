#include "xborder/cost_model.hpp"

#include <cmath>

#include "xborder/error.hpp"

namespace xborder {

std::string_view to_string(Layer layer) { return layer == Layer::l1 ? "L1" : "L2L3"; }

Layer parse_layer(std::string_view text) {
    if (text == "L1" || text == "l1") return Layer::l1;
    if (text == "L2L3" || text == "l2l3" || text == "L2" || text == "l2") return Layer::l2l3;
    throw Error(ErrorKind::invalid_argument, "unknown layer '" + std::string(text) + "'");
}

void GasModel::validate() const {
    if (!(l1_gas_eur >= 0.0) || !std::isfinite(l1_gas_eur)) {
        throw Error(ErrorKind::invalid_argument, "L1 gas must be non-negative");
    }
    if (!(l2_divisor > 0.0) || !std::isfinite(l2_divisor)) {
        throw Error(ErrorKind::invalid_argument, "L2 gas divisor must be positive");
    }
}

CostBreakdown make_breakdown(double gas, double lp, double impact) {
    return {gas, lp, impact, gas + lp + impact};
}

double gas_fee(Layer layer, const GasModel& model) {
    model.validate();
    return layer == Layer::l1 ? model.l1_gas_eur : model.l1_gas_eur / model.l2_divisor;
}

double lp_fee(double volume_eur, double fee_rate) {
    if (!(fee_rate >= 0.0) || fee_rate > 0.01) {
        throw Error(ErrorKind::invalid_argument, "fee_rate must lie in [0, 0.01]");
    }
    if (!(volume_eur >= 0.0)) throw Error(ErrorKind::invalid_argument, "volume must be non-negative");
    return volume_eur * fee_rate;
}

CostBreakdown total_swap_cost(const amm::SwapQuote& quote, Layer layer, const GasModel& model, double fee_rate,
                              double to_eur) {
    const double volume_eur = quote.output_amount * to_eur;
    return make_breakdown(gas_fee(layer, model), lp_fee(volume_eur, fee_rate), quote.price_impact_cost * to_eur);
}

CostBreakdown zero_volume_cost(Layer layer, const GasModel& model) {
    return make_breakdown(gas_fee(layer, model), 0.0, 0.0);
}

long basis_points(double component, double volume) {
    if (!(volume > 0.0)) return 0;
    return std::lround(component / volume * 1e4);
}

} // namespace xborder
