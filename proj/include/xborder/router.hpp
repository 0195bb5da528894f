#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xborder/amm.hpp"
#include "xborder/cost_model.hpp"
#include "xborder/currency.hpp"

namespace xborder::router {

struct Venue {
    std::string id;
    Layer layer = Layer::l2l3;
    std::vector<amm::Pool> pools;
};

/// Buy `amount` of `receive`, paying in `pay`.
struct TradeRequest {
    Currency receive = kEur;
    double amount = 0.0;
    Currency pay = kChf;
    std::string date;
};

struct Candidate {
    std::string venue_id;
    std::string pool_id;
    Layer layer = Layer::l2l3;
    std::optional<amm::SwapQuote> quote; // empty when the pool cannot fill the trade
    CostBreakdown breakdown;
    std::string error;

    bool feasible() const { return quote.has_value(); }
};

struct RouteDecision {
    std::string venue_id;
    std::string pool_id;
    CostBreakdown breakdown;
    amm::SwapQuote quote;
    std::vector<Candidate> candidates; // sorted by (venue id, pool id)
};

/// Quotes every pool holding both trade currencies; pools that cannot fill the
/// order (liquidity, solver failure) are kept as infeasible candidates.
/// Costs are converted to `reporting` at the day's rates.
/// Throws NoVenueForPair when no pool holds the pair.
std::vector<Candidate> quote_all(const std::vector<Venue>& venues, const TradeRequest& trade, const RateTable& day,
                                 const GasModel& gas, const Currency& reporting = kEur);

/// Re-prices the gas component of already quoted candidates.
std::vector<Candidate> with_gas(std::vector<Candidate> candidates, const GasModel& gas);

/// Cheapest feasible candidate; ties go to the smallest (venue id, pool id).
/// Throws EmptyCandidates on an empty list and InsufficientLiquidity when no
/// candidate is feasible.
RouteDecision route(std::vector<Candidate> candidates);

} // namespace xborder::router
