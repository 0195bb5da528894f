#include "xborder/router.hpp"

#include <algorithm>
#include <tuple>

#include "xborder/error.hpp"

namespace xborder::router {

namespace {

void sort_by_id(std::vector<Candidate>& candidates) {
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.venue_id, a.pool_id) < std::tie(b.venue_id, b.pool_id);
    });
}

} // namespace

std::vector<Candidate> quote_all(const std::vector<Venue>& venues, const TradeRequest& trade, const RateTable& day,
                                 const GasModel& gas, const Currency& reporting) {
    if (!(trade.amount > 0.0)) throw Error(ErrorKind::invalid_argument, "trade amount must be positive");
    const bool any = std::any_of(venues.begin(), venues.end(), [&](const Venue& v) {
        return std::any_of(v.pools.begin(), v.pools.end(),
                           [&](const amm::Pool& p) { return p.supports(trade.pay, trade.receive); });
    });
    if (!any) {
        throw Error(ErrorKind::no_venue_for_pair,
                    "no pool trades " + trade.pay.code() + "/" + trade.receive.code());
    }
    const double spot = day.cross(trade.pay, trade.receive);
    const double to_reporting = day.cross(trade.receive, reporting);

    std::vector<Candidate> out;
    for (const auto& venue : venues) {
        for (const auto& pool : venue.pools) {
            if (!pool.supports(trade.pay, trade.receive)) continue;
            Candidate c;
            c.venue_id = venue.id;
            c.pool_id = pool.id;
            c.layer = venue.layer;
            try {
                auto q = amm::swap_exact_out(pool, trade.pay, trade.receive, trade.amount, spot);
                c.breakdown = total_swap_cost(q, venue.layer, gas, pool.fee_rate, to_reporting);
                c.quote = std::move(q);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::insufficient_liquidity && e.kind() != ErrorKind::non_convergence &&
                    e.kind() != ErrorKind::no_bracket) {
                    throw;
                }
                c.error = e.what();
            }
            out.push_back(std::move(c));
        }
    }
    sort_by_id(out);
    return out;
}

std::vector<Candidate> with_gas(std::vector<Candidate> candidates, const GasModel& gas) {
    for (auto& c : candidates) {
        if (!c.feasible()) continue;
        c.breakdown = make_breakdown(gas_fee(c.layer, gas), c.breakdown.lp_fee, c.breakdown.price_impact_cost);
    }
    return candidates;
}

RouteDecision route(std::vector<Candidate> candidates) {
    if (candidates.empty()) throw Error(ErrorKind::empty_candidates, "nothing to route");
    sort_by_id(candidates);

    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
        if (!c.feasible()) continue;
        if (best == nullptr || c.breakdown.total < best->breakdown.total) best = &c;
    }
    if (best == nullptr) {
        throw Error(ErrorKind::insufficient_liquidity, "no candidate can fill the trade: " + candidates.front().error);
    }

    RouteDecision d;
    d.venue_id = best->venue_id;
    d.pool_id = best->pool_id;
    d.breakdown = best->breakdown;
    d.quote = *best->quote;
    d.candidates = std::move(candidates);
    return d;
}

} // namespace xborder::router
