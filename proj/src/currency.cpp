#include "xborder/currency.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "xborder/error.hpp"

namespace xborder {

Currency::Currency(std::string_view code) : code_(code) {
    const bool ok = code_.size() == 3 && std::all_of(code_.begin(), code_.end(), [](unsigned char ch) {
                        return std::isupper(ch) != 0;
                    });
    if (!ok) {
        throw Error(ErrorKind::invalid_argument, "currency code must be 3 upper-case letters: '" + code_ + "'");
    }
}

std::ostream& operator<<(std::ostream& os, const Currency& c) { return os << c.code(); }

RateTable::RateTable(Currency numeraire) : numeraire_(std::move(numeraire)) {
    rates_.push_back({numeraire_, 1.0});
}

RateTable& RateTable::set(const Currency& c, double units_per_numeraire) {
    if (!(units_per_numeraire > 0.0) || !std::isfinite(units_per_numeraire)) {
        throw Error(ErrorKind::non_positive_rate, "rate for " + c.code() + " must be positive and finite");
    }
    if (c == numeraire_ && units_per_numeraire != 1.0) {
        throw Error(ErrorKind::invalid_argument, "numeraire rate is fixed at 1");
    }
    auto it = std::find_if(rates_.begin(), rates_.end(), [&](const CurrencyRate& r) { return r.currency == c; });
    if (it == rates_.end()) {
        rates_.push_back({c, units_per_numeraire});
    } else {
        it->rate = units_per_numeraire;
    }
    return *this;
}

bool RateTable::contains(const Currency& c) const {
    return std::any_of(rates_.begin(), rates_.end(), [&](const CurrencyRate& r) { return r.currency == c; });
}

double RateTable::rate(const Currency& c) const {
    for (const auto& r : rates_) {
        if (r.currency == c) return r.rate;
    }
    throw Error(ErrorKind::invalid_argument, "no rate for " + c.code());
}

std::vector<CurrencyRate> RateTable::select(const std::vector<Currency>& tokens) const {
    std::vector<CurrencyRate> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back({t, rate(t)});
    return out;
}

} // namespace xborder
