#pragma once

#include <compare>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace xborder {

/// Three-letter upper-case currency code (CHF, EUR, SGD, ...).
class Currency {
public:
    Currency() = default;
    explicit Currency(std::string_view code);

    const std::string& code() const noexcept { return code_; }

    auto operator<=>(const Currency&) const = default;

private:
    std::string code_;
};

std::ostream& operator<<(std::ostream& os, const Currency& c);

inline const Currency kChf{"CHF"};
inline const Currency kEur{"EUR"};
inline const Currency kSgd{"SGD"};

struct CurrencyRate {
    Currency currency;
    double rate = 1.0; // units of `currency` per unit of numeraire
};

/// Spot rates of a set of currencies against one numeraire. The numeraire is
/// always present with rate 1.
class RateTable {
public:
    explicit RateTable(Currency numeraire = kChf);

    /// Throws NonPositiveRate unless the rate is positive and finite.
    RateTable& set(const Currency& c, double units_per_numeraire);

    const Currency& numeraire() const noexcept { return numeraire_; }
    bool contains(const Currency& c) const;
    double rate(const Currency& c) const;

    /// Units of `to` obtained for one unit of `from` at these rates.
    double cross(const Currency& from, const Currency& to) const { return rate(to) / rate(from); }
    double convert(double amount, const Currency& from, const Currency& to) const {
        return amount * cross(from, to);
    }

    /// Rates for `tokens`, in that order.
    std::vector<CurrencyRate> select(const std::vector<Currency>& tokens) const;

private:
    Currency numeraire_;
    std::vector<CurrencyRate> rates_;
};

} // namespace xborder
