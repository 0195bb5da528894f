#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xborder/amm.hpp"
#include "xborder/cost_model.hpp"
#include "xborder/currency.hpp"
#include "xborder/router.hpp"

namespace xborder::market_data {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; returns false on anything else (including 2023-02-30).
bool parse_date(std::string_view text, Date& out);
std::string format_date(const Date& d);

/// One day of closing rates. chf_eur is EUR per CHF (S_t), chf_sgd is SGD per
/// CHF (P_t).
struct FxRow {
    Date date;
    double chf_eur = 0.0;
    double chf_sgd = 0.0;

    /// CHF-numeraire rate table for the day.
    RateTable rates() const;
};

/// Date-ordered, duplicate-free daily rates.
class FxSeries {
public:
    FxSeries() = default;
    /// Sorts by date; throws MalformedRow on duplicates and NonPositiveRate on
    /// bad rates.
    explicit FxSeries(std::vector<FxRow> rows);

    const std::vector<FxRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const FxRow& operator[](std::size_t i) const { return rows_[i]; }

    /// Row for `date` or nullptr.
    const FxRow* find(const Date& date) const;

private:
    std::vector<FxRow> rows_;
};

/// Reads the `date,chf_eur,chf_sgd` format. Lines starting with '#' and blank
/// lines are skipped. Errors name the offending line.
FxSeries parse_fx_csv(std::istream& in, const std::string& source = "<stream>");
FxSeries load_fx_csv(const std::filesystem::path& path);

using PairSeries = std::vector<std::pair<Date, double>>;

/// Single-pair file: `date,rate`, or a Yahoo Finance export whose `Close`
/// column is used.
PairSeries parse_pair_csv(std::istream& in, const std::string& source = "<stream>");
PairSeries load_pair_csv(const std::filesystem::path& path);

/// Inner join of a CHF-EUR and a CHF-SGD series on date. Throws EmptySeries
/// when no date is shared.
FxSeries join_pairs(const PairSeries& chf_eur, const PairSeries& chf_sgd);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

struct PoolBlueprint {
    std::string venue_id;
    std::string pool_id;
    amm::AmmKind kind = amm::AmmKind::cryptoswap;
    std::vector<Currency> tokens;
    double share = 1.0; // of the scenario's total liquidity

    bool operator==(const PoolBlueprint&) const = default;
};

struct ScenarioSpec {
    std::string name;
    Layer layer = Layer::l2l3;
    double total_liquidity_chf = 100e6;
    double amplification = 50.0;
    double gamma = 1e-8;
    double alpha = 1.2;
    double fee_rate = 1e-4;
    std::vector<PoolBlueprint> pools;

    /// Throws invalid_argument unless shares sum to 1, ids are unique and
    /// every pool is well formed.
    void validate() const;
    amm::AmmParams params_for(amm::AmmKind kind) const;
    ScenarioSpec with_liquidity(double tvl_chf) const;

    bool operator==(const ScenarioSpec&) const = default;
};

/// Built-in presets "l1-mariana" and "l2l3-exchange".
ScenarioSpec preset(std::string_view name);
std::vector<std::string> preset_names();

/// Flat `key = value` scenario file; see scenarios/*.cfg.
ScenarioSpec parse_scenario(std::istream& in, const std::string& source = "<stream>");
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string to_config_text(const ScenarioSpec& spec);

/// Preset name or path to a scenario file.
ScenarioSpec resolve_scenario(const std::string& name_or_path);

/// Seeds every pool of `spec` at the day's rates: a pool of value V holding N
/// tokens gets N0 = V/N. Venues appear in blueprint order.
std::vector<router::Venue> pools_for_date(const ScenarioSpec& spec, const FxRow& day);

} // namespace xborder::market_data
