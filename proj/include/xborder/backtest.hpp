#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "xborder/cost_model.hpp"
#include "xborder/currency.hpp"
#include "xborder/market_data.hpp"

namespace xborder::backtest {

/// n log-spaced points on [lo, hi], both ends included.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// 30 log-spaced volumes on [1, 1e6] EUR.
std::vector<double> default_volume_grid();
/// 20 log-spaced gas levels on [1, 1000] EUR plus 15 and 800.
std::vector<double> default_gas_grid();

struct BacktestConfig {
    std::filesystem::path fx_path;
    std::vector<market_data::ScenarioSpec> scenarios;
    std::vector<double> volumes_eur{1e4, 1e5, 1e6};
    /// The backtest charges the first level; sweeps use all of them.
    std::vector<double> gas_levels_eur{15.0};
    std::vector<double> tvl_levels_chf{100e6};
    double l2_divisor = 50.0;
    Currency pay = kChf;
    Currency receive = kEur;
    unsigned threads = 0; // 0: hardware concurrency

    /// Both built-in presets, Table-1 volumes, 15 EUR gas, 100mn CHF.
    static BacktestConfig defaults();

    void validate() const;
    GasModel gas_model(double l1_gas_eur) const { return {l1_gas_eur, l2_divisor}; }
};

/// Flat `key = value` config file: fx, scenario (repeatable), volumes, gas,
/// tvl, l2_divisor, pay, receive, threads. Lists are comma separated;
/// `volumes = sweep` / `gas = sweep` select the default sweep grids.
/// Relative paths resolve against the config file's directory.
BacktestConfig load_config(const std::filesystem::path& path);
BacktestConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                            const std::string& source = "<stream>");

struct ReportRow {
    market_data::Date date;
    std::string scenario;
    double volume_eur = 0.0;
    std::string venue;
    std::string pool;
    CostBreakdown cost;
    double impact_fraction = 0.0; // signed execution-vs-spot fraction
};

struct ErrorRow {
    market_data::Date date;
    std::string scenario;
    double volume_eur = 0.0;
    std::string message;
};

struct Aggregate {
    std::string scenario;
    double volume_eur = 0.0;
    std::size_t days = 0;
    std::size_t errors = 0;
    CostBreakdown mean;
    std::map<std::string, std::size_t> selections; // "venue/pool" -> days chosen
};

struct BacktestReport {
    std::vector<ReportRow> rows;  // date, then scenario, then volume order
    std::vector<ErrorRow> errors; // excluded from aggregates

    /// Per scenario x volume means, in first-appearance order. Sums run in
    /// row (date) order.
    std::vector<Aggregate> aggregates() const;
};

/// Seeds, quotes, routes and costs an exact-output `receive` purchase for every
/// day x scenario x volume.
BacktestReport run_backtest(const BacktestConfig& cfg, const market_data::FxSeries& fx);
BacktestReport run_backtest(const BacktestConfig& cfg);

// ---------------------------------------------------------------------------

struct TableRow {
    std::string scenario;
    std::string size;
    double volume_eur = 0.0;
    std::size_t days = 0;
    CostBreakdown mean;
};

/// Table-1 style average fee breakdown. Throws EmptyReport.
std::vector<TableRow> aggregate_table(const BacktestReport& report);
std::string format_table_text(const std::vector<TableRow>& rows);
std::string format_table_csv(const std::vector<TableRow>& rows);

// ---------------------------------------------------------------------------

struct SweepCell {
    double gas_eur = 0.0;
    double volume_eur = 0.0;
    double tvl_chf = 0.0;
    double diff_eur = 0.0;    // mean total(L1) - mean total(L2L3); > 0: L2L3 cheaper
    double diff_pct = 0.0;    // 100 * diff_eur / mean total(L1)
    double mean_l1 = 0.0;
    double mean_l2l3 = 0.0;
    std::size_t days = 0;
};

struct SweepGrid {
    double tvl_chf = 0.0;
    std::vector<SweepCell> cells; // gas-major, volume-minor
    const SweepCell& at(double gas_eur, double volume_eur) const;
};

/// Gas x volume grid of the mean total-cost difference between the first L1
/// scenario and the first L2L3 scenario of `cfg`, both scaled to `tvl_chf`.
SweepGrid sweep_gas_volume(const BacktestConfig& cfg, const market_data::FxSeries& fx, double tvl_chf);

/// One sweep_gas_volume grid per cfg.tvl_levels_chf entry.
std::vector<SweepGrid> sweep_tvl(const BacktestConfig& cfg, const market_data::FxSeries& fx);

// ---------------------------------------------------------------------------
// CSV writers

std::string format_number(double v);
void write_report_csv(std::ostream& out, const BacktestReport& report);
void write_errors_csv(std::ostream& out, const BacktestReport& report);
void write_sweep_csv(std::ostream& out, const std::vector<SweepGrid>& grids);

} // namespace xborder::backtest
