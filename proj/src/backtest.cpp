#include "xborder/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "xborder/error.hpp"
#include "xborder/router.hpp"

namespace xborder::backtest {

using market_data::FxRow;
using market_data::FxSeries;
using market_data::ScenarioSpec;

namespace {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots so the caller can reduce in index order.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string size_label(double volume) {
    if (volume == 1e4) return "Small";
    if (volume == 1e5) return "Medium";
    if (volume == 1e6) return "Large";
    return format_number(volume);
}

std::string money(double v, int decimals) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(decimals) << std::abs(v);
    std::string digits = s.str();
    const auto dot = digits.find('.');
    std::string whole = digits.substr(0, dot);
    for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) whole.insert(static_cast<std::size_t>(i), ",");
    return (v < 0 ? "-" : "") + whole + (dot == std::string::npos ? "" : digits.substr(dot));
}

std::string fee_cell(double value, double volume) {
    return money(value, 2) + " (" + std::to_string(basis_points(value, volume)) + "bps)";
}

const ScenarioSpec& first_with_layer(const BacktestConfig& cfg, Layer layer) {
    for (const auto& s : cfg.scenarios) {
        if (s.layer == layer) return s;
    }
    throw Error(ErrorKind::invalid_argument,
                "sweeps need one " + std::string(to_string(layer)) + " scenario in the config");
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw Error(ErrorKind::invalid_argument, "bad log grid");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> default_volume_grid() { return log_grid(1.0, 1e6, 30); }

std::vector<double> default_gas_grid() {
    auto g = log_grid(1.0, 1000.0, 20);
    g.push_back(15.0);
    g.push_back(800.0);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

BacktestConfig BacktestConfig::defaults() {
    BacktestConfig cfg;
    cfg.scenarios = {market_data::preset("l1-mariana"), market_data::preset("l2l3-exchange")};
    return cfg;
}

void BacktestConfig::validate() const {
    auto positive = [](const std::vector<double>& v, const char* what) {
        if (v.empty()) throw Error(ErrorKind::invalid_argument, std::string(what) + " grid is empty");
        for (double x : v) {
            if (!(x > 0.0) || !std::isfinite(x)) {
                throw Error(ErrorKind::invalid_argument, std::string(what) + " values must be positive");
            }
        }
    };
    positive(volumes_eur, "volume");
    positive(tvl_levels_chf, "tvl");
    if (gas_levels_eur.empty()) throw Error(ErrorKind::invalid_argument, "gas grid is empty");
    for (double g : gas_levels_eur) gas_model(g).validate();
    std::set<std::string> names;
    for (const auto& s : scenarios) {
        s.validate();
        if (!names.insert(s.name).second) throw Error(ErrorKind::invalid_argument, "duplicate scenario " + s.name);
    }
    if (pay == receive) throw Error(ErrorKind::invalid_argument, "pay and receive currencies must differ");
}

BacktestConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, const std::string& source) {
    BacktestConfig cfg;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::invalid_argument, source + ":" + std::to_string(line_no) + ": " + why);
    };
    auto number = [&](std::string_view v) {
        v = trim(v);
        double out = 0.0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) fail("bad number '" + std::string(v) + "'");
        return out;
    };
    auto list = [&](std::string_view v) {
        std::vector<double> out;
        std::size_t start = 0;
        while (start <= v.size()) {
            const auto pos = v.find(',', start);
            out.push_back(number(v.substr(start, pos == std::string_view::npos ? v.npos : pos - start)));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        return out;
    };
    auto resolve = [&](std::string_view p) {
        std::filesystem::path path{std::string(p)};
        return path.is_relative() ? base_dir / path : path;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) fail("expected 'key = value'");
        const std::string key(trim(t.substr(0, eq)));
        const auto value = trim(t.substr(eq + 1));
        if (key == "fx") {
            cfg.fx_path = resolve(value);
        } else if (key == "scenario") {
            const std::string v(value);
            const auto names = market_data::preset_names();
            if (std::find(names.begin(), names.end(), v) != names.end()) {
                cfg.scenarios.push_back(market_data::preset(v));
            } else {
                cfg.scenarios.push_back(market_data::load_scenario(resolve(value)));
            }
        } else if (key == "volumes") {
            cfg.volumes_eur = value == "sweep" ? default_volume_grid() : list(value);
        } else if (key == "gas") {
            cfg.gas_levels_eur = value == "sweep" ? default_gas_grid() : list(value);
        } else if (key == "tvl") {
            cfg.tvl_levels_chf = list(value);
        } else if (key == "l2_divisor") {
            cfg.l2_divisor = number(value);
        } else if (key == "pay") {
            cfg.pay = Currency(value);
        } else if (key == "receive") {
            cfg.receive = Currency(value);
        } else if (key == "threads") {
            cfg.threads = static_cast<unsigned>(number(value));
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (cfg.scenarios.empty()) cfg.scenarios = BacktestConfig::defaults().scenarios;
    cfg.validate();
    return cfg;
}

BacktestConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return parse_config(in, path.parent_path(), path.string());
}

// ---------------------------------------------------------------------------

std::vector<Aggregate> BacktestReport::aggregates() const {
    std::vector<Aggregate> out;
    // Sums of deviations from each group's first row; a constant column then
    // averages to exactly that constant.
    std::vector<CostBreakdown> shift;
    std::vector<CostBreakdown> dev;
    auto slot = [&](const std::string& scenario, double volume) -> std::size_t {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i].scenario == scenario && out[i].volume_eur == volume) return i;
        }
        out.push_back({scenario, volume, 0, 0, {}, {}});
        shift.emplace_back();
        dev.emplace_back();
        return out.size() - 1;
    };
    for (const auto& r : rows) {
        const std::size_t i = slot(r.scenario, r.volume_eur);
        auto& a = out[i];
        if (a.days == 0) shift[i] = r.cost;
        ++a.days;
        dev[i].gas_fee += r.cost.gas_fee - shift[i].gas_fee;
        dev[i].lp_fee += r.cost.lp_fee - shift[i].lp_fee;
        dev[i].price_impact_cost += r.cost.price_impact_cost - shift[i].price_impact_cost;
        dev[i].total += r.cost.total - shift[i].total;
        ++a.selections[r.venue + "/" + r.pool];
    }
    for (const auto& e : errors) ++out[slot(e.scenario, e.volume_eur)].errors;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& a = out[i];
        if (a.days == 0) continue;
        const double n = static_cast<double>(a.days);
        a.mean = {shift[i].gas_fee + dev[i].gas_fee / n, shift[i].lp_fee + dev[i].lp_fee / n,
                  shift[i].price_impact_cost + dev[i].price_impact_cost / n, shift[i].total + dev[i].total / n};
    }
    return out;
}

BacktestReport run_backtest(const BacktestConfig& cfg, const FxSeries& fx) {
    cfg.validate();
    BacktestReport report;
    if (cfg.scenarios.empty()) return report;

    const GasModel gas = cfg.gas_model(cfg.gas_levels_eur.front());
    struct DayResult {
        std::vector<ReportRow> rows;
        std::vector<ErrorRow> errors;
    };
    std::vector<DayResult> days(fx.size());

    parallel_for(fx.size(), cfg.threads, [&](std::size_t i) {
        const FxRow& day = fx[i];
        const auto rates = day.rates();
        auto& out = days[i];
        for (const auto& spec : cfg.scenarios) {
            std::vector<router::Venue> venues;
            try {
                venues = market_data::pools_for_date(spec, day);
            } catch (const Error& e) {
                for (double v : cfg.volumes_eur) out.errors.push_back({day.date, spec.name, v, e.what()});
                continue;
            }
            for (double volume : cfg.volumes_eur) {
                try {
                    const router::TradeRequest trade{cfg.receive, volume, cfg.pay, market_data::format_date(day.date)};
                    const auto decision = router::route(router::quote_all(venues, trade, rates, gas));
                    out.rows.push_back({day.date, spec.name, volume, decision.venue_id, decision.pool_id,
                                        decision.breakdown, decision.quote.price_impact_fraction});
                } catch (const Error& e) {
                    out.errors.push_back({day.date, spec.name, volume, e.what()});
                }
            }
        }
    });

    for (auto& d : days) {
        std::move(d.rows.begin(), d.rows.end(), std::back_inserter(report.rows));
        std::move(d.errors.begin(), d.errors.end(), std::back_inserter(report.errors));
    }
    return report;
}

BacktestReport run_backtest(const BacktestConfig& cfg) {
    if (cfg.fx_path.empty()) throw Error(ErrorKind::invalid_argument, "no FX file configured");
    return run_backtest(cfg, market_data::load_fx_csv(cfg.fx_path));
}

// ---------------------------------------------------------------------------

std::vector<TableRow> aggregate_table(const BacktestReport& report) {
    if (report.rows.empty()) throw Error(ErrorKind::empty_report, "backtest produced no rows");
    std::vector<TableRow> out;
    for (const auto& a : report.aggregates()) {
        if (a.days == 0) continue;
        out.push_back({a.scenario, size_label(a.volume_eur), a.volume_eur, a.days, a.mean});
    }
    return out;
}

std::string format_table_text(const std::vector<TableRow>& rows) {
    constexpr int size_w = 12;
    constexpr int col_w = 22;
    std::ostringstream out;
    out << std::left << std::setw(size_w) << "Size" << std::setw(col_w) << "Total Fee" << std::setw(col_w)
        << "Gas Fee" << std::setw(col_w) << "Swap Fee" << "Price Impact" << '\n';
    std::string current;
    for (const auto& r : rows) {
        if (r.scenario != current) {
            current = r.scenario;
            out << current << ":\n";
        }
        out << std::left << std::setw(size_w) << ("  " + r.size) << std::setw(col_w)
            << fee_cell(r.mean.total, r.volume_eur) << std::setw(col_w) << fee_cell(r.mean.gas_fee, r.volume_eur)
            << std::setw(col_w) << fee_cell(r.mean.lp_fee, r.volume_eur)
            << fee_cell(r.mean.price_impact_cost, r.volume_eur) << '\n';
    }
    out << "All fees in EUR; basis points of volume in parentheses.\n";
    return out.str();
}

std::string format_table_csv(const std::vector<TableRow>& rows) {
    std::ostringstream out;
    out << "scenario,size,volume_eur,days,total_eur,gas_eur,swap_fee_eur,impact_eur,total_bps,gas_bps,swap_fee_bps,"
           "impact_bps\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.size << ',' << format_number(r.volume_eur) << ',' << r.days << ','
            << format_number(r.mean.total) << ',' << format_number(r.mean.gas_fee) << ','
            << format_number(r.mean.lp_fee) << ',' << format_number(r.mean.price_impact_cost) << ','
            << basis_points(r.mean.total, r.volume_eur) << ',' << basis_points(r.mean.gas_fee, r.volume_eur) << ','
            << basis_points(r.mean.lp_fee, r.volume_eur) << ',' << basis_points(r.mean.price_impact_cost, r.volume_eur)
            << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

const SweepCell& SweepGrid::at(double gas_eur, double volume_eur) const {
    for (const auto& c : cells) {
        if (c.gas_eur == gas_eur && c.volume_eur == volume_eur) return c;
    }
    throw Error(ErrorKind::invalid_argument, "no sweep cell at gas " + format_number(gas_eur) + ", volume " +
                                                 format_number(volume_eur));
}

SweepGrid sweep_gas_volume(const BacktestConfig& cfg, const FxSeries& fx, double tvl_chf) {
    cfg.validate();
    const ScenarioSpec l1 = first_with_layer(cfg, Layer::l1).with_liquidity(tvl_chf);
    const ScenarioSpec l2 = first_with_layer(cfg, Layer::l2l3).with_liquidity(tvl_chf);
    const auto& gas = cfg.gas_levels_eur;
    const auto& vols = cfg.volumes_eur;
    const std::size_t cells = gas.size() * vols.size();
    constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

    // Per day: totals for every (gas, volume) cell, NaN where a route failed.
    std::vector<std::vector<double>> l1_totals(fx.size()), l2_totals(fx.size());

    parallel_for(fx.size(), cfg.threads, [&](std::size_t i) {
        const FxRow& day = fx[i];
        const auto rates = day.rates();
        auto& t1 = l1_totals[i];
        auto& t2 = l2_totals[i];
        t1.assign(cells, kMissing);
        t2.assign(cells, kMissing);
        const auto venues1 = market_data::pools_for_date(l1, day);
        const auto venues2 = market_data::pools_for_date(l2, day);
        for (std::size_t v = 0; v < vols.size(); ++v) {
            const router::TradeRequest trade{cfg.receive, vols[v], cfg.pay, market_data::format_date(day.date)};
            std::vector<router::Candidate> c1, c2;
            try {
                c1 = router::quote_all(venues1, trade, rates, cfg.gas_model(0.0));
                c2 = router::quote_all(venues2, trade, rates, cfg.gas_model(0.0));
            } catch (const Error&) {
                continue;
            }
            for (std::size_t g = 0; g < gas.size(); ++g) {
                const auto model = cfg.gas_model(gas[g]);
                try {
                    const double a = router::route(router::with_gas(c1, model)).breakdown.total;
                    const double b = router::route(router::with_gas(c2, model)).breakdown.total;
                    t1[g * vols.size() + v] = a;
                    t2[g * vols.size() + v] = b;
                } catch (const Error&) {
                }
            }
        }
    });

    SweepGrid grid;
    grid.tvl_chf = tvl_chf;
    grid.cells.reserve(cells);
    for (std::size_t g = 0; g < gas.size(); ++g) {
        for (std::size_t v = 0; v < vols.size(); ++v) {
            const std::size_t k = g * vols.size() + v;
            double s1 = 0.0;
            double s2 = 0.0;
            double sd = 0.0;
            std::size_t n = 0;
            for (std::size_t i = 0; i < fx.size(); ++i) {
                const double a = l1_totals[i][k];
                const double b = l2_totals[i][k];
                if (std::isnan(a) || std::isnan(b)) continue;
                s1 += a;
                s2 += b;
                sd += a - b;
                ++n;
            }
            SweepCell c;
            c.gas_eur = gas[g];
            c.volume_eur = vols[v];
            c.tvl_chf = tvl_chf;
            c.days = n;
            if (n > 0) {
                const double dn = static_cast<double>(n);
                c.mean_l1 = s1 / dn;
                c.mean_l2l3 = s2 / dn;
                c.diff_eur = sd / dn;
                c.diff_pct = s1 > 0.0 ? 100.0 * sd / s1 : 0.0;
            } else {
                c.diff_eur = c.diff_pct = c.mean_l1 = c.mean_l2l3 = kMissing;
            }
            grid.cells.push_back(c);
        }
    }
    return grid;
}

std::vector<SweepGrid> sweep_tvl(const BacktestConfig& cfg, const FxSeries& fx) {
    cfg.validate();
    std::vector<SweepGrid> out;
    out.reserve(cfg.tvl_levels_chf.size());
    for (double tvl : cfg.tvl_levels_chf) out.push_back(sweep_gas_volume(cfg, fx, tvl));
    return out;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_report_csv(std::ostream& out, const BacktestReport& report) {
    out << "date,scenario,volume_eur,venue,pool,gas_eur,lp_fee_eur,impact_eur,total_eur\n";
    for (const auto& r : report.rows) {
        out << market_data::format_date(r.date) << ',' << r.scenario << ',' << format_number(r.volume_eur) << ','
            << r.venue << ',' << r.pool << ',' << format_number(r.cost.gas_fee) << ','
            << format_number(r.cost.lp_fee) << ',' << format_number(r.cost.price_impact_cost) << ','
            << format_number(r.cost.total) << '\n';
    }
}

void write_errors_csv(std::ostream& out, const BacktestReport& report) {
    out << "date,scenario,volume_eur,error\n";
    for (const auto& e : report.errors) {
        std::string msg = e.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        out << market_data::format_date(e.date) << ',' << e.scenario << ',' << format_number(e.volume_eur) << ','
            << msg << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepGrid>& grids) {
    out << "# diff_eur = mean total(L1) - mean total(L2L3); positive means L2L3 is cheaper. "
           "diff_pct = 100 * diff_eur / mean total(L1).\n";
    out << "gas_eur,volume_eur,tvl_chf,diff_eur,diff_pct\n";
    for (const auto& g : grids) {
        for (const auto& c : g.cells) {
            out << format_number(c.gas_eur) << ',' << format_number(c.volume_eur) << ',' << format_number(c.tvl_chf)
                << ',' << format_number(c.diff_eur) << ',' << format_number(c.diff_pct) << '\n';
        }
    }
}

} // namespace xborder::backtest
