#include "xborder/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "xborder/acceptance.hpp"
#include "xborder/backtest.hpp"
#include "xborder/error.hpp"
#include "xborder/market_data.hpp"
#include "xborder/router.hpp"

#ifndef XBORDER_DATA_DIR
#define XBORDER_DATA_DIR "data"
#endif

namespace xborder::cli {

namespace {

using nlohmann::json;
namespace bt = backtest;
namespace md = market_data;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config = "default";
    std::string fx;
    std::vector<std::string> presets;
    std::vector<double> volumes;
    std::optional<double> gas;
    unsigned threads = 0;
    std::string output;
    std::string format = "text";
    unsigned seed = 0; // reserved; the engine is deterministic
};

struct QuoteOptions {
    std::string pair = "CHF/EUR";
    double volume = 0.0;
    std::string preset = "l2l3-exchange";
    std::optional<double> rate_eur;
    std::optional<double> rate_sgd;
    std::string date;
    std::string fx;
    double gas = 15.0;
    std::optional<double> tvl;
    std::string format = "text";
    unsigned seed = 0;
};

struct SweepOptions {
    std::vector<double> tvl;
};

std::string num(double v) { return bt::format_number(v); }

std::string fixed(double v, int decimals) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(decimals) << v;
    return s.str();
}

CLI::Option* add_format(CLI::App* app, std::string& target) {
    return app->add_option("--format", target, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
}

void add_common(CLI::App* app, CommonOptions& o, bool with_output) {
    app->add_option("--config", o.config, "Config file, or 'default'");
    app->add_option("--fx", o.fx, "FX CSV (date,chf_eur,chf_sgd); overrides the config");
    app->add_option("--preset", o.presets, "Scenario preset or file; repeatable, replaces the config's scenarios");
    app->add_option("--volume", o.volumes, "EUR volume; repeatable")->check(CLI::PositiveNumber);
    app->add_option("--gas", o.gas, "L1 gas fee in EUR")->check(CLI::NonNegativeNumber);
    app->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    app->add_option("--seed", o.seed, "Reserved; results are deterministic");
    if (with_output) app->add_option("--output", o.output, "Output file");
}

bt::BacktestConfig resolve_config(const CommonOptions& o) {
    bt::BacktestConfig cfg;
    if (o.config == "default") {
        cfg = bt::BacktestConfig::defaults();
        cfg.fx_path = default_fx_path();
    } else {
        cfg = bt::load_config(o.config);
    }
    if (!o.fx.empty()) cfg.fx_path = o.fx;
    if (!o.presets.empty()) {
        cfg.scenarios.clear();
        for (const auto& p : o.presets) cfg.scenarios.push_back(md::resolve_scenario(p));
    }
    if (!o.volumes.empty()) cfg.volumes_eur = o.volumes;
    if (o.gas) cfg.gas_levels_eur = {*o.gas};
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

/// Writes to `path`, or to `fallback` when path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::io, "cannot write " + path);
    write(file);
    if (!file) throw Error(ErrorKind::io, "write failed for " + path);
}

std::filesystem::path errors_path(const std::filesystem::path& report) {
    auto p = report;
    p.replace_extension();
    return p.string() + ".errors.csv";
}

json breakdown_json(const CostBreakdown& b) {
    return {{"gas_eur", b.gas_fee}, {"lp_fee_eur", b.lp_fee}, {"impact_eur", b.price_impact_cost},
            {"total_eur", b.total}};
}

// ---------------------------------------------------------------------------

int cmd_quote(const QuoteOptions& o, std::ostream& out) {
    const auto slash = o.pair.find('/');
    if (slash == std::string::npos) throw UsageError("--pair must look like CHF/EUR");
    Currency pay;
    Currency receive;
    try {
        pay = Currency(o.pair.substr(0, slash));
        receive = Currency(o.pair.substr(slash + 1));
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    md::FxRow day;
    if (o.rate_eur || o.rate_sgd) {
        if (!o.rate_eur || !o.rate_sgd) throw UsageError("--rate-eur and --rate-sgd go together");
        if (!o.date.empty() && !md::parse_date(o.date, day.date)) throw UsageError("bad --date " + o.date);
        day.chf_eur = *o.rate_eur;
        day.chf_sgd = *o.rate_sgd;
    } else {
        if (o.date.empty()) throw UsageError("give --date or both --rate-eur and --rate-sgd");
        md::Date date;
        if (!md::parse_date(o.date, date)) throw UsageError("bad --date " + o.date);
        const auto fx = md::load_fx_csv(o.fx.empty() ? default_fx_path() : std::filesystem::path(o.fx));
        const auto* row = fx.find(date);
        if (row == nullptr) throw Error(ErrorKind::empty_series, "no rates for " + o.date);
        day = *row;
    }

    auto spec = md::resolve_scenario(o.preset);
    if (o.tvl) spec = spec.with_liquidity(*o.tvl);
    const GasModel gas{o.gas, 50.0};
    const auto venues = md::pools_for_date(spec, day);
    const router::TradeRequest trade{receive, o.volume, pay, o.date};
    const auto decision = router::route(router::quote_all(venues, trade, day.rates(), gas));

    if (o.format == "json") {
        json cands = json::array();
        for (const auto& c : decision.candidates) {
            json j{{"venue", c.venue_id}, {"pool", c.pool_id}, {"layer", std::string(to_string(c.layer))},
                   {"feasible", c.feasible()}};
            if (c.feasible()) {
                j["cost"] = breakdown_json(c.breakdown);
                j["input_amount"] = c.quote->input_amount;
                j["impact_fraction"] = c.quote->price_impact_fraction;
            } else {
                j["error"] = c.error;
            }
            cands.push_back(std::move(j));
        }
        json doc{{"pay", pay.code()},
                 {"receive", receive.code()},
                 {"volume", o.volume},
                 {"scenario", spec.name},
                 {"candidates", cands},
                 {"chosen",
                  {{"venue", decision.venue_id},
                   {"pool", decision.pool_id},
                   {"input_amount", decision.quote.input_amount},
                   {"cost", breakdown_json(decision.breakdown)}}}};
        out << doc.dump(2) << '\n';
        return kOk;
    }
    if (o.format == "csv") {
        out << "venue,pool,layer,chosen,input_amount,gas_eur,lp_fee_eur,impact_eur,total_eur,error\n";
        for (const auto& c : decision.candidates) {
            const bool chosen = c.venue_id == decision.venue_id && c.pool_id == decision.pool_id;
            out << c.venue_id << ',' << c.pool_id << ',' << to_string(c.layer) << ',' << (chosen ? 1 : 0) << ',';
            if (c.feasible()) {
                out << num(c.quote->input_amount) << ',' << num(c.breakdown.gas_fee) << ','
                    << num(c.breakdown.lp_fee) << ',' << num(c.breakdown.price_impact_cost) << ','
                    << num(c.breakdown.total) << ",\n";
            } else {
                auto msg = c.error;
                std::replace(msg.begin(), msg.end(), ',', ';');
                out << ",,,,," << msg << '\n';
            }
        }
        return kOk;
    }

    out << "Buy " << num(o.volume) << ' ' << receive << " with " << pay << " on " << spec.name << '\n';
    out << std::left << std::setw(14) << "venue" << std::setw(16) << "pool" << std::right << std::setw(18) << "pay"
        << std::setw(12) << "gas" << std::setw(12) << "swap fee" << std::setw(14) << "impact" << std::setw(14)
        << "total" << '\n';
    for (const auto& c : decision.candidates) {
        out << std::left << std::setw(14) << c.venue_id << std::setw(16) << c.pool_id << std::right;
        if (c.feasible()) {
            out << std::setw(18) << fixed(c.quote->input_amount, 4) << std::setw(12) << fixed(c.breakdown.gas_fee, 4)
                << std::setw(12) << fixed(c.breakdown.lp_fee, 4) << std::setw(14)
                << fixed(c.breakdown.price_impact_cost, 4) << std::setw(14) << fixed(c.breakdown.total, 4) << '\n';
        } else {
            out << "  infeasible: " << c.error << '\n';
        }
    }
    const auto& b = decision.breakdown;
    out << "chosen " << decision.venue_id << '/' << decision.pool_id << ": total " << fixed(b.total, 4)
        << " EUR = gas " << fixed(b.gas_fee, 4) << " + swap fee " << fixed(b.lp_fee, 4) << " + price impact "
        << fixed(b.price_impact_cost, 4) << '\n';
    return kOk;
}

int cmd_backtest(const CommonOptions& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    const auto fx = md::load_fx_csv(cfg.fx_path);
    const auto report = bt::run_backtest(cfg, fx);
    const std::filesystem::path path = o.output.empty() ? "report.csv" : o.output;
    emit(path.string(), out, [&](std::ostream& s) { bt::write_report_csv(s, report); });
    const auto epath = errors_path(path);
    emit(epath.string(), out, [&](std::ostream& s) { bt::write_errors_csv(s, report); });
    out << "wrote " << report.rows.size() << " rows (" << report.errors.size() << " error rows) for " << fx.size()
        << " days x " << cfg.scenarios.size() << " scenarios x " << cfg.volumes_eur.size() << " volumes to "
        << path.string() << '\n';
    return kOk;
}

int cmd_sweep(const CommonOptions& o, const SweepOptions& s, std::ostream& out) {
    auto cfg = resolve_config(o);
    if (o.volumes.empty()) cfg.volumes_eur = bt::default_volume_grid();
    if (!o.gas) cfg.gas_levels_eur = bt::default_gas_grid();
    if (!s.tvl.empty()) cfg.tvl_levels_chf = s.tvl;
    cfg.validate();
    const auto fx = md::load_fx_csv(cfg.fx_path);
    const auto grids = bt::sweep_tvl(cfg, fx);
    if (!o.output.empty()) {
        emit(o.output, out, [&](std::ostream& f) { bt::write_sweep_csv(f, grids); });
        out << "wrote " << grids.size() << " grid(s) to " << o.output << '\n';
        return kOk;
    }
    for (const auto& g : grids) {
        const std::string path = "sweep_tvl_" + fixed(g.tvl_chf, 0) + ".csv";
        emit(path, out, [&](std::ostream& f) { bt::write_sweep_csv(f, {g}); });
        out << "wrote " << g.cells.size() << " cells to " << path << '\n';
    }
    return kOk;
}

int cmd_table(const CommonOptions& o, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(o);
    const auto report = bt::run_backtest(cfg, md::load_fx_csv(cfg.fx_path));
    const auto rows = bt::aggregate_table(report);
    emit(o.output, out, [&](std::ostream& f) {
        if (o.format == "csv") {
            f << bt::format_table_csv(rows);
        } else if (o.format == "json") {
            json arr = json::array();
            for (const auto& r : rows) {
                json j = breakdown_json(r.mean);
                j["scenario"] = r.scenario;
                j["size"] = r.size;
                j["volume_eur"] = r.volume_eur;
                j["days"] = r.days;
                arr.push_back(std::move(j));
            }
            f << arr.dump(2) << '\n';
        } else {
            f << bt::format_table_text(rows);
        }
    });
    if (!report.errors.empty()) err << report.errors.size() << " error rows excluded from the means\n";
    return kOk;
}

int cmd_check(const CommonOptions& o, std::ostream& out) {
    acceptance::Options opts;
    opts.fx_path = o.fx.empty() ? default_fx_path() : std::filesystem::path(o.fx);
    opts.threads = o.threads;
    const auto results = acceptance::run_all(opts);
    const bool ok = acceptance::gating_passed(results);
    if (o.format == "json") {
        json arr = json::array();
        for (const auto& r : results) {
            arr.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"gating", r.gating},
                           {"detail", r.detail}, {"seconds", r.seconds}});
        }
        out << json{{"passed", ok}, {"criteria", arr}}.dump(2) << '\n';
    } else {
        for (const auto& r : results) out << acceptance::format_line(r) << '\n';
        out << (ok ? "all gating criteria passed" : "gating criteria failed") << '\n';
    }
    return ok ? kOk : kDataError;
}

} // namespace

std::filesystem::path default_fx_path() {
    return std::filesystem::path(XBORDER_DATA_DIR) / "fx_chf_eur_sgd_2020_2023.csv";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-border CBDC swap-cost engine"};
    app.name("xborder");
    app.require_subcommand(1);

    QuoteOptions q;
    auto* quote = app.add_subcommand("quote", "Quote and route one exact-output trade");
    quote->add_option("--pair", q.pair, "PAY/RECEIVE, e.g. CHF/EUR");
    quote->add_option("--volume", q.volume, "Amount of the receive currency")->required()->check(CLI::PositiveNumber);
    quote->add_option("--preset", q.preset, "Scenario preset or file");
    quote->add_option("--rate-eur", q.rate_eur, "EUR per CHF")->check(CLI::PositiveNumber);
    quote->add_option("--rate-sgd", q.rate_sgd, "SGD per CHF")->check(CLI::PositiveNumber);
    quote->add_option("--date", q.date, "Use the FX file's rates for YYYY-MM-DD");
    quote->add_option("--fx", q.fx, "FX CSV for --date");
    quote->add_option("--gas", q.gas, "L1 gas fee in EUR")->check(CLI::NonNegativeNumber);
    quote->add_option("--tvl", q.tvl, "Total scenario liquidity in CHF")->check(CLI::PositiveNumber);
    quote->add_option("--seed", q.seed, "Reserved; results are deterministic");
    add_format(quote, q.format);

    CommonOptions bo;
    auto* backtest_cmd = app.add_subcommand("backtest", "Daily backtest; writes the report CSV");
    add_common(backtest_cmd, bo, true);

    CommonOptions so;
    SweepOptions sw;
    auto* sweep = app.add_subcommand("sweep", "Gas x volume grid of L1 minus L2L3 total cost");
    add_common(sweep, so, true);
    sweep->add_option("--tvl", sw.tvl, "Total liquidity in CHF; repeatable")->check(CLI::PositiveNumber);

    CommonOptions to;
    auto* table = app.add_subcommand("table", "Average fee breakdown per scenario and size");
    add_common(table, to, true);
    add_format(table, to.format);

    CommonOptions co;
    auto* check = app.add_subcommand("check", "Run the acceptance checks");
    check->add_option("--fx", co.fx, "FX CSV");
    check->add_option("--threads", co.threads, "Worker threads (0: all cores)");
    add_format(check, co.format);

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }

    try {
        if (*quote) return cmd_quote(q, out);
        if (*backtest_cmd) return cmd_backtest(bo, out);
        if (*sweep) return cmd_sweep(so, sw, out);
        if (*table) return cmd_table(to, out, err);
        if (*check) return cmd_check(co, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

} // namespace xborder::cli
