#include "xborder/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "xborder/error.hpp"

namespace xborder::market_data {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_number(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end && !text.empty();
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

[[noreturn]] void malformed(const std::string& source, int line, const std::string& why) {
    throw Error(ErrorKind::malformed_row, source + ":" + std::to_string(line) + ": " + why);
}

bool skippable(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return in;
}

double parse_rate(std::string_view field, const std::string& source, int line_no, const char* column) {
    double v = 0.0;
    if (!parse_number(field, v) || !std::isfinite(v)) {
        malformed(source, line_no, std::string("bad ") + column + " value '" + std::string(field) + "'");
    }
    if (!(v > 0.0)) {
        throw Error(ErrorKind::non_positive_rate,
                    source + ":" + std::to_string(line_no) + ": " + column + " must be positive");
    }
    return v;
}

std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

// ---------------------------------------------------------------------------

bool parse_date(std::string_view text, Date& out) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto num = [&](std::string_view part, auto& dst) {
        const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), dst);
        return ec == std::errc{} && p == part.data() + part.size();
    };
    if (!num(text.substr(0, 4), y) || !num(text.substr(5, 2), m) || !num(text.substr(8, 2), d)) return false;
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return false;
    out = date;
    return true;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

RateTable FxRow::rates() const {
    RateTable t(kChf);
    t.set(kEur, chf_eur).set(kSgd, chf_sgd);
    return t;
}

FxSeries::FxSeries(std::vector<FxRow> rows) : rows_(std::move(rows)) {
    std::stable_sort(rows_.begin(), rows_.end(), [](const FxRow& a, const FxRow& b) { return a.date < b.date; });
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        if (!(r.chf_eur > 0.0) || !(r.chf_sgd > 0.0) || !std::isfinite(r.chf_eur) || !std::isfinite(r.chf_sgd)) {
            throw Error(ErrorKind::non_positive_rate, "rates on " + format_date(r.date) + " must be positive");
        }
        if (i > 0 && rows_[i - 1].date == r.date) {
            throw Error(ErrorKind::malformed_row, "duplicate date " + format_date(r.date));
        }
    }
}

const FxRow* FxSeries::find(const Date& date) const {
    const auto it = std::lower_bound(rows_.begin(), rows_.end(), date,
                                     [](const FxRow& r, const Date& d) { return r.date < d; });
    return (it != rows_.end() && it->date == date) ? &*it : nullptr;
}

FxSeries parse_fx_csv(std::istream& in, const std::string& source) {
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<FxRow> rows;
    std::set<Date> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto fields = split(line, ',');
        if (!header_seen) {
            if (fields.size() != 3 || lower(fields[0]) != "date" || lower(fields[1]) != "chf_eur" ||
                lower(fields[2]) != "chf_sgd") {
                malformed(source, line_no, "expected header 'date,chf_eur,chf_sgd'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) malformed(source, line_no, "expected 3 fields");
        FxRow row;
        if (!parse_date(fields[0], row.date)) malformed(source, line_no, "bad date '" + std::string(fields[0]) + "'");
        row.chf_eur = parse_rate(fields[1], source, line_no, "chf_eur");
        row.chf_sgd = parse_rate(fields[2], source, line_no, "chf_sgd");
        if (!seen.insert(row.date).second) malformed(source, line_no, "duplicate date " + format_date(row.date));
        rows.push_back(row);
    }
    if (!header_seen) malformed(source, line_no, "missing header");
    if (rows.empty()) throw Error(ErrorKind::empty_series, source + " has no data rows");
    return FxSeries(std::move(rows));
}

FxSeries load_fx_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_fx_csv(in, path.string());
}

PairSeries parse_pair_csv(std::istream& in, const std::string& source) {
    std::string line;
    int line_no = 0;
    std::size_t date_col = 0;
    std::size_t rate_col = 0;
    std::size_t width = 0;
    bool header_seen = false;
    PairSeries out;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto fields = split(line, ',');
        if (!header_seen) {
            bool has_date = false;
            bool has_rate = false;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const auto name = lower(fields[i]);
                if (name == "date") {
                    date_col = i;
                    has_date = true;
                } else if (name == "rate" || name == "close") {
                    rate_col = i;
                    has_rate = true;
                }
            }
            if (!has_date || !has_rate) malformed(source, line_no, "header needs 'date' and 'rate' or 'close'");
            width = fields.size();
            header_seen = true;
            continue;
        }
        if (fields.size() != width) malformed(source, line_no, "expected " + std::to_string(width) + " fields");
        Date d;
        if (!parse_date(fields[date_col], d)) malformed(source, line_no, "bad date '" + std::string(fields[date_col]) + "'");
        out.emplace_back(d, parse_rate(fields[rate_col], source, line_no, "rate"));
    }
    if (!header_seen) malformed(source, line_no, "missing header");
    std::sort(out.begin(), out.end());
    return out;
}

PairSeries load_pair_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_pair_csv(in, path.string());
}

FxSeries join_pairs(const PairSeries& chf_eur, const PairSeries& chf_sgd) {
    std::map<Date, double> sgd;
    for (const auto& [d, v] : chf_sgd) sgd[d] = v;
    std::vector<FxRow> rows;
    for (const auto& [d, v] : chf_eur) {
        const auto it = sgd.find(d);
        if (it != sgd.end()) rows.push_back({d, v, it->second});
    }
    if (rows.empty()) throw Error(ErrorKind::empty_series, "CHF-EUR and CHF-SGD series share no dates");
    return FxSeries(std::move(rows));
}

// ---------------------------------------------------------------------------

void ScenarioSpec::validate() const {
    auto bad = [&](const std::string& why) { throw Error(ErrorKind::invalid_argument, "scenario " + name + ": " + why); };
    if (name.empty()) bad("missing name");
    if (!(total_liquidity_chf > 0.0) || !std::isfinite(total_liquidity_chf)) bad("total liquidity must be positive");
    if (pools.empty()) bad("no pools");
    if (!(fee_rate >= 0.0) || fee_rate > 0.01) bad("fee_rate must lie in [0, 0.01]");
    double total_share = 0.0;
    std::set<std::pair<std::string, std::string>> ids;
    for (const auto& p : pools) {
        if (p.venue_id.empty() || p.pool_id.empty()) bad("pool ids must be non-empty");
        if (!ids.insert({p.venue_id, p.pool_id}).second) bad("duplicate pool " + p.venue_id + "/" + p.pool_id);
        if (p.tokens.size() < 2 || p.tokens.size() > 3) bad("pool " + p.pool_id + " needs 2 or 3 tokens");
        if (p.kind == amm::AmmKind::clmm && p.tokens.size() != 2) bad("clmm pool " + p.pool_id + " needs 2 tokens");
        if (!(p.share > 0.0)) bad("pool " + p.pool_id + " share must be positive");
        total_share += p.share;
        amm::validate(params_for(p.kind));
    }
    if (std::abs(total_share - 1.0) > 1e-9) bad("pool shares sum to " + shortest(total_share) + ", not 1");
}

amm::AmmParams ScenarioSpec::params_for(amm::AmmKind kind) const {
    switch (kind) {
    case amm::AmmKind::cryptoswap: return amm::CryptoswapParams{amplification, gamma};
    case amm::AmmKind::stableswap: return amm::StableswapParams{amplification};
    case amm::AmmKind::clmm: return amm::ClmmParams{alpha};
    }
    throw Error(ErrorKind::invalid_argument, "unknown AMM kind");
}

ScenarioSpec ScenarioSpec::with_liquidity(double tvl_chf) const {
    ScenarioSpec copy = *this;
    copy.total_liquidity_chf = tvl_chf;
    return copy;
}

ScenarioSpec preset(std::string_view name) {
    using amm::AmmKind;
    ScenarioSpec s;
    if (name == "l1-mariana") {
        s.name = "l1-mariana";
        s.layer = Layer::l1;
        s.pools = {{"mariana", "chf-eur-sgd", AmmKind::cryptoswap, {kChf, kEur, kSgd}, 1.0}};
    } else if (name == "l2l3-exchange") {
        s.name = "l2l3-exchange";
        s.layer = Layer::l2l3;
        s.pools = {
            {"l3-crypto3", "chf-eur-sgd", AmmKind::cryptoswap, {kChf, kEur, kSgd}, 1.0 / 3.0},
            {"l3-crypto2", "chf-eur", AmmKind::cryptoswap, {kChf, kEur}, 1.0 / 6.0},
            {"l3-crypto2", "chf-sgd", AmmKind::cryptoswap, {kChf, kSgd}, 1.0 / 6.0},
            {"l3-clmm", "chf-eur", AmmKind::clmm, {kChf, kEur}, 1.0 / 6.0},
            {"l3-clmm", "chf-sgd", AmmKind::clmm, {kChf, kSgd}, 1.0 / 6.0},
        };
    } else {
        throw Error(ErrorKind::invalid_argument, "unknown scenario preset '" + std::string(name) + "'");
    }
    return s;
}

std::vector<std::string> preset_names() { return {"l1-mariana", "l2l3-exchange"}; }

ScenarioSpec parse_scenario(std::istream& in, const std::string& source) {
    ScenarioSpec spec;
    spec.pools.clear();
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) -> void {
        throw Error(ErrorKind::invalid_argument, source + ":" + std::to_string(line_no) + ": " + why);
    };
    auto number = [&](std::string_view v) {
        double out = 0.0;
        if (!parse_number(v, out) || !std::isfinite(out)) fail("bad number '" + std::string(v) + "'");
        return out;
    };
    auto fraction = [&](std::string_view v) {
        const auto slash = v.find('/');
        if (slash == std::string_view::npos) return number(v);
        const double den = number(v.substr(slash + 1));
        if (den == 0.0) fail("zero denominator");
        return number(v.substr(0, slash)) / den;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const auto key = std::string(trim(std::string_view(line).substr(0, eq)));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        if (key == "name") {
            spec.name = std::string(value);
        } else if (key == "layer") {
            spec.layer = parse_layer(value);
        } else if (key == "total_liquidity_chf") {
            spec.total_liquidity_chf = number(value);
        } else if (key == "amplification" || key == "A") {
            spec.amplification = number(value);
        } else if (key == "gamma") {
            spec.gamma = number(value);
        } else if (key == "alpha") {
            spec.alpha = number(value);
        } else if (key == "fee_rate") {
            spec.fee_rate = number(value);
        } else if (key == "pool") {
            // pool = <venue>/<pool> <kind> <TOK,TOK[,TOK]> <share>
            std::vector<std::string_view> parts;
            for (auto p : split(value, ' ')) {
                if (!p.empty()) parts.push_back(p);
            }
            if (parts.size() != 4) fail("pool needs '<venue>/<pool> <kind> <tokens> <share>'");
            const auto slash = parts[0].find('/');
            if (slash == std::string_view::npos) fail("pool id must be <venue>/<pool>");
            PoolBlueprint bp;
            bp.venue_id = std::string(parts[0].substr(0, slash));
            bp.pool_id = std::string(parts[0].substr(slash + 1));
            const auto kind = amm::parse_amm_kind(parts[1]);
            if (!kind) fail("unknown AMM kind '" + std::string(parts[1]) + "'");
            bp.kind = *kind;
            for (auto t : split(parts[2], ',')) bp.tokens.emplace_back(t);
            bp.share = fraction(parts[3]);
            spec.pools.push_back(std::move(bp));
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_scenario(in, path.string());
}

std::string to_config_text(const ScenarioSpec& spec) {
    std::ostringstream out;
    out << "name = " << spec.name << '\n'
        << "layer = " << to_string(spec.layer) << '\n'
        << "total_liquidity_chf = " << shortest(spec.total_liquidity_chf) << '\n'
        << "amplification = " << shortest(spec.amplification) << '\n'
        << "gamma = " << shortest(spec.gamma) << '\n'
        << "alpha = " << shortest(spec.alpha) << '\n'
        << "fee_rate = " << shortest(spec.fee_rate) << '\n';
    for (const auto& p : spec.pools) {
        out << "pool = " << p.venue_id << '/' << p.pool_id << ' ' << amm::to_string(p.kind) << ' ';
        for (std::size_t i = 0; i < p.tokens.size(); ++i) out << (i ? "," : "") << p.tokens[i].code();
        out << ' ' << shortest(p.share) << '\n';
    }
    return out.str();
}

ScenarioSpec resolve_scenario(const std::string& name_or_path) {
    for (const auto& n : preset_names()) {
        if (n == name_or_path) return preset(n);
    }
    return load_scenario(name_or_path);
}

std::vector<router::Venue> pools_for_date(const ScenarioSpec& spec, const FxRow& day) {
    spec.validate();
    const auto rates = day.rates();
    std::vector<router::Venue> venues;
    for (const auto& bp : spec.pools) {
        auto it = std::find_if(venues.begin(), venues.end(), [&](const router::Venue& v) { return v.id == bp.venue_id; });
        if (it == venues.end()) {
            venues.push_back({bp.venue_id, spec.layer, {}});
            it = std::prev(venues.end());
        }
        const double value = spec.total_liquidity_chf * bp.share;
        const double n0 = value / static_cast<double>(bp.tokens.size());
        it->pools.push_back(amm::Pool::create(bp.pool_id, spec.params_for(bp.kind), n0, rates.select(bp.tokens),
                                              spec.fee_rate));
    }
    return venues;
}

} // namespace xborder::market_data
