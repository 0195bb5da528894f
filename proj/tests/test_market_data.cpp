#include <gtest/gtest.h>

#include <sstream>

#include "xborder/error.hpp"
#include "xborder/market_data.hpp"

using namespace xborder;
using namespace xborder::market_data;

namespace {

ErrorKind kind_of_throw(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected xborder::Error";
    return ErrorKind::io;
}

FxSeries parse(const std::string& text) {
    std::istringstream in(text);
    return parse_fx_csv(in, "t.csv");
}

FxRow day(double eur = 1.05, double sgd = 1.46) {
    FxRow r;
    parse_date("2021-03-01", r.date);
    r.chf_eur = eur;
    r.chf_sgd = sgd;
    return r;
}

const std::filesystem::path kRoot{XBORDER_SOURCE_DIR};

} // namespace

TEST(Dates, ParseAndFormat) {
    Date d;
    ASSERT_TRUE(parse_date("2023-10-31", d));
    EXPECT_EQ(format_date(d), "2023-10-31");
    EXPECT_FALSE(parse_date("2023-02-30", d));
    EXPECT_FALSE(parse_date("2023-2-3", d));
    EXPECT_FALSE(parse_date("20231031", d));
}

TEST(FxCsv, ParsesSortsAndSkipsComments) {
    const auto fx = parse("# note\ndate,chf_eur,chf_sgd\n2021-01-05,0.92,1.49\n\n2021-01-04,0.93,1.5\n");
    ASSERT_EQ(fx.size(), 2u);
    EXPECT_EQ(format_date(fx[0].date), "2021-01-04");
    EXPECT_EQ(fx[1].chf_sgd, 1.49);
    Date d;
    parse_date("2021-01-05", d);
    ASSERT_NE(fx.find(d), nullptr);
    EXPECT_EQ(fx.find(d)->chf_eur, 0.92);
    parse_date("2021-01-06", d);
    EXPECT_EQ(fx.find(d), nullptr);
}

TEST(FxCsv, Errors) {
    EXPECT_EQ(kind_of_throw([] { parse("date,chf_eur,chf_sgd\n2021-01-04,nan,1.5\n"); }), ErrorKind::malformed_row);
    EXPECT_EQ(kind_of_throw([] { parse("date,chf_eur,chf_sgd\n2021-01-04,0.9\n"); }), ErrorKind::malformed_row);
    EXPECT_EQ(kind_of_throw([] { parse("date,chf_eur,chf_sgd\n2021-13-04,0.9,1.5\n"); }), ErrorKind::malformed_row);
    EXPECT_EQ(kind_of_throw([] { parse("date,chf_eur,chf_sgd\n2021-01-04,0,1.5\n"); }), ErrorKind::non_positive_rate);
    EXPECT_EQ(kind_of_throw([] { parse("date,chf_eur,chf_sgd\n2021-01-04,-1,1.5\n"); }),
              ErrorKind::non_positive_rate);
    EXPECT_EQ(kind_of_throw([] { parse("date,chf_eur,chf_sgd\n"); }), ErrorKind::empty_series);
    EXPECT_EQ(kind_of_throw([] { parse("date,eur,sgd\n2021-01-04,1,1\n"); }), ErrorKind::malformed_row);
    EXPECT_EQ(kind_of_throw([] {
                  parse("date,chf_eur,chf_sgd\n2021-01-04,0.9,1.5\n2021-01-04,0.9,1.5\n");
              }),
              ErrorKind::malformed_row);
    EXPECT_EQ(kind_of_throw([] { load_fx_csv("/nonexistent/fx.csv"); }), ErrorKind::io);
    try {
        parse("date,chf_eur,chf_sgd\n2021-01-04,0.9,1.5\n2021-01-05,abc,1.5\n");
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("t.csv:3"), std::string::npos) << e.what();
    }
}

TEST(FxCsv, BundledDataset) {
    const auto fx = load_fx_csv(kRoot / "data/fx_chf_eur_sgd_2020_2023.csv");
    EXPECT_EQ(fx.size(), 772u);
    EXPECT_EQ(format_date(fx[0].date), "2020-11-02");
    EXPECT_EQ(format_date(fx[fx.size() - 1].date), "2023-10-31");
    for (const auto& r : fx.rows()) {
        EXPECT_GT(r.chf_eur, 0.8);
        EXPECT_LT(r.chf_eur, 1.2);
        EXPECT_GT(r.chf_sgd, 1.3);
        EXPECT_LT(r.chf_sgd, 1.7);
    }
    EXPECT_EQ(load_fx_csv(kRoot / "data/sample_fx.csv").size(), 10u);
}

TEST(PairCsv, YahooCloseColumnAndJoin) {
    std::istringstream eur("Date,Open,High,Low,Close,Adj Close,Volume\n"
                           "2021-01-04,0.92,0.93,0.91,0.925,0.925,0\n"
                           "2021-01-05,0.92,0.93,0.91,0.921,0.921,0\n");
    std::istringstream sgd("date,rate\n2021-01-05,1.49\n2021-01-06,1.48\n");
    const auto e = parse_pair_csv(eur);
    const auto s = parse_pair_csv(sgd);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_EQ(e[0].second, 0.925);
    const auto fx = join_pairs(e, s);
    ASSERT_EQ(fx.size(), 1u);
    EXPECT_EQ(fx[0].chf_eur, 0.921);
    EXPECT_EQ(fx[0].chf_sgd, 1.49);
    std::istringstream none("date,rate\n2022-01-01,1.0\n");
    EXPECT_EQ(kind_of_throw([&] { join_pairs(e, parse_pair_csv(none)); }), ErrorKind::empty_series);
}

TEST(Scenario, PresetsMatchShippedFiles) {
    EXPECT_EQ(load_scenario(kRoot / "scenarios/l1-mariana.cfg"), preset("l1-mariana"));
    EXPECT_EQ(load_scenario(kRoot / "scenarios/l2l3-exchange.cfg"), preset("l2l3-exchange"));
    for (const auto& n : preset_names()) {
        std::istringstream in(to_config_text(preset(n)));
        EXPECT_EQ(parse_scenario(in), preset(n));
    }
    EXPECT_EQ(resolve_scenario("l1-mariana"), preset("l1-mariana"));
}

TEST(Scenario, Errors) {
    auto parse_text = [](const std::string& t) {
        std::istringstream in(t);
        return parse_scenario(in);
    };
    EXPECT_THROW(parse_text("name = x\nlayer = L1\npool = a/b cryptoswap CHF,EUR 0.5\n"), Error);
    EXPECT_THROW(parse_text("name = x\ncolour = red\n"), Error);
    EXPECT_THROW(parse_text("name = x\npool = a/b clmm CHF,EUR,SGD 1\n"), Error);
    EXPECT_THROW(parse_text("name = x\npool = a/b magic CHF,EUR 1\n"), Error);
    EXPECT_THROW(parse_text("name = x\ngamma = 2\npool = a/b cryptoswap CHF,EUR 1\n"), Error);
    EXPECT_THROW(preset("nope"), Error);
    EXPECT_NO_THROW(parse_text("name = x\nA = 100\npool = a/b stableswap CHF,EUR 1\n"));
}

TEST(PoolsForDate, SeedsEachPoolAtTheDaysRates) {
    const auto venues = pools_for_date(preset("l2l3-exchange"), day());
    ASSERT_EQ(venues.size(), 3u);
    EXPECT_EQ(venues[0].id, "l3-crypto3");
    EXPECT_EQ(venues[1].id, "l3-crypto2");
    EXPECT_EQ(venues[1].pools.size(), 2u);
    EXPECT_EQ(venues[2].id, "l3-clmm");

    const auto& c3 = venues[0].pools[0];
    EXPECT_DOUBLE_EQ(c3.reserves.amount(kChf), 1e8 / 9.0);
    EXPECT_DOUBLE_EQ(c3.reserves.amount(kEur), 1.05e8 / 9.0);
    EXPECT_DOUBLE_EQ(c3.reserves.amount(kSgd), 1.46e8 / 9.0);
    const auto& clmm = venues[2].pools[0];
    EXPECT_DOUBLE_EQ(clmm.creation_notional, 1e8 / 12.0);
    EXPECT_DOUBLE_EQ(clmm.reserves.amount(kEur), 1.05e8 / 12.0);

    double total = 0.0;
    for (const auto& v : venues) {
        EXPECT_EQ(v.layer, Layer::l2l3);
        for (const auto& p : v.pools) total += p.value(day().rates());
    }
    EXPECT_NEAR(total, 1e8, 1e-6);

    const auto l1 = pools_for_date(preset("l1-mariana"), day());
    ASSERT_EQ(l1.size(), 1u);
    EXPECT_EQ(l1[0].layer, Layer::l1);
    EXPECT_NEAR(l1[0].pools[0].value(day().rates()), 1e8, 1e-6);
}

TEST(PoolsForDate, LiquidityOverride) {
    const auto v = pools_for_date(preset("l1-mariana").with_liquidity(2e8), day());
    EXPECT_DOUBLE_EQ(v[0].pools[0].reserves.amount(kChf), 2e8 / 3.0);
}
