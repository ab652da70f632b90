#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specdist/csv.hpp"
#include "specdist/ingest.hpp"
#include "specdist/timefmt.hpp"

using namespace specdist;

namespace {

const std::int64_t t0 = *parse_rfc3339("2006-10-16T00:00:00Z");

TickRecord tick(std::int64_t offset_ms, std::string inst, Side side, double price) {
    return {t0 + offset_ms, std::move(inst), side, price};
}

ResampleGrid minutes(std::size_t count) { return {t0, 60000, count}; }

std::string data_file(const std::string& name) { return read_text_file(std::string(SPECDIST_TEST_DATA) + "/" + name); }

} // namespace

TEST(Timestamps, Rfc3339RoundTrip) {
    EXPECT_EQ(parse_rfc3339("1970-01-01T00:00:00Z"), 0);
    EXPECT_EQ(parse_rfc3339("1970-01-01T00:00:01.5Z"), 1500);
    EXPECT_EQ(parse_rfc3339("1970-01-01T01:00:00+01:00"), 0);
    EXPECT_EQ(parse_rfc3339("2006-10-16T00:00:01Z"), t0 + 1000);
    EXPECT_FALSE(parse_rfc3339("2006-13-16T00:00:01Z"));
    EXPECT_FALSE(parse_rfc3339("yesterday"));
    EXPECT_EQ(format_rfc3339(t0), "2006-10-16T00:00:00Z");
    EXPECT_EQ(format_rfc3339(t0 + 5250), "2006-10-16T00:00:05.250Z");
    EXPECT_EQ(format_rfc3339(-1000), "1969-12-31T23:59:59Z");
    EXPECT_EQ(parse_timestamp("1160956800000"), t0);
}

TEST(ParseTicks, SingleRow) {
    const auto r = parse_ticks("timestamp,instrument,side,price\n2006-10-16T00:00:01Z,EUR/USD,ask,1.2612\n");
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0], (TickRecord{t0 + 1000, "EUR/USD", Side::ask, 1.2612}));
    EXPECT_EQ(r.malformed, 0u);
}

TEST(ParseTicks, EmptyBody) {
    const auto r = parse_ticks("timestamp,instrument,side,price\n");
    EXPECT_TRUE(r.records.empty());
    EXPECT_EQ(r.malformed, 0u);
    EXPECT_EQ(r.rows, 0u);
}

TEST(ParseTicks, NegativePriceIsMalformed) {
    std::string text = "timestamp,instrument,side,price\n2006-10-16T00:00:01Z,EUR/USD,ask,-1\n";
    for (int i = 0; i < 150; ++i)
        text += "2006-10-16T00:00:02Z,EUR/USD,bid,1.26\n";
    const auto r = parse_ticks(text);
    EXPECT_EQ(r.malformed, 1u);
    EXPECT_EQ(r.records.size(), 150u);
    EXPECT_EQ(r.malformed_lines.front(), 2u);
}

TEST(ParseTicks, TooManyMalformedRowsAbort) {
    const std::string text = "timestamp,instrument,side,price\n"
                             "2006-10-16T00:00:01Z,EUR/USD,ask,1.2\n"
                             "garbage\n";
    EXPECT_THROW(parse_ticks(text), FormatError);
    EXPECT_NO_THROW(parse_ticks(text, 0.5));
}

TEST(ParseTicks, HeaderRequired) {
    EXPECT_THROW(parse_ticks("2006-10-16T00:00:01Z,EUR/USD,ask,1.2\n"), FormatError);
    EXPECT_THROW(parse_ticks(""), FormatError);
}

TEST(ParseTicks, AcceptsCrlfEpochAndCaseInsensitiveSide) {
    const auto r = parse_ticks("timestamp,instrument,side,price\r\n1160956800000,USD/JPY,BID,116.2\r\n");
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].timestamp_ms, t0);
    EXPECT_EQ(r.records[0].side, Side::bid);
}

TEST(QuotationFrequency, CountsPerMinute) {
    const std::vector<TickRecord> ticks{tick(1000, "EUR/USD", Side::ask, 1.26), tick(2000, "EUR/USD", Side::ask, 1.26),
                                        tick(59000, "EUR/USD", Side::ask, 1.26),
                                        tick(3000, "EUR/USD", Side::bid, 1.25)};
    const auto a = quotation_frequency(ticks, minutes(2), Side::ask);
    EXPECT_EQ(a.at("EUR/USD"), (std::vector<double>{3.0, 0.0}));
    const auto two = quotation_frequency(ticks, ResampleGrid{t0, 120000, 1}, Side::ask);
    EXPECT_EQ(two.at("EUR/USD"), (std::vector<double>{1.5}));
}

TEST(QuotationFrequency, BoundaryTickGoesToNextBucket) {
    const std::vector<TickRecord> ticks{tick(60000, "EUR/USD", Side::ask, 1.26)};
    EXPECT_EQ(quotation_frequency(ticks, minutes(3), Side::ask).at("EUR/USD"), (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(QuotationFrequency, OnePerMinuteForADay) {
    std::vector<TickRecord> ticks;
    for (int k = 0; k < 1440; ++k)
        ticks.push_back(tick(k * 60000LL + 30000, "EUR/USD", Side::ask, 1.26));
    const auto a = quotation_frequency(ticks, minutes(1440), Side::ask).at("EUR/USD");
    EXPECT_TRUE(std::all_of(a.begin(), a.end(), [](double v) { return v == 1.0; }));
}

TEST(QuotationFrequency, ConservesCountsAndIgnoresOrder) {
    std::mt19937_64 gen(4);
    std::vector<TickRecord> ticks;
    const char* names[] = {"A", "B", "C"};
    for (int i = 0; i < 2000; ++i)
        ticks.push_back(tick(static_cast<std::int64_t>(gen() % (30 * 60000)), names[gen() % 3],
                             gen() % 2 ? Side::ask : Side::bid, 1.0 + static_cast<double>(gen() % 100) / 1000.0));
    const auto grid = ResampleGrid::covering(ticks, 60000);
    const auto a = quotation_frequency(ticks, grid, Side::ask);
    const auto r = best_rates(ticks, grid, Side::ask);
    for (const auto& [name, series] : a) {
        double total = 0.0;
        for (double v : series)
            total += v * grid.dt_minutes();
        const auto expected = std::count_if(ticks.begin(), ticks.end(), [&](const TickRecord& t) {
            return t.instrument == name && t.side == Side::ask;
        });
        EXPECT_EQ(total, static_cast<double>(expected));
    }
    auto shuffled = ticks;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_EQ(quotation_frequency(shuffled, grid, Side::ask), a);
    EXPECT_EQ(best_rates(shuffled, grid, Side::ask).rates, r.rates);
}

TEST(BestRates, MinimumAskMaximumBidAndForwardFill) {
    const std::vector<TickRecord> ticks{
        tick(1000, "EUR/USD", Side::ask, 1.2613), tick(2000, "EUR/USD", Side::ask, 1.2611),
        tick(3000, "EUR/USD", Side::ask, 1.2615), tick(4000, "USD/JPY", Side::bid, 116.21),
        tick(5000, "USD/JPY", Side::bid, 116.25), tick(130000, "EUR/USD", Side::ask, 1.2620)};
    const auto ask = best_rates(ticks, minutes(3), Side::ask);
    const auto& eur = ask.rates.at("EUR/USD");
    EXPECT_EQ(eur[0], 1.2611);
    EXPECT_EQ(eur[1], 1.2611); // empty bucket repeats its predecessor
    EXPECT_EQ(eur[2], 1.2620);
    EXPECT_EQ(ask.excluded, std::vector<std::string>{"USD/JPY"});
    const auto bid = best_rates(ticks, minutes(1), Side::bid);
    EXPECT_EQ(bid.rates.at("USD/JPY")[0], 116.25);
}

TEST(BestRates, LeadingGapIsMissing) {
    const std::vector<TickRecord> ticks{tick(1000, "A", Side::ask, 1.0), tick(61000, "B", Side::ask, 2.0)};
    const auto r = best_rates(ticks, minutes(3), Side::ask);
    EXPECT_FALSE(r.rates.at("B")[0].has_value());
    EXPECT_EQ(r.rates.at("B")[2], 2.0);
}

TEST(BuildPanel, RawAndLogReturn) {
    MarketSeries s{minutes(3), Side::ask, {"X"}, {{1.0, 2.0, 0.0}}, {{1.0, 1.0, 1.0}}, {}};
    const auto raw = build_panel(s, Quantity::rate);
    EXPECT_EQ(std::vector<double>(raw.channel(0).begin(), raw.channel(0).end()), (std::vector<double>{1, 1, 1}));
    s.best_rate = {{1.0, std::numbers::e, std::numbers::e}};
    const auto lr = build_panel(s, Quantity::rate, Transform::log_return);
    ASSERT_EQ(lr.length(), 2u);
    EXPECT_NEAR(lr.channel(0)[0], 1.0, 1e-15);
    EXPECT_EQ(lr.channel(0)[1], 0.0);
    EXPECT_EQ(lr.origin_ms(), t0 + 60000);
    const auto act = build_panel(s, Quantity::activity, Transform::log_return);
    EXPECT_EQ(std::vector<double>(act.channel(0).begin(), act.channel(0).end()), (std::vector<double>{1, 2, 0}));
}

TEST(BuildPanel, TrimsToFirstCompleteBucket) {
    MarketSeries s{minutes(4), Side::ask, {"A", "B"}, {{1, 1, 1, 1}, {0, 0, 1, 1}},
                   {{1.0, 1.1, 1.2, 1.3}, {std::nullopt, std::nullopt, 2.0, 2.1}}, {}};
    const auto p = build_panel(s, Quantity::rate);
    EXPECT_EQ(p.length(), 2u);
    EXPECT_EQ(p.origin_ms(), t0 + 120000);
    EXPECT_EQ(p.channel(0)[0], 1.2);
}

TEST(BuildPanel, Errors) {
    MarketSeries empty{minutes(3), Side::bid, {}, {}, {}, {"A"}};
    EXPECT_THROW(build_panel(empty, Quantity::activity), AnalysisError);
    MarketSeries neg{minutes(3), Side::ask, {"X"}, {{1, 1, 1}}, {{1.0, -1.0, 1.0}}, {}};
    EXPECT_THROW(build_panel(neg, Quantity::rate, Transform::log_return), TransformError);
}

TEST(Golden, FiftyTickFixtureReproducesExpectedPanels) {
    const auto parsed = parse_ticks(data_file("ticks_golden.csv"));
    ASSERT_EQ(parsed.records.size(), 50u);
    ASSERT_EQ(parsed.malformed, 0u);
    const auto grid = ResampleGrid::covering(parsed.records, 60000);
    EXPECT_EQ(grid.origin_ms, t0);
    EXPECT_EQ(grid.bucket_count, 10u);
    const auto series = make_market_series(parsed.records, grid, Side::ask);
    EXPECT_EQ(panel_csv(build_panel(series, Quantity::activity)), data_file("golden_activity.csv"));
    EXPECT_EQ(panel_csv(build_panel(series, Quantity::rate)), data_file("golden_rates.csv"));
}

TEST(Golden, ForwardFillInvariantHolds) {
    const auto parsed = parse_ticks(data_file("ticks_golden.csv"));
    const auto grid = ResampleGrid::covering(parsed.records, 60000);
    const auto s = make_market_series(parsed.records, grid, Side::ask);
    std::size_t filled = 0;
    for (std::size_t j = 0; j < s.instruments.size(); ++j)
        for (std::size_t k = 1; k < grid.bucket_count; ++k)
            if (s.activity[j][k] == 0.0 && s.best_rate[j][k - 1]) {
                EXPECT_EQ(s.best_rate[j][k], s.best_rate[j][k - 1]);
                ++filled;
            }
    EXPECT_GT(filled, 3u);
}

TEST(PanelCsv, RoundTrip) {
    const SignalPanel p({"a", "b"}, {{1.5, -2.0, 3.25}, {0.1, 0.2, 1e-300}}, 5.0, t0);
    const auto text = panel_csv(p, {{"transform", "raw"}});
    const auto back = read_panel_csv(text);
    EXPECT_EQ(back.provenance.at("transform"), "raw");
    EXPECT_EQ(back.panel.labels(), p.labels());
    EXPECT_EQ(back.panel.dt(), 5.0);
    EXPECT_EQ(back.panel.origin_ms(), t0);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 3; ++k)
            EXPECT_EQ(back.panel.channel(j)[k], p.channel(j)[k]);
    EXPECT_EQ(panel_csv(back.panel, back.provenance), text);
}

TEST(PanelCsv, RejectsNonUniformTime) {
    EXPECT_THROW(read_panel_csv("time,a\n1970-01-01T00:00:00Z,1\n1970-01-01T00:01:00Z,2\n1970-01-01T00:03:00Z,3\n"),
                 FormatError);
    EXPECT_THROW(read_panel_csv("when,a\n"), FormatError);
}
