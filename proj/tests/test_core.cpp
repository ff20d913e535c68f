#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hybridnet/core.hpp"

using namespace hybridnet;

TEST(Dataset, RejectsMismatchedSample) {
    Dataset d(2, 1);
    d.add({{1, 2}, {3}});
    EXPECT_THROW(d.add({{1}, {3}}), Error);
    EXPECT_THROW(d.add({{1, 2}, {3, 4}}), Error);
}

TEST(Dataset, FirstSampleFixesDimensions) {
    Dataset d;
    d.add({{1, 2, 3}, {4}});
    EXPECT_EQ(d.input_dim(), 3u);
    EXPECT_THROW(d.add({{1, 2}, {4}}), Error);
}

TEST(Dataset, SliceAndTail) {
    Dataset d(1, 1);
    for (int i = 0; i < 10; ++i) d.add({{double(i)}, {double(i)}});
    const auto s = d.slice(3, 6);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].input[0], 3.0);
    const auto t = d.tail(4);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0].input[0], 6.0);
    EXPECT_EQ(d.tail(100).size(), 10u);
}

TEST(Normalizer, MapsRangeOntoUnitInterval) {
    const auto n = Normalizer::fit_series(std::vector<double>{2.0, 4.0, 6.0});
    EXPECT_DOUBLE_EQ(n.apply(2.0), 0.0);
    EXPECT_DOUBLE_EQ(n.apply(6.0), 1.0);
    EXPECT_DOUBLE_EQ(n.apply(5.0), 0.75);
    EXPECT_DOUBLE_EQ(n.denormalize(0.25), 3.0);
}

TEST(Normalizer, ConstantDimensionMapsToHalf) {
    const std::vector<Vec> rows{{1.0, 5.0}, {2.0, 5.0}};
    const auto n = Normalizer::fit(rows);
    EXPECT_DOUBLE_EQ(n.apply(std::vector<double>{1.5, 5.0})[1], 0.5);
}

TEST(Metrics, RmsKnownValue) {
    EXPECT_DOUBLE_EQ(rms_error(std::vector<double>{1, 2}, std::vector<double>{1, 4}), std::sqrt(2.0));
    EXPECT_THROW(rms_error(std::vector<double>{}, std::vector<double>{}), Error);
    EXPECT_THROW(rms_error(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST(Metrics, E1DividesBlockSumByHundred) {
    const Vec p(20, 1.0), t(20, 0.0);
    EXPECT_DOUBLE_EQ(e1_error(p, t), 0.2);
}

TEST(Metrics, E1MatchesPlainLoopOnRandomBlocks) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        Vec p(20), t(20);
        for (auto& v : p) v = g(rng);
        for (auto& v : t) v = g(rng);
        long double acc = 0.0L;
        for (int i = 0; i < 20; ++i) acc += static_cast<long double>(p[i] - t[i]) * (p[i] - t[i]);
        EXPECT_NEAR(e1_error(p, t), static_cast<double>(acc / 100.0L), 1e-12);
    }
}

TEST(SlidingWindows, PairsConsecutivePoints) {
    const Vec s{1, 2, 3, 4, 5};
    const auto d = sliding_windows(s, 3);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].input, (Vec{1, 2, 3}));
    EXPECT_EQ(d[0].target, (Vec{4}));
    EXPECT_EQ(d[1].input, (Vec{2, 3, 4}));
    EXPECT_EQ(d[1].target, (Vec{5}));
    EXPECT_TRUE(sliding_windows(s, 5).empty());
}

TEST(IteratedPredict, DropsOldestAppendsNewest) {
    std::vector<Vec> seen;
    const OneStepPredictor f = [&](std::span<const double> w) {
        seen.emplace_back(w.begin(), w.end());
        return w[0] + 10.0 * w[2];
    };
    const Vec out = iterated_predict(f, Vec{1, 2, 3}, 3, 3);
    // step 1: [1,2,3] -> 31; step 2: [2,3,31] -> 312; step 3: [3,31,312] -> 3123
    ASSERT_EQ(seen.size(), 3u);
    EXPECT_EQ(seen[0], (Vec{1, 2, 3}));
    EXPECT_EQ(seen[1], (Vec{2, 3, 31}));
    EXPECT_EQ(seen[2], (Vec{3, 31, 312}));
    EXPECT_EQ(out, (Vec{31, 312, 3123}));
}

TEST(IteratedPredict, RejectsWrongSeedLength) {
    const OneStepPredictor f = [](std::span<const double>) { return 0.0; };
    EXPECT_THROW(iterated_predict(f, Vec{1, 2}, 3, 1), Error);
}

TEST(Source, NamesRoundTrip) {
    EXPECT_EQ(source_from_string(to_string(Source::surface)), Source::surface);
    EXPECT_EQ(source_from_string(to_string(Source::deep)), Source::deep);
    EXPECT_THROW(source_from_string("hybrid"), Error);
}

TEST(ErrorTrace, RejectsNonIncreasingCycles) {
    ErrorTrace t;
    t.push({5, 0.1, 0.2, 0.1, Source::surface});
    EXPECT_THROW(t.push({5, 0.1, 0.2, 0.1, Source::surface}), Error);
    EXPECT_THROW(t.push({6, -0.1, 0.2, 0.1, Source::surface}), Error);
}

TEST(ErrorTrace, CsvHasHeaderAndOneRowPerCycle) {
    ErrorTrace t;
    for (std::size_t c = 0; c < 100; ++c) t.push({c, 0.1, 0.2, 0.1, Source::surface});
    std::ostringstream os;
    t.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "cycle,err_surface,err_deep,err_hybrid,source");
    std::size_t lines = 1;
    while (std::getline(is, line)) ++lines;
    EXPECT_EQ(lines, 101u);
}

TEST(ErrorTrace, CsvRoundTripIsExact) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ErrorTrace t;
    for (std::size_t c = 7; c < 57; ++c) {
        const double s = u(rng), d = u(rng) * 1e-7;
        t.push({c, s, d, c % 2 ? s : d, c % 2 ? Source::surface : Source::deep});
    }
    std::stringstream ss;
    t.write_csv(ss);
    const auto back = ErrorTrace::read_csv(ss);
    ASSERT_EQ(back.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(back[i].cycle, t[i].cycle);
        EXPECT_NEAR(back[i].err_surface, t[i].err_surface, 1e-12);
        EXPECT_NEAR(back[i].err_deep, t[i].err_deep, 1e-12);
        EXPECT_EQ(back[i], t[i]);
    }
}

TEST(ErrorTrace, ReadRejectsWrongHeader) {
    std::istringstream is("cycle,err_deep,err_surface,err_hybrid,source\n0,0,0,0,deep\n");
    EXPECT_THROW(ErrorTrace::read_csv(is), Error);
}
