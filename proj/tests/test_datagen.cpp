#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hybridnet/datagen.hpp"

using namespace hybridnet;

namespace {

MgParams from_start(MgParams p) {
    p.discard = 0;
    return p;
}

}  // namespace

TEST(MackeyGlass, ZeroFeedbackIsPureDecay) {
    MgParams p = from_start(mg_p1());
    p.a = 0.0;
    const Vec x = mg_generate(p, 51);
    for (std::size_t t = 0; t <= 50; ++t) EXPECT_NEAR(x[t], 1.2 * std::exp(-0.1 * double(t)), 1e-3);
}

TEST(MackeyGlass, MatchesReferenceSolution) {
    // Reference: closed form while t < d, then an adaptive DOP853 solve with
    // the delayed term taken from that closed form.
    const Vec x = mg_generate(from_start(mg_p1()), 61);
    EXPECT_NEAR(x[10], 1.2852511818028136, 1e-9);
    EXPECT_NEAR(x[20], 1.3166133389236379, 1e-9);
    EXPECT_NEAR(x[29], 1.3274446561518307, 1e-9);
    EXPECT_NEAR(x[31], 1.3235830175483139, 1e-8);
    EXPECT_NEAR(x[40], 1.0835225386532688, 1e-8);
    EXPECT_NEAR(x[50], 0.827158277337147, 1e-8);
    EXPECT_NEAR(x[60], 0.685220857951065, 1e-8);
}

TEST(MackeyGlass, HalvingStepBarelyMoves) {
    MgParams fine = mg_p1();
    fine.dt = 0.05;
    const Vec a = mg_generate(mg_p1(), 200);
    const Vec b = mg_generate(fine, 200);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-4) << i;
}

TEST(MackeyGlass, DiscardDropsLeadingSamples) {
    MgParams p = mg_p1();
    p.discard = 0;
    const Vec all = mg_generate(p, 120);
    p.discard = 100;
    const Vec tail = mg_generate(p, 20);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(tail[i], all[100 + i]);
}

TEST(MackeyGlass, RejectsBadParameters) {
    MgParams p = mg_p1();
    p.dt = 0.0;
    EXPECT_THROW(mg_generate(p, 10), Error);
    p = mg_p1();
    p.sample_every = 0.25;
    p.dt = 0.1;
    EXPECT_THROW(mg_generate(p, 10), Error);
    EXPECT_TRUE(mg_generate(mg_p1(), 0).empty());
}

TEST(MackeyGlass, RegimesDiffer) {
    const Vec a = mg_generate(mg_p1(), 100);
    const Vec b = mg_generate(mg_p2(), 100);
    EXPECT_NE(a, b);
    for (double v : b) EXPECT_TRUE(v > 0.0 && v < 4.0);
}

TEST(Gauss, PeakDensityOfFirstSet) {
    EXPECT_NEAR(gauss_pdf({0.0, 0.0}, gauss_p1()), 1.0 / (0.4 * M_PI), 1e-9);
    EXPECT_NEAR(gauss_pdf({0.0, 0.0}, gauss_p1()), 0.7957747, 1e-7);
}

TEST(Gauss, OffPeakReferenceValues) {
    EXPECT_NEAR(gauss_pdf({1.0, 0.5}, gauss_p1()), 0.22799327319919296, 1e-12);
    EXPECT_NEAR(gauss_pdf({0.5, -0.3}, gauss_p2()), 0.010603338925045084, 1e-12);
}

TEST(Gauss, MassIsOne) {
    for (const auto& p : {gauss_p1(), gauss_p2()}) {
        const std::size_t n = 601;
        const double h = 12.0 / double(n - 1);
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) mass += gauss_pdf({-6.0 + h * i, -6.0 + h * j}, p) * h * h;
        }
        EXPECT_NEAR(mass, 1.0, 1e-3);
    }
}

TEST(Gauss, GridShapeAndCorners) {
    const auto g = gauss_grid(gauss_p1(), 30);
    ASSERT_EQ(g.size(), 900u);
    EXPECT_EQ(g[0].input, (Vec{-2.0, -2.0}));
    EXPECT_EQ(g[1].input[0], -2.0);
    EXPECT_GT(g[1].input[1], -2.0);
    EXPECT_EQ(g[899].input, (Vec{2.0, 2.0}));
    EXPECT_EQ(gauss_grid(gauss_p2(), 40).size(), 1600u);
}

TEST(Gauss, RejectsAsymmetricCovariance) {
    GaussParams p = gauss_p1();
    p.sigma[2] = 0.5;
    EXPECT_THROW(gauss_pdf({0.0, 0.0}, p), Error);
}

TEST(Cats, SyntheticHasFiveMissingBlocks) {
    const auto c = cats_synthesize(3);
    ASSERT_EQ(c.values.size(), 5000u);
    EXPECT_EQ(c.missing_count(), 100u);
    for (std::size_t first : CatsSeries::block_starts) {
        EXPECT_TRUE(c.missing[first - 1]);
        EXPECT_TRUE(c.missing[first + 18]);
        EXPECT_FALSE(c.missing[first - 2]);
        EXPECT_FALSE(first + 19 < 5000 && c.missing[first + 19]);
    }
    EXPECT_EQ(c.range(981, 1000).size(), 20u);
    EXPECT_EQ(c.range(981, 1000)[0], c.values[980]);
}

TEST(Cats, SyntheticIsSeeded) {
    EXPECT_EQ(cats_synthesize(4).values, cats_synthesize(4).values);
    EXPECT_NE(cats_synthesize(4).values, cats_synthesize(5).values);
}

TEST(Cats, LoadReportsShortFile) {
    const auto path = std::filesystem::temp_directory_path() / "hybridnet_short_cats.txt";
    {
        std::ofstream os(path);
        for (int i = 0; i < 10; ++i) os << i << '\n';
    }
    EXPECT_THROW(cats_load(path.string()), Error);
    std::filesystem::remove(path);
}

TEST(Series, WriteReadRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "hybridnet_series.txt";
    const Vec v = mg_generate(mg_p2(), 50);
    write_series(path.string(), v);
    EXPECT_EQ(read_series(path.string()), v);
    std::filesystem::remove(path);
}

TEST(Series, ReadNamesBadLine) {
    const auto path = std::filesystem::temp_directory_path() / "hybridnet_bad_series.txt";
    {
        std::ofstream os(path);
        os << "1.0\n2.0\nabc\n";
    }
    try {
        (void)read_series(path.string());
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST(Series, DatasetCsvHeader) {
    const auto path = std::filesystem::temp_directory_path() / "hybridnet_grid.csv";
    write_dataset_csv(path.string(), gauss_grid(gauss_p1(), 3));
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "x1,x2,target");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 9u);
    std::filesystem::remove(path);
}

TEST(RegimeStream, ConcatenatesAndMarksChanges) {
    const auto s = regime_stream(std::vector<Vec>{{1, 2, 3}, {4, 5}, {6}});
    EXPECT_EQ(s.series, (Vec{1, 2, 3, 4, 5, 6}));
    EXPECT_EQ(s.change_points, (std::vector<std::size_t>{3, 5}));
    EXPECT_THROW(regime_stream(std::vector<Vec>{}), Error);
}

TEST(RegimeStream, ScheduleGeneratesEachSegment) {
    RegimeSchedule sched{{{mg_p1(), 30}, {mg_p2(), 20}}};
    const auto s = regime_stream(sched);
    ASSERT_EQ(s.series.size(), 50u);
    EXPECT_EQ(s.change_points, (std::vector<std::size_t>{30}));
    EXPECT_EQ(Vec(s.series.begin() + 30, s.series.end()), mg_generate(mg_p2(), 20));
}
