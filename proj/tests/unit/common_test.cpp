#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "plagdet/common.hpp"
#include "plagdet/rng.hpp"
#include "support.hpp"

using namespace plagdet;

TEST(Rng, SameSeedSameStream)
{
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differs = differs || x != c.next();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformAndBelowStayInRange)
{
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_LT(r.below(7), 7u);
    }
}

TEST(Rng, NormalMoments)
{
    Rng r(5);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutation)
{
    Rng r(9);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    r.shuffle(std::span<int>(w));
    EXPECT_NE(v, w);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(v, w);
}

TEST(Rng, DerivedStreamsDiffer)
{
    EXPECT_NE(Rng::derive(7, 0), Rng::derive(7, 1));
    EXPECT_NE(Rng::derive(7, 0), Rng::derive(8, 0));
    EXPECT_EQ(Rng::derive(7, 3), Rng::derive(7, 3));
}

TEST(Common, SigmoidIsStableAtExtremes)
{
    EXPECT_EQ(sigmoid(0.0), 0.5);
    EXPECT_NEAR(sigmoid(800.0), 1.0, 0.0);
    EXPECT_GE(sigmoid(-800.0), 0.0);
    EXPECT_NEAR(log1p_exp(1000.0), 1000.0, 1e-9);
    EXPECT_NEAR(log1p_exp(0.0), std::log(2.0), 1e-15);
}

TEST(Common, AtomicWriteCreatesParentsAndReplaces)
{
    const auto dir = fixture::temp_dir("atomic");
    const auto path = dir / "a" / "b.txt";
    write_file_atomic(path, "one");
    EXPECT_EQ(read_file(path), "one");
    write_file_atomic(path, "two");
    EXPECT_EQ(read_file(path), "two");
    size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "a"))
        ++entries;
    EXPECT_EQ(entries, 1u);
}

TEST(Common, SplitLinesDropsCarriageReturns)
{
    const auto lines = split_lines("a\r\nb\nc");
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "a");
    EXPECT_EQ(lines[2], "c");
}
