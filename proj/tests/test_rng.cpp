#include <gtest/gtest.h>

#include <billiard/rng.hpp>

#include <cmath>
#include <vector>

using billiard::RngStream;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
    auto zero = RngStream::philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(zero[0], 0x6627e8d5u);
    EXPECT_EQ(zero[1], 0xe169c58du);
    EXPECT_EQ(zero[2], 0xbc57ac4cu);
    EXPECT_EQ(zero[3], 0x9b00dbd8u);

    auto ones = RngStream::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(ones[0], 0x408f276du);
    EXPECT_EQ(ones[1], 0x41c83b0eu);
    EXPECT_EQ(ones[2], 0xa20bc7c6u);
    EXPECT_EQ(ones[3], 0x6d5451fdu);

    auto pi = RngStream::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(pi[0], 0xd16cfe09u);
    EXPECT_EQ(pi[1], 0x94fdccebu);
    EXPECT_EQ(pi[2], 0x5001e420u);
    EXPECT_EQ(pi[3], 0x24126ea1u);
}

TEST(RngStream, SameSeedAndStreamReproduces) {
    RngStream a(42, 3);
    RngStream b(42, 3);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, DistinctStreamsDiffer) {
    RngStream a(42, 0);
    RngStream b(42, 1);
    int equal = 0;
    for (int i = 0; i < 1000; ++i) equal += a() == b();
    EXPECT_EQ(equal, 0);
}

TEST(RngStream, CounterCheckpointResumesExactly) {
    RngStream a(7, 9);
    for (int i = 0; i < 37; ++i) a();
    RngStream b(7, 9, a.counter());
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, UniformMomentsAndRange) {
    RngStream rng(1, 0);
    const int n = 200000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum2 += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 0.005);
}

TEST(RngStream, NormalMoments) {
    RngStream rng(2, 0);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.015);
    EXPECT_NEAR(s4 / n, 3.0, 0.08);
}

// Independence across streams: correlation of paired uniforms is at noise level.
TEST(RngStream, StreamsUncorrelated) {
    RngStream a(5, 10);
    RngStream b(5, 11);
    const int n = 100000;
    double sab = 0.0;
    for (int i = 0; i < n; ++i) sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
    const double corr = sab / n * 12.0;
    EXPECT_LT(std::abs(corr), 5.0 / std::sqrt(n));
}
