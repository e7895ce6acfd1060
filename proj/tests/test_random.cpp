#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ktraffic/random.hpp"

using namespace ktraffic::random;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, 0, 0),
            (Block{0x6627e8d5U, 0xe169c58dU, 0xbc57ac4cU, 0x9b00dbd8U}));
  EXPECT_EQ(philox4x32_10({0xffffffffU, 0xffffffffU, 0xffffffffU, 0xffffffffU}, 0xffffffffU,
                          0xffffffffU),
            (Block{0x408f276dU, 0x41c83b0eU, 0xa20bc7c6U, 0x6d5451fdU}));
  EXPECT_EQ(philox4x32_10({0x243f6a88U, 0x85a308d3U, 0x13198a2eU, 0x03707344U}, 0xa4093822U,
                          0x299f31d0U),
            (Block{0xd16cfe09U, 0x94fdccebU, 0x5001e420U, 0x24126ea1U}));
}

TEST(CounterRng, PureFunctionOfSeedStreamCounter) {
  const CounterRng a(42, Stream::interaction);
  const CounterRng b(42, Stream::interaction);
  const CounterRng c(42, Stream::init);
  const CounterRng d(43, Stream::interaction);
  EXPECT_EQ(a.words(7, 9), b.words(7, 9));
  EXPECT_NE(a.words(7, 9), c.words(7, 9));
  EXPECT_NE(a.words(7, 9), d.words(7, 9));
  EXPECT_NE(a.words(7, 9), a.words(9, 7));
}

TEST(CounterRng, UnitAndIndexRanges) {
  EXPECT_EQ(to_unit(0), 0.0);
  EXPECT_LT(to_unit(~0ULL), 1.0);
  EXPECT_EQ(to_index(0, 10), 0u);
  EXPECT_EQ(to_index(~0ULL, 10), 9u);
}

TEST(CounterRng, UniformBinsChiSquare) {
  // 20 equiprobable bins, 2e5 draws: chi-square with 19 dof, 99.9% quantile ~43.8.
  const CounterRng rng(2024, Stream::interaction);
  constexpr int kBins = 20;
  constexpr int kDraws = 200000;
  std::vector<int> counts(kBins, 0);
  std::vector<int> index_counts(kBins, 0);
  for (int k = 0; k < kDraws; ++k) {
    const auto [x, y] = rng.words(static_cast<std::uint64_t>(k), 3);
    ++counts[static_cast<int>(to_unit(x) * kBins)];
    ++index_counts[to_index(y, kBins)];
  }
  auto chi2 = [&](const std::vector<int>& c) {
    const double expected = static_cast<double>(kDraws) / kBins;
    double s = 0.0;
    for (int n : c) s += (n - expected) * (n - expected) / expected;
    return s;
  };
  EXPECT_LT(chi2(counts), 43.8);
  EXPECT_LT(chi2(index_counts), 43.8);
}
