#include <gtest/gtest.h>

#include <random>
#include <set>

#include "wordmap/liebracket.hpp"

using namespace wordmap;

namespace {

// Brute force with plain nested loops over all 16 entries.
std::set<std::array<int, 4>> brute_image(int p, bool traceless_only) {
  std::set<std::array<int, 4>> out;
  auto ok = [&](int a, int d) { return !traceless_only || (a + d) % p == 0; };
  for (int a = 0; a < p; ++a) for (int b = 0; b < p; ++b) for (int c = 0; c < p; ++c) for (int d = 0; d < p; ++d) {
    if (!ok(a, d)) continue;
    for (int e = 0; e < p; ++e) for (int f = 0; f < p; ++f) for (int g = 0; g < p; ++g) for (int h = 0; h < p; ++h) {
      if (!ok(e, h)) continue;
      // XY - YX entrywise for X = [[a,b],[c,d]], Y = [[e,f],[g,h]].
      const int z0 = (b * g - f * c) % p;
      const int z1 = (a * f + b * h - e * b - f * d) % p;
      const int z2 = (c * e + d * g - g * a - h * c) % p;
      const int z3 = (c * f - g * b) % p;
      out.insert({(z0 + p * p * p) % p, (z1 + p * p * p) % p, (z2 + p * p * p) % p, (z3 + p * p * p) % p});
    }
  }
  return out;
}

}  // namespace

TEST(Bracket, BasicIdentities) {
  std::mt19937_64 rng(1);
  for (int p : {3, 5, 7, 11}) {
    for (int t = 0; t < 200; ++t) {
      SmallMatrix x, y;
      for (int& v : x.e) v = static_cast<int>(rng() % static_cast<unsigned>(p));
      for (int& v : y.e) v = static_cast<int>(rng() % static_cast<unsigned>(p));
      EXPECT_EQ(bracket(x, x, p), SmallMatrix{});
      const SmallMatrix xy = bracket(x, y, p), yx = bracket(y, x, p);
      EXPECT_TRUE(xy.traceless(p));
      for (int i = 0; i < 4; ++i) EXPECT_EQ((xy.e[static_cast<std::size_t>(i)] + yx.e[static_cast<std::size_t>(i)]) % p, 0);
      EXPECT_EQ(SmallMatrix::decode(x.code(p), p), x);
    }
  }
}

TEST(Bracket, ImageMatchesBruteForceP3) {
  for (MatrixSpace space : {MatrixSpace::GL, MatrixSpace::SL}) {
    const auto bf = brute_image(3, space == MatrixSpace::SL);
    const auto r = bracket_image(3, space);
    EXPECT_EQ(r.image_size, bf.size());
    EXPECT_EQ(r.traceless_count, 27u);
    for (std::uint32_t c = 0; c < r.image.size(); ++c) {
      const SmallMatrix m = SmallMatrix::decode(c, 3);
      EXPECT_EQ(static_cast<bool>(r.image[c]), bf.count(m.e) > 0);
    }
  }
}

TEST(Bracket, GlImageIsAllOfSl2) {
  for (int p : {3, 5, 7}) {
    const auto r = bracket_image(p, MatrixSpace::GL);
    EXPECT_EQ(r.traceless_count, static_cast<std::size_t>(p * p * p));
    EXPECT_TRUE(r.equals_traceless) << "p=" << p;
    EXPECT_TRUE(r.missed.empty());
  }
}

TEST(Bracket, ThreadsAgree) {
  const auto a = bracket_image(5, MatrixSpace::SL, 1);
  const auto b = bracket_image(5, MatrixSpace::SL, 3);
  EXPECT_EQ(a.image, b.image);
}

TEST(Width, SumsetsNondecreasing) {
  for (int p : {3, 5}) {
    for (MatrixSpace space : {MatrixSpace::GL, MatrixSpace::SL}) {
      const auto w = bracket_width(p, space);
      for (std::size_t i = 1; i < w.sizes.size(); ++i) EXPECT_LE(w.sizes[i - 1], w.sizes[i]);
      EXPECT_TRUE(w.width.has_value() || w.stabilized_below_sl2 || w.exceeds_cap);
    }
    const auto gl = bracket_width(p, MatrixSpace::GL);
    ASSERT_TRUE(gl.width.has_value());
    EXPECT_EQ(*gl.width, 1);
  }
}

TEST(Width, SlSumsetReachesSl2) {
  // Brute force: the 2-fold sumset of the sl2 bracket image is all of sl2.
  const auto img = brute_image(3, true);
  std::set<std::array<int, 4>> sums;
  for (const auto& a : img)
    for (const auto& b : img) sums.insert({(a[0] + b[0]) % 3, (a[1] + b[1]) % 3, (a[2] + b[2]) % 3, (a[3] + b[3]) % 3});
  const auto w = bracket_width(3, MatrixSpace::SL);
  if (img.size() == 27u) {
    EXPECT_EQ(*w.width, 1);
  } else if (sums.size() == 27u) {
    ASSERT_TRUE(w.width.has_value());
    EXPECT_EQ(*w.width, 2);
  }
}

TEST(Bracket, Errors) {
  EXPECT_THROW(bracket_image(4, MatrixSpace::GL), DomainError);
  EXPECT_THROW(bracket_image(17, MatrixSpace::GL), DomainError);
  EXPECT_THROW(bracket_width(17, MatrixSpace::GL, 8, 1, 13), DomainError);
  EXPECT_THROW(matrix_space_from_string("so"), DomainError);
}
