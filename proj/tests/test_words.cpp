#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "wordmap/words.hpp"

using namespace wordmap;

namespace {

// Naive reduction oracle: repeatedly scan for an adjacent cancelling pair.
std::vector<Letter> naive_reduce(std::vector<Letter> v) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (v[i].generator == v[i + 1].generator && v[i].sign == -v[i + 1].sign) {
        v.erase(v.begin() + static_cast<long>(i), v.begin() + static_cast<long>(i) + 2);
        changed = true;
        break;
      }
    }
  }
  return v;
}

bool is_reduced(const Word& w) {
  const auto l = w.letters();
  for (std::size_t i = 0; i + 1 < l.size(); ++i)
    if (l[i].cancels(l[i + 1])) return false;
  for (Letter x : l)
    if (x.generator > w.rank()) return false;
  return true;
}

std::vector<Letter> random_letters(std::mt19937_64& rng, int rank, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len), gen(1, rank), sgn(0, 1);
  std::vector<Letter> v(static_cast<std::size_t>(len(rng)));
  for (auto& l : v) l = {gen(rng), sgn(rng) ? 1 : -1};
  return v;
}

Word random_word(std::mt19937_64& rng, int rank, int max_len) {
  const auto v = random_letters(rng, rank, max_len);
  return Word(rank, v);
}

}  // namespace

TEST(Parse, CommutatorSpelledOut) {
  const Word w = parse_word("x*y*x^-1*y^-1");
  EXPECT_EQ(w.length(), 4u);
  EXPECT_EQ(w, commutator(Word::generator(1), Word::generator(2)));
  EXPECT_EQ(w.rank(), 2);
}

TEST(Parse, FreeReductionToIdentity) {
  const Word w = parse_word("x*x^-1");
  EXPECT_TRUE(w.is_identity());
  EXPECT_EQ(render(w), "1");
}

TEST(Parse, BracketPower) {
  const Word w = parse_word("[x,y]^2");
  EXPECT_EQ(w.length(), 8u);
  EXPECT_EQ(render(w), "x*y*x^-1*y^-1*x*y*x^-1*y^-1");
}

TEST(Parse, GrammarDetails) {
  EXPECT_EQ(parse_word("x2 x1"), parse_word("y*x"));
  EXPECT_EQ(parse_word(" x ^ 3 "), power(Word::generator(1), 3));
  EXPECT_TRUE(parse_word("x^0").is_identity());
  EXPECT_TRUE(parse_word("1").is_identity());
  EXPECT_EQ(parse_word("(x*y)^-1"), parse_word("y^-1*x^-1"));
  EXPECT_EQ(parse_word("x^+2"), parse_word("x*x"));
  EXPECT_EQ(parse_word("z").rank(), 3);
  EXPECT_EQ(parse_word("x", 4).rank(), 4);
  EXPECT_EQ(parse_word("x7").rank(), 7);
  EXPECT_EQ(parse_word("[x,y][y,x]").length(), 0u);
}

TEST(Parse, ErrorsCarryPosition) {
  try {
    parse_word("x*q");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
  EXPECT_THROW(parse_word("x^"), ParseError);
  EXPECT_THROW(parse_word("[x,y"), ParseError);
  EXPECT_THROW(parse_word("(x"), ParseError);
  EXPECT_THROW(parse_word(""), ParseError);
  EXPECT_THROW(parse_word("x0"), ParseError);
  try {
    parse_word("x*z", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(Words, InverseExamples) {
  const Word x = Word::generator(1), y = Word::generator(2);
  EXPECT_EQ(inverse(commutator(x, y)), commutator(y, x));
  EXPECT_EQ(inverse(power(x, 3)), power(x, -3));
  EXPECT_EQ(concat(parse_word("x*y"), parse_word("y^-1*x")), power(x, 2));
}

TEST(Words, CommutatorTrivialCases) {
  const Word x = Word::generator(1), y = Word::generator(2);
  EXPECT_EQ(commutator(x, y).length(), 4u);
  EXPECT_TRUE(commutator(x, x).is_identity());
  EXPECT_TRUE(commutator(Word(2), y).is_identity());
}

TEST(Words, EngelWords) {
  EXPECT_EQ(engel_word(1), parse_word("[x,y]"));
  EXPECT_EQ(engel_word(2), parse_word("[[x,y],y]"));
  for (int k = 1; k <= 6; ++k) EXPECT_EQ(exponent_sums(engel_word(k)), (std::vector<long long>{0, 0}));
  EXPECT_THROW(engel_word(0), DomainError);
}

TEST(Words, ThomWords) {
  EXPECT_EQ(thom_word(0), parse_word("[x,y]"));
  EXPECT_EQ(thom_word(1), parse_word("[[x,y],x]"));
  EXPECT_EQ(thom_word(1).length(), 10u);
  // Oracle: build the recursion letter-by-letter, reduce with the naive reducer.
  std::vector<Letter> x{{1, 1}}, y{{2, 1}};
  auto inv = [](std::vector<Letter> v) {
    std::reverse(v.begin(), v.end());
    for (auto& l : v) l.sign = -l.sign;
    return v;
  };
  auto cat = [](std::vector<Letter> a, const std::vector<Letter>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  auto comm = [&](const std::vector<Letter>& a, const std::vector<Letter>& b) {
    return naive_reduce(cat(cat(cat(a, b), inv(a)), inv(b)));
  };
  std::vector<Letter> w = comm(x, y);
  for (int k = 1; k <= 8; ++k) {
    if (k % 2 == 1) {
      std::vector<Letter> xp;
      for (int i = 0; i < (k + 1) / 2; ++i) xp.push_back({1, 1});
      w = comm(w, xp);
    } else {
      w = comm(w, naive_reduce(cat(cat(y, w), inv(y))));
    }
    const Word t = thom_word(k);
    EXPECT_EQ(std::vector<Letter>(t.letters().begin(), t.letters().end()), w) << "k=" << k;
  }
  for (int k = 0; k <= 10; ++k) {
    const Word t = thom_word(k);
    EXPECT_FALSE(t.is_identity());
    EXPECT_TRUE(is_reduced(t));
    EXPECT_EQ(exponent_sums(t), (std::vector<long long>{0, 0}));
  }
  EXPECT_THROW(thom_word(15), DomainError);
  EXPECT_THROW(thom_word(-1), DomainError);
  EXPECT_NO_THROW(thom_word(3, 3));
}

TEST(Words, ExponentSums) {
  EXPECT_EQ(exponent_sums(parse_word("[x,y]")), (std::vector<long long>{0, 0}));
  EXPECT_EQ(exponent_sums(parse_word("x^2*y")), (std::vector<long long>{2, 1}));
  EXPECT_EQ(exponent_sums(thom_word(3)), (std::vector<long long>{0, 0}));
}

TEST(Words, ProperPowerRoot) {
  auto r = proper_power_root(parse_word("x^6"));
  EXPECT_EQ(r.root, parse_word("x"));
  EXPECT_EQ(r.exponent, 6);
  r = proper_power_root(parse_word("[x,y]"));
  EXPECT_EQ(r.root, parse_word("[x,y]"));
  EXPECT_EQ(r.exponent, 1);
  r = proper_power_root(parse_word("x*y*x*y*x*y"));
  EXPECT_EQ(r.root, parse_word("x*y"));
  EXPECT_EQ(r.exponent, 3);
  r = proper_power_root(parse_word("z*(x*y)^4*z^-1"));
  EXPECT_EQ(r.root, parse_word("z*x*y*z^-1"));
  EXPECT_EQ(r.exponent, 4);
  EXPECT_THROW(proper_power_root(Word(2)), DomainError);
}

TEST(Words, Substitute) {
  const Word x = Word::generator(1), y = Word::generator(2);
  const std::vector<Word> xx{x, x};
  EXPECT_TRUE(substitute(parse_word("[x,y]"), xx).is_identity());
  const std::vector<Word> yy{y};
  EXPECT_EQ(substitute(parse_word("x^2"), yy), parse_word("y^2"));
  const std::vector<Word> powers{power(x, 20), shift_generators(power(x, 20), 1)};
  EXPECT_EQ(substitute(parse_word("x*y"), powers), parse_word("x^20*y^20"));
  const std::vector<Word> ids{Word(2), Word(2)};
  EXPECT_TRUE(substitute(thom_word(2), ids).is_identity());
  EXPECT_THROW(substitute(parse_word("x*y"), yy), DomainError);
}

TEST(WordsProperty, EveryOutputIsReduced) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto raw = random_letters(rng, 3, 16);
    const Word u(3, raw);
    const Word v = random_word(rng, 3, 16);
    // Construction reduces exactly like the naive oracle.
    EXPECT_EQ(std::vector<Letter>(u.letters().begin(), u.letters().end()), naive_reduce(raw));
    for (const Word& w : {u, concat(u, v), inverse(u), commutator(u, v), power(u, 3), power(v, -2),
                          cyclic_reduction(u).core, substitute(u, std::vector<Word>{v, u, v})}) {
      EXPECT_TRUE(is_reduced(w));
      ++checked;
    }
  }
  EXPECT_GE(checked, 10000);
}

TEST(WordsProperty, InverseLaws) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Word w = random_word(rng, 3, 20);
    EXPECT_TRUE(concat(w, inverse(w)).is_identity());
    EXPECT_EQ(inverse(inverse(w)), w);
  }
}

TEST(WordsProperty, RenderParseRoundTrip) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const int rank = 1 + static_cast<int>(rng() % 7);
    const Word w = random_word(rng, rank, 24);
    EXPECT_EQ(parse_word(render(w), rank), w) << render(w);
  }
}

TEST(WordsProperty, PowerRootRecoversMultiple) {
  std::mt19937_64 rng(14);
  int tested = 0;
  while (tested < 300) {
    const Word w = random_word(rng, 2, 10);
    if (w.is_identity() || proper_power_root(w).exponent != 1) continue;
    const int k = 2 + static_cast<int>(rng() % 4);
    const auto r = proper_power_root(power(w, k));
    EXPECT_EQ(r.exponent % k, 0) << render(w) << " ^ " << k;
    EXPECT_EQ(power(r.root, r.exponent), power(w, k));
    ++tested;
  }
}

TEST(WordsProperty, CyclicReductionConjugates) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 500; ++i) {
    const Word w = random_word(rng, 2, 14);
    const auto [c, core] = cyclic_reduction(w);
    EXPECT_EQ(concat(concat(c, core), inverse(c)), w);
    if (core.length() >= 2) EXPECT_FALSE(core.letters().front().cancels(core.letters().back()));
  }
}
