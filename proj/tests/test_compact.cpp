#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wordmap/compact.hpp"

using namespace wordmap;

namespace {

const double kPi = std::acos(-1.0);

UnitaryMatrix su2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return UnitaryMatrix::from_matrix(m);
}

// Denman-Beavers iteration; converges to the principal square root.
RealMat2 denman_beavers(const RealMat2& a) {
  RealMat2 y = a, z = RealMat2::Identity();
  for (int i = 0; i < 100; ++i) {
    const RealMat2 yn = 0.5 * (y + z.inverse());
    const RealMat2 zn = 0.5 * (z + y.inverse());
    y = yn;
    z = zn;
  }
  return y;
}

RealMat2 random_sl2r(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2, 2);
  while (true) {
    RealMat2 m;
    m << u(rng), u(rng), u(rng), u(rng);
    const double d = m.determinant();
    if (std::abs(d) < 0.1) continue;
    if (d < 0) m.col(0) *= -1;
    return m / std::sqrt(std::abs(d));
  }
}

}  // namespace

TEST(Haar, TraceMoments) {
  std::mt19937_64 rng(101);
  const int N = 100000;
  Complex mean = 0;
  double second = 0;
  for (int i = 0; i < N; ++i) {
    const Complex t = haar_su(2, rng).matrix().trace();
    mean += t;
    second += std::norm(t);
  }
  mean /= N;
  second /= N;
  EXPECT_LT(std::abs(mean), 0.02);
  EXPECT_NEAR(second, 1.0, 0.02);
}

TEST(Haar, TraceMomentsSu3) {
  std::mt19937_64 rng(102);
  const int N = 20000;
  double second = 0;
  Complex mean = 0;
  for (int i = 0; i < N; ++i) {
    const UnitaryMatrix u = haar_su(3, rng);
    EXPECT_LT(u.defect(), 1e-12);
    EXPECT_LT(std::abs(u.matrix().determinant() - Complex(1, 0)), 1e-12);
    const Complex t = u.matrix().trace();
    mean += t;
    second += std::norm(t);
  }
  EXPECT_LT(std::abs(mean / double(N)), 0.05);
  EXPECT_NEAR(second / N, 1.0, 0.05);
}

TEST(Unitary, Validation) {
  CMatrix m = CMatrix::Identity(2, 2);
  m(0, 0) = 2;
  EXPECT_THROW(UnitaryMatrix::from_matrix(m), DomainError);
  CMatrix ph = CMatrix::Identity(2, 2) * Complex(0, 1);
  EXPECT_THROW(UnitaryMatrix::from_matrix(ph), DomainError);  // det = -1
  EXPECT_THROW(haar_su(1, 3), DomainError);
}

TEST(Length, Examples) {
  const UnitaryMatrix I = UnitaryMatrix::identity(2);
  const UnitaryMatrix minus = su2(-1, 0, 0, -1);
  const UnitaryMatrix diag = su2(Complex(0, 1), 0, 0, Complex(0, -1));
  EXPECT_NEAR(length(I).value, 0, 1e-15);
  EXPECT_NEAR(length(minus).value, 2, 1e-12);
  EXPECT_NEAR(length(minus, Norm::Frobenius).value, 2 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(length(diag).value, std::sqrt(2.0), 1e-12);
  EXPECT_THROW(norm_from_string("max"), DomainError);
}

TEST(Length, ConjugationInvariantAndCommutatorBound) {
  std::mt19937_64 rng(103);
  double worst = -1;
  for (int i = 0; i < 2000; ++i) {
    const int n = 2 + i % 3;
    const UnitaryMatrix g = haar_su(n, rng), h = haar_su(n, rng);
    for (Norm norm : {Norm::Operator, Norm::Frobenius})
      EXPECT_NEAR(length(h * g * h.inverse(), norm).value, length(g, norm).value, 1e-10);
    const double slack = length(group_commutator(g, h)).value - 2 * length(g).value * length(h).value;
    worst = std::max(worst, slack);
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Evaluate, DriftOnLongWords) {
  std::mt19937_64 rng(104);
  Word w(2);
  for (int i = 0; i < 10000; ++i) w.push({1 + static_cast<int>(rng() % 2), 1});  // positive letters never cancel
  ASSERT_EQ(w.length(), 10000u);
  const std::vector<UnitaryMatrix> t{haar_su(3, rng), haar_su(3, rng)};
  const UnitaryMatrix v = evaluate_word(w, t);
  EXPECT_LT(v.defect(), 1e-7);
  EXPECT_LT(std::abs(v.matrix().determinant() - Complex(1, 0)), 1e-7);
  EXPECT_THROW(evaluate_word(w, std::vector<UnitaryMatrix>{t[0]}), DomainError);
}

TEST(Evaluate, MatchesDirectProduct) {
  std::mt19937_64 rng(105);
  const std::vector<UnitaryMatrix> t{haar_su(2, rng), haar_su(2, rng)};
  const CMatrix& a = t[0].matrix();
  const CMatrix& b = t[1].matrix();
  const CMatrix direct = a * b * a.adjoint() * b.adjoint();
  EXPECT_LT((evaluate_word(parse_word("[x,y]"), t).matrix() - direct).norm(), 1e-12);
}

TEST(Thom, DecayAndDeterminism) {
  const DecayReport r = thom_decay(2, 8, 20, 7);
  ASSERT_EQ(r.rows.size(), 9u);
  EXPECT_LT(r.rows[8].median, 1e-3 * r.rows[0].median);
  EXPECT_EQ(r.inequality_violations, 0u);
  const DecayReport s = thom_decay(2, 8, 20, 7, Norm::Operator, 3);
  EXPECT_EQ(r.lengths, s.lengths);
  EXPECT_THROW(thom_decay(2, 15, 10, 1), DomainError);
  EXPECT_THROW(thom_decay(2, 3, 0, 1), DomainError);
}

TEST(Thom, RecursionMatchesWordEvaluation) {
  // Numeric recursion against the symbolic word evaluated directly.
  std::mt19937_64 rng(106);
  const UnitaryMatrix g = haar_su(2, rng), h = haar_su(2, rng);
  const ThomTrace tr = thom_trace(g, h, 4, Norm::Operator);
  const std::vector<UnitaryMatrix> pair{g, h};
  for (int k = 0; k <= 4; ++k)
    EXPECT_NEAR(tr.lengths[static_cast<std::size_t>(k)], length(evaluate_word(thom_word(k), pair)).value, 1e-9);
}

TEST(Solver, SingleLetterIsExact) {
  std::mt19937_64 rng(107);
  const UnitaryMatrix target = haar_su(2, rng);
  const auto r = solve_word_equation(parse_word("x"), target, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.residual, 1e-12);
  const auto ri = solve_word_equation(parse_word("y^-1"), target, 1);
  EXPECT_LT(ri.residual, 1e-12);
}

TEST(Solver, CommutatorHitsMinusIdentity) {
  // Oracle: pi-rotations about orthogonal axes have commutator -I.
  const UnitaryMatrix A = su2(0, Complex(0, 1), Complex(0, 1), 0);
  const UnitaryMatrix B = su2(0, 1, -1, 0);
  const UnitaryMatrix minus = su2(-1, 0, 0, -1);
  EXPECT_LT((group_commutator(A, B).matrix() - minus.matrix()).norm(), 1e-14);

  SolverOptions opt;
  opt.tolerance = 1e-9;
  const auto r = solve_word_equation(parse_word("[x,y]"), minus, 5, opt);
  EXPECT_LT(r.residual, 1e-6);
  EXPECT_NEAR((evaluate_word(parse_word("[x,y]"), r.tuple).matrix() - minus.matrix()).norm(), r.residual, 1e-12);
}

TEST(Solver, EngelTargets) {
  std::mt19937_64 rng(108);
  const Word w = engel_word(2);
  for (int t = 0; t < 3; ++t) {
    const UnitaryMatrix target = haar_su(2, rng);
    const auto r = solve_word_equation(w, target, 100 + static_cast<std::uint64_t>(t));
    EXPECT_LT(r.residual, 1e-6);
    EXPECT_LE(r.evaluations, 200000u);
  }
}

TEST(RankMetric, DistanceAndDensity) {
  const UnitaryMatrix I = UnitaryMatrix::identity(4);
  CMatrix d = CMatrix::Identity(4, 4);
  d(2, 2) = -1;
  d(3, 3) = -1;
  const UnitaryMatrix D = UnitaryMatrix::from_matrix(d);
  EXPECT_EQ(rank_distance(I, I), 0.0);
  EXPECT_EQ(rank_distance(I, D), 0.5);
  EXPECT_EQ(rank_distance(I, unchecked_unitary(-CMatrix::Identity(4, 4))), 1.0);
  const auto full = rank_metric_density(3, parse_word("[x,y]"), 1.0, 5, 20, 3);
  EXPECT_EQ(full.covered_fraction, 1.0);
  // Generic values differ from a generic target in every direction.
  const auto tight = rank_metric_density(3, parse_word("[x,y]"), 0.5, 5, 20, 3);
  EXPECT_EQ(tight.covered_fraction, 0.0);
  EXPECT_THROW(rank_metric_density(3, parse_word("x"), 0.0, 5, 5, 1), DomainError);
}

TEST(Roots, Sl2rExamples) {
  RealMat2 g;
  g << -4, 0, 0, -0.25;
  EXPECT_FALSE(sqrt_exists_sl2r(g).exists);
  const auto m = sqrt_exists_sl2r(-RealMat2::Identity());
  EXPECT_TRUE(m.exists);
  EXPECT_LT(m.residual, 1e-15);
  g << -1, 1, 0, -1;
  EXPECT_FALSE(sqrt_exists_sl2r(g).exists);
  g << 2, 0, 0, 1;
  EXPECT_THROW(sqrt_exists_sl2r(g), DomainError);
}

TEST(Roots, Sl2rAgreesWithDenmanBeavers) {
  std::mt19937_64 rng(109);
  int compared = 0;
  while (compared < 100) {
    const RealMat2 g = random_sl2r(rng);
    const double tr = g.trace();
    if (std::abs(tr + 2) < 1e-3) continue;
    const auto r = sqrt_exists_sl2r(g);
    EXPECT_EQ(r.exists, tr > -2);
    if (tr > -2) {
      const RealMat2 db = denman_beavers(g);
      EXPECT_LT((db - *r.witness).norm(), 1e-8 * (1 + db.norm()));
      ++compared;
    }
  }
}

TEST(Roots, Sl2cExamples) {
  ComplexMat2 g;
  g << Complex(0, 1), 0, 0, Complex(0, -1);
  const auto r = root_sl2c(g, 2);
  ASSERT_TRUE(r.exists);
  // Four diagonal square roots: (+-e^{i pi/4}, +-e^{-i pi/4}) with product 1.
  const Complex w = std::polar(1.0, kPi / 4);
  bool matched = false;
  for (int s : {1, -1}) {
    ComplexMat2 c;
    c << double(s) * w, 0, 0, double(s) / w;
    matched = matched || (c - *r.witness).norm() < 1e-9;
  }
  EXPECT_TRUE(matched);

  g << -1, 1, 0, -1;
  EXPECT_FALSE(root_sl2c(g, 2).exists);
  EXPECT_FALSE(root_sl2c(g, 4).exists);
  EXPECT_TRUE(root_sl2c(g, 3).exists);
  EXPECT_TRUE(root_sl2c(-ComplexMat2::Identity(), 2).exists);
  g << 1, 5, 0, 1;
  EXPECT_TRUE(root_sl2c(g, 6).exists);
  EXPECT_THROW(root_sl2c(g, 1), DomainError);
}

TEST(Roots, Sl2cRandomWitnessesVerify) {
  std::mt19937_64 rng(110);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 200; ++i) {
    ComplexMat2 g;
    g << Complex(n(rng), n(rng)), Complex(n(rng), n(rng)), Complex(n(rng), n(rng)), Complex(n(rng), n(rng));
    g /= std::sqrt(g.determinant());
    const int k = 2 + i % 4;
    const auto r = root_sl2c(g, k);
    ASSERT_TRUE(r.exists);
    EXPECT_LT((matrix_power(*r.witness, k) - g).norm(), 1e-8);
  }
}
