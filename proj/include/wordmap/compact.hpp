#pragma once

// Floating-point experiments on SU(n), SL2(R) and SL2(C).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "wordmap/errors.hpp"
#include "wordmap/words.hpp"

namespace wordmap {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kUnitaryTolerance = 1e-9;
inline constexpr int kReorthonormalizeEvery = 64;

/// Counter-derived seed for sample `index` of a stream seeded by `seed`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Modified Gram-Schmidt on the columns, in place.
inline void orthonormalize_columns(CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      const Complex proj = m.col(k).dot(m.col(j));
      m.col(j) -= proj * m.col(k);
    }
    m.col(j) /= m.col(j).norm();
  }
}

inline double unitarity_defect(const CMatrix& m) {
  return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).norm();
}

/// Element of SU(n).
class UnitaryMatrix {
 public:
  /// Validates ||U*U - I||_F and |det U - 1| against `tol`.
  static UnitaryMatrix from_matrix(CMatrix m, double tol = kUnitaryTolerance) {
    if (m.rows() != m.cols() || m.rows() < 1) throw DomainError("unitary matrix must be square");
    if (unitarity_defect(m) >= tol) throw DomainError("matrix is not unitary within tolerance");
    if (std::abs(m.determinant() - Complex(1, 0)) >= tol) throw DomainError("matrix does not have determinant 1");
    return UnitaryMatrix(std::move(m));
  }

  static UnitaryMatrix identity(int n) { return UnitaryMatrix(CMatrix::Identity(n, n)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }
  UnitaryMatrix inverse() const { return UnitaryMatrix(m_.adjoint()); }

  friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) { return UnitaryMatrix(a.m_ * b.m_); }

  /// Re-projects onto SU(n): Gram-Schmidt, then divides out the determinant phase.
  void reorthonormalize() {
    orthonormalize_columns(m_);
    const Complex det = m_.determinant();
    m_ *= std::pow(det, -1.0 / static_cast<double>(m_.rows()));
  }

  double defect() const { return unitarity_defect(m_); }

 private:
  explicit UnitaryMatrix(CMatrix m) : m_(std::move(m)) {}
  friend UnitaryMatrix haar_su(int n, std::mt19937_64& rng);
  friend UnitaryMatrix exp_tangent(const UnitaryMatrix&, const CMatrix&);
  friend UnitaryMatrix unchecked_unitary(CMatrix m);
  CMatrix m_;
};

inline UnitaryMatrix unchecked_unitary(CMatrix m) { return UnitaryMatrix(std::move(m)); }

/// Haar-distributed element of SU(n). n = 2 uses a uniform unit quaternion;
/// n >= 3 orthonormalizes a complex Gaussian matrix and fixes the
/// determinant phase.
inline UnitaryMatrix haar_su(int n, std::mt19937_64& rng) {
  if (n < 2) throw DomainError("haar_su requires n >= 2");
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (n == 2) {
    double q[4];
    double norm = 0;
    do {
      norm = 0;
      for (double& v : q) {
        v = gauss(rng);
        norm += v * v;
      }
    } while (norm < 1e-300);
    norm = std::sqrt(norm);
    for (double& v : q) v /= norm;
    CMatrix m(2, 2);
    m << Complex(q[0], q[1]), Complex(q[2], q[3]), Complex(-q[2], q[3]), Complex(q[0], -q[1]);
    return UnitaryMatrix(std::move(m));
  }
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
  UnitaryMatrix u(std::move(m));
  u.reorthonormalize();
  return u;
}

inline UnitaryMatrix haar_su(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_su(n, rng);
}

enum class Norm { Operator, Frobenius };

inline std::string to_string(Norm n) { return n == Norm::Operator ? "operator" : "frobenius"; }

inline Norm norm_from_string(std::string_view s) {
  if (s == "operator") return Norm::Operator;
  if (s == "frobenius") return Norm::Frobenius;
  throw DomainError("unknown norm '" + std::string(s) + "'");
}

inline double matrix_norm(const CMatrix& m, Norm norm) {
  if (norm == Norm::Frobenius) return m.norm();
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

struct LengthValue {
  double value = 0;
  Norm norm = Norm::Operator;
};

/// l(g) = ||I - g||.
inline LengthValue length(const UnitaryMatrix& g, Norm norm = Norm::Operator) {
  const CMatrix diff = CMatrix::Identity(g.dim(), g.dim()) - g.matrix();
  return {matrix_norm(diff, norm), norm};
}

inline UnitaryMatrix group_commutator(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  return a * b * a.inverse() * b.inverse();
}

/// Left-to-right product, re-orthonormalized every kReorthonormalizeEvery
/// multiplications.
inline UnitaryMatrix evaluate_word(const Word& w, std::span<const UnitaryMatrix> tuple) {
  if (tuple.size() != static_cast<std::size_t>(w.rank())) throw DomainError("evaluate_word: rank mismatch");
  if (tuple.empty()) return UnitaryMatrix::identity(2);
  const int n = tuple[0].dim();
  std::vector<UnitaryMatrix> inv;
  for (const auto& u : tuple) {
    if (u.dim() != n) throw DomainError("evaluate_word: mixed dimensions");
    inv.push_back(u.inverse());
  }
  UnitaryMatrix acc = UnitaryMatrix::identity(n);
  int since = 0;
  for (Letter l : w.letters()) {
    const auto i = static_cast<std::size_t>(l.generator - 1);
    acc = acc * (l.sign > 0 ? tuple[i] : inv[i]);
    if (++since == kReorthonormalizeEvery) {
      acc.reorthonormalize();
      since = 0;
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Almost-law decay

struct DecayRow {
  int k = 0;
  double min = 0, median = 0, max = 0;
};

struct DecayReport {
  int dim = 2;
  int k_max = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  Norm norm = Norm::Operator;
  std::vector<DecayRow> rows;
  std::vector<std::vector<double>> lengths;  // [sample][k]
  std::size_t inequality_checks = 0;
  std::size_t inequality_violations = 0;
  double worst_inequality_slack = 0;  // max of l([a,b]) - 2 l(a) l(b)
};

struct ThomTrace {
  std::vector<double> lengths;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst = -1e300;
};

/// Runs the almost-law recursion numerically on one pair, checking
/// l([a,b]) <= 2 l(a) l(b) + 1e-9 at every commutator.
inline ThomTrace thom_trace(const UnitaryMatrix& g, const UnitaryMatrix& h, int k_max, Norm norm) {
  ThomTrace t;
  auto bracket = [&](const UnitaryMatrix& a, const UnitaryMatrix& b) {
    UnitaryMatrix c = group_commutator(a, b);
    const double slack = length(c, norm).value - 2 * length(a, norm).value * length(b, norm).value;
    ++t.checks;
    if (slack > 1e-9) ++t.violations;
    t.worst = std::max(t.worst, slack);
    return c;
  };
  UnitaryMatrix w = bracket(g, h);
  t.lengths.push_back(length(w, norm).value);
  UnitaryMatrix g_pow = g;  // g^i for the current i
  for (int j = 1; j <= k_max; ++j) {
    if (j % 2 == 1) {
      if (j > 1) g_pow = g_pow * g;
      w = bracket(w, g_pow);
    } else {
      w = bracket(w, h * w * h.inverse());
    }
    w.reorthonormalize();
    t.lengths.push_back(length(w, norm).value);
  }
  return t;
}

inline DecayReport thom_decay(int dim, int k_max, int samples, std::uint64_t seed, Norm norm = Norm::Operator,
                              unsigned threads = 1, int cap = kDefaultThomCap) {
  if (k_max < 0 || k_max > cap) throw DomainError("thom_decay: k_max outside 0.." + std::to_string(cap));
  if (samples < 1) throw DomainError("thom_decay: samples must be positive");
  DecayReport r{dim, k_max, samples, seed, norm, {}, {}, 0, 0, -1e300};
  std::vector<ThomTrace> traces(static_cast<std::size_t>(samples));
  threads = std::max(1u, threads);
  auto worker = [&](unsigned t) {
    for (int s = static_cast<int>(t); s < samples; s += static_cast<int>(threads)) {
      std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
      const UnitaryMatrix g = haar_su(dim, rng);
      const UnitaryMatrix h = haar_su(dim, rng);
      traces[static_cast<std::size_t>(s)] = thom_trace(g, h, k_max, norm);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& t : traces) {
    r.lengths.push_back(t.lengths);
    r.inequality_checks += t.checks;
    r.inequality_violations += t.violations;
    r.worst_inequality_slack = std::max(r.worst_inequality_slack, t.worst);
  }
  for (int k = 0; k <= k_max; ++k) {
    std::vector<double> col;
    for (const auto& t : traces) col.push_back(t.lengths[static_cast<std::size_t>(k)]);
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size();
    const double median = m % 2 ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
    r.rows.push_back({k, col.front(), median, col.back()});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Stochastic word-equation solver

/// u * exp(A) for skew-Hermitian A.
inline UnitaryMatrix exp_tangent(const UnitaryMatrix& u, const CMatrix& skew) {
  // A = iH with H Hermitian: exp(A) = V diag(e^{i lambda}) V*.
  const CMatrix herm = Complex(0, -1) * skew;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (herm + herm.adjoint()));
  const Eigen::VectorXd lambda = es.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) phases(i) = std::polar(1.0, lambda(i));
  const CMatrix e = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return UnitaryMatrix(u.m_ * e);
}

/// Gaussian traceless skew-Hermitian direction.
inline CMatrix random_tangent(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix h(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = Complex(gauss(rng), 0);
    for (int j = i + 1; j < n; ++j) {
      h(i, j) = Complex(gauss(rng), gauss(rng)) / std::sqrt(2.0);
      h(j, i) = std::conj(h(i, j));
    }
  }
  h -= (h.trace() / static_cast<double>(n)) * CMatrix::Identity(n, n);
  return Complex(0, 1) * h;
}

struct SolverOptions {
  std::size_t budget = 200'000;  // word evaluations
  double tolerance = 1e-9;
  double initial_step = 0.5;
  double min_step = 1e-13;
  double grow = 1.6;
  double shrink = 0.85;
};

struct SolveResult {
  std::vector<UnitaryMatrix> tuple;
  double residual = 0;
  bool converged = false;
  std::size_t evaluations = 0;
  int restarts = 0;
};

/// Derivative-free search for w(tuple) = target: random restarts, each a
/// (1+1) random walk on SU(n)^d with exponential-map steps whose size grows
/// on success and decays geometrically on failure. The residual
/// ||w(tuple) - target||_F is reported as found.
inline SolveResult solve_word_equation(const Word& w, const UnitaryMatrix& target, std::uint64_t seed,
                                       const SolverOptions& opt = {}) {
  const int n = target.dim();
  const int d = w.rank();
  if (d == 0) {
    const double res = (CMatrix::Identity(n, n) - target.matrix()).norm();
    return {{}, res, res <= opt.tolerance, 1, 0};
  }
  std::mt19937_64 rng(seed);
  auto residual = [&](const std::vector<UnitaryMatrix>& t) { return (evaluate_word(w, t).matrix() - target.matrix()).norm(); };

  // A single letter is solved by assignment.
  if (w.length() == 1) {
    std::vector<UnitaryMatrix> t;
    for (int i = 0; i < d; ++i) t.push_back(haar_su(n, rng));
    const Letter l = w.letters()[0];
    t[static_cast<std::size_t>(l.generator - 1)] = l.sign > 0 ? target : target.inverse();
    const double res = residual(t);
    return {t, res, res <= opt.tolerance, 1, 0};
  }

  SolveResult best;
  best.residual = 1e300;
  std::size_t evals = 0;
  int restarts = 0;
  while (evals < opt.budget) {
    std::vector<UnitaryMatrix> cur;
    for (int i = 0; i < d; ++i) cur.push_back(haar_su(n, rng));
    double f = residual(cur);
    ++evals;
    double step = opt.initial_step;
    int accepted = 0;
    while (evals < opt.budget && step > opt.min_step && f > opt.tolerance) {
      std::vector<UnitaryMatrix> trial = cur;
      for (auto& u : trial) u = exp_tangent(u, step * random_tangent(n, rng));
      const double ft = residual(trial);
      ++evals;
      if (ft < f) {
        cur = std::move(trial);
        f = ft;
        step = std::min(step * opt.grow, 1.0);
        if (++accepted % kReorthonormalizeEvery == 0)
          for (auto& u : cur) u.reorthonormalize();
      } else {
        step *= opt.shrink;
      }
    }
    if (f < best.residual) {
      best.tuple = cur;
      best.residual = f;
    }
    if (best.residual <= opt.tolerance) break;
    ++restarts;
  }
  best.converged = best.residual <= opt.tolerance;
  best.evaluations = evals;
  best.restarts = restarts;
  return best;
}

// ---------------------------------------------------------------------------
// Normalized rank metric

inline int numeric_rank(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const double threshold = 1e-8 * static_cast<double>(m.rows());
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > threshold) ++r;
  return r;
}

/// rank(g - h) / n.
inline double rank_distance(const UnitaryMatrix& g, const UnitaryMatrix& h) {
  return static_cast<double>(numeric_rank(g.matrix() - h.matrix())) / static_cast<double>(g.dim());
}

struct DensityReport {
  int dim = 2;
  double epsilon = 1;
  int samples = 0;
  int targets = 0;
  std::uint64_t seed = 0;
  double covered_fraction = 0;
};

/// Fraction of Haar targets within `epsilon` (rank metric) of at least one
/// of `samples` values of w on Haar tuples.
inline DensityReport rank_metric_density(int n, const Word& w, double epsilon, int samples, int targets,
                                         std::uint64_t seed) {
  if (!(epsilon > 0 && epsilon <= 1)) throw DomainError("epsilon must lie in (0, 1]");
  if (samples < 1 || targets < 1) throw DomainError("samples and targets must be positive");
  std::vector<UnitaryMatrix> values;
  for (int s = 0; s < samples; ++s) {
    std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
    std::vector<UnitaryMatrix> tuple;
    for (int i = 0; i < std::max(1, w.rank()); ++i) tuple.push_back(haar_su(n, rng));
    if (w.rank() == 0) tuple.clear();
    values.push_back(w.rank() == 0 ? UnitaryMatrix::identity(n) : evaluate_word(w, tuple));
  }
  int covered = 0;
  for (int t = 0; t < targets; ++t) {
    std::mt19937_64 rng(stream_seed(~seed, static_cast<std::uint64_t>(t)));
    const UnitaryMatrix target = haar_su(n, rng);
    for (const auto& v : values) {
      if (rank_distance(target, v) <= epsilon) {
        ++covered;
        break;
      }
    }
  }
  return {n, epsilon, samples, targets, seed, static_cast<double>(covered) / targets};
}

// ---------------------------------------------------------------------------
// Roots in SL2(R) and SL2(C)

inline constexpr double kTraceKnifeEdge = 1e-9;
inline constexpr double kWitnessTolerance = 1e-8;

using RealMat2 = Eigen::Matrix2d;
using ComplexMat2 = Eigen::Matrix2cd;

template <class M>
void check_det_one(const M& g) {
  if (std::abs(g.determinant() - typename M::Scalar(1)) >= 1e-9) throw DomainError("matrix does not have determinant 1");
}

template <class M>
struct RootResult {
  bool exists = false;
  std::optional<M> witness;
  double residual = 0;  // ||witness^n - g||_F
};

/// h^2 = g in SL2(R) exists iff tr g > -2 or g = -I. For tr g > -2 the
/// witness is (g + I) / sqrt(tr g + 2), by Cayley-Hamilton.
inline RootResult<RealMat2> sqrt_exists_sl2r(const RealMat2& g) {
  check_det_one(g);
  const double tr = g.trace();
  RootResult<RealMat2> r;
  const RealMat2 id = RealMat2::Identity();
  if (tr + 2 > kTraceKnifeEdge) {
    r.witness = (g + id) / std::sqrt(tr + 2);
  } else if (std::abs(tr + 2) <= kTraceKnifeEdge && (g + id).norm() <= kTraceKnifeEdge) {
    RealMat2 rot;
    rot << 0, -1, 1, 0;
    r.witness = rot;
  } else {
    return r;
  }
  r.exists = true;
  r.residual = ((*r.witness) * (*r.witness) - g).norm();
  if (r.residual >= kWitnessTolerance) throw std::logic_error("square-root witness failed verification");
  return r;
}

inline ComplexMat2 matrix_power(const ComplexMat2& h, int n) {
  ComplexMat2 acc = ComplexMat2::Identity();
  for (int i = 0; i < n; ++i) acc = acc * h;
  return acc;
}

/// h^n = g in SL2(C). Diagonalizable g always has a root (take an n-th root
/// mu of one eigenvalue and mu^-1 for the other). A non-diagonalizable g
/// has eigenvalue lambda = +-1; a root must have eigenvalue mu = +-1 with
/// mu^n = lambda, impossible exactly when lambda = -1 and n is even.
inline RootResult<ComplexMat2> root_sl2c(const ComplexMat2& g, int n) {
  if (n < 2) throw DomainError("root degree must be >= 2");
  check_det_one(g);
  RootResult<ComplexMat2> r;
  const ComplexMat2 id = ComplexMat2::Identity();
  const Complex tr = g.trace();
  const double pi = std::acos(-1.0);

  auto finish = [&](const ComplexMat2& h) {
    r.exists = true;
    r.witness = h;
    r.residual = (matrix_power(h, n) - g).norm();
    if (r.residual >= kWitnessTolerance) throw std::logic_error("root witness failed verification");
    return r;
  };

  for (int sign : {1, -1}) {
    if (std::abs(tr - Complex(2.0 * sign, 0)) > kTraceKnifeEdge) continue;
    const Complex lambda(sign, 0);
    const ComplexMat2 nil = g / lambda - id;  // nilpotent part
    if (nil.norm() <= kTraceKnifeEdge) {
      if (sign == 1) return finish(id);
      // -I: diag(mu, mu^-1) with mu = e^{i pi / n}.
      const Complex mu = std::polar(1.0, pi / n);
      ComplexMat2 h;
      h << mu, 0, 0, 1.0 / mu;
      return finish(h);
    }
    if (sign == -1 && n % 2 == 0) return r;
    // (mu (I + N/n))^n = mu^n (I + N) with mu = sign, n odd when sign = -1.
    const double mu = (sign == -1) ? -1.0 : 1.0;
    return finish(mu * (id + nil / static_cast<double>(n)));
  }

  // Distinct eigenvalues lambda, 1/lambda.
  const Complex disc = std::sqrt(tr * tr - 4.0);
  const Complex l1 = (tr + disc) / 2.0;
  const Complex l2 = (tr - disc) / 2.0;
  auto eigvec = [&](Complex l) {
    Eigen::Vector2cd v;
    if (std::abs(g(0, 1)) >= std::abs(g(1, 0)) && std::abs(g(0, 1)) > 0) v << g(0, 1), l - g(0, 0);
    else if (std::abs(g(1, 0)) > 0) v << l - g(1, 1), g(1, 0);
    else if (std::abs(l - g(0, 0)) < std::abs(l - g(1, 1))) v << 1, 0;
    else v << 0, 1;
    return v;
  };
  ComplexMat2 P;
  P.col(0) = eigvec(l1);
  P.col(1) = eigvec(l2);
  const Complex mu = std::pow(l1, 1.0 / n);
  ComplexMat2 D;
  D << mu, 0, 0, 1.0 / mu;
  return finish(P * D * P.inverse());
}

}  // namespace wordmap
