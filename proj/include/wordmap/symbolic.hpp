#pragma once

// Exact sparse multivariate Laurent polynomials over Q, 2x2 matrices over
// them, the SL2 trace polynomial of a word and the Magnus-embedding test for
// membership in the second derived subgroup of F_d.

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wordmap/errors.hpp"
#include "wordmap/words.hpp"

namespace wordmap {

using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const Rational& q) { return q.str(); }

/// Parses "3", "-7/2".
inline Rational parse_rational(const std::string& text) {
  try {
    return Rational(text);
  } catch (const std::exception&) {
    throw DomainError("malformed rational '" + text + "'");
  }
}

inline constexpr std::size_t kDefaultTermCap = 1'000'000;

/// Ordered variables; invertible ones may carry negative exponents.
struct VariableSet {
  std::vector<std::string> names;
  std::vector<bool> invertible;

  std::size_t size() const { return names.size(); }
  friend bool operator==(const VariableSet&, const VariableSet&) = default;
};

using VariableSetPtr = std::shared_ptr<const VariableSet>;

inline VariableSetPtr make_variables(std::vector<std::string> names, std::vector<bool> invertible = {}) {
  if (invertible.empty()) invertible.assign(names.size(), false);
  if (invertible.size() != names.size()) throw DomainError("variable flags do not match names");
  return std::make_shared<const VariableSet>(VariableSet{std::move(names), std::move(invertible)});
}

using Exponents = std::vector<int>;

/// Graded lexicographic, largest first.
struct GradedLexGreater {
  bool operator()(const Exponents& a, const Exponents& b) const {
    long da = 0, db = 0;
    for (int e : a) da += e;
    for (int e : b) db += e;
    if (da != db) return da > db;
    return a > b;
  }
};

class LaurentPolynomial {
 public:
  using TermMap = std::map<Exponents, Rational, GradedLexGreater>;

  explicit LaurentPolynomial(VariableSetPtr vars) : vars_(std::move(vars)) {
    if (!vars_) throw DomainError("polynomial needs a variable set");
  }

  static LaurentPolynomial constant(VariableSetPtr vars, const Rational& c) {
    LaurentPolynomial p(std::move(vars));
    p.add_term(Exponents(p.vars_->size(), 0), c);
    return p;
  }

  /// vars[index]^exponent.
  static LaurentPolynomial variable(VariableSetPtr vars, std::size_t index, int exponent = 1) {
    LaurentPolynomial p(std::move(vars));
    if (index >= p.vars_->size()) throw DomainError("variable index out of range");
    Exponents e(p.vars_->size(), 0);
    e[index] = exponent;
    p.add_term(e, Rational(1));
    return p;
  }

  const VariableSetPtr& variables() const noexcept { return vars_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && is_constant_exponent(terms_.begin()->first));
  }

  Rational coefficient(const Exponents& e) const {
    const auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Rational constant_term() const { return coefficient(Exponents(vars_->size(), 0)); }

  /// Adds c * monomial(e); drops the term if it cancels.
  void add_term(const Exponents& e, const Rational& c) {
    if (e.size() != vars_->size()) throw DomainError("exponent vector has wrong length");
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] < 0 && !vars_->invertible[i])
        throw DomainError("negative exponent on non-invertible variable " + vars_->names[i]);
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  LaurentPolynomial operator-() const {
    LaurentPolynomial r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }

  LaurentPolynomial& operator+=(const LaurentPolynomial& o) {
    check_compatible(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  LaurentPolynomial& operator-=(const LaurentPolynomial& o) {
    check_compatible(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }

  friend LaurentPolynomial operator+(LaurentPolynomial a, const LaurentPolynomial& b) { return a += b; }
  friend LaurentPolynomial operator-(LaurentPolynomial a, const LaurentPolynomial& b) { return a -= b; }

  static LaurentPolynomial multiply(const LaurentPolynomial& a, const LaurentPolynomial& b,
                                    std::size_t term_cap = kDefaultTermCap) {
    a.check_compatible(b);
    LaurentPolynomial r(a.vars_);
    Exponents e(a.vars_->size());
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        auto [it, inserted] = r.terms_.try_emplace(e, Rational(ca * cb));
        if (!inserted) {
          it->second += ca * cb;
          if (it->second == 0) r.terms_.erase(it);
        }
        if (r.terms_.size() > term_cap)
          throw DomainError("polynomial exceeds term cap " + std::to_string(term_cap));
      }
    }
    return r;
  }

  friend LaurentPolynomial operator*(const LaurentPolynomial& a, const LaurentPolynomial& b) {
    return multiply(a, b);
  }

  friend LaurentPolynomial operator*(const Rational& s, LaurentPolynomial p) {
    if (s == 0) return LaurentPolynomial(p.vars_);
    for (auto& [e, c] : p.terms_) c *= s;
    return p;
  }

  friend bool operator==(const LaurentPolynomial& a, const LaurentPolynomial& b) {
    return *a.vars_ == *b.vars_ && a.terms_ == b.terms_;
  }

  /// Value at a rational point (one coordinate per variable).
  Rational evaluate(std::span<const Rational> point) const {
    if (point.size() != vars_->size()) throw DomainError("evaluation point has wrong dimension");
    Rational total = 0;
    for (const auto& [e, c] : terms_) {
      Rational term = c;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (e[i] < 0 && point[i] == 0) throw DomainError("evaluating a negative power at zero");
        Rational base = e[i] > 0 ? point[i] : Rational(1) / point[i];
        for (int k = 0; k < std::abs(e[i]); ++k) term *= base;
      }
      total += term;
    }
    return total;
  }

  /// Canonical graded-lex rendering, e.g. "x*y + 2", "t1^-1*s2 - 1/2".
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      const bool negative = c < 0;
      const Rational mag = negative ? Rational(-c) : c;
      std::string mono;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!mono.empty()) mono += '*';
        mono += vars_->names[i];
        if (e[i] != 1) mono += "^" + std::to_string(e[i]);
      }
      std::string body;
      if (mono.empty()) body = mag.str();
      else if (mag == 1) body = mono;
      else body = mag.str() + "*" + mono;
      if (first) out += negative ? "-" + body : body;
      else out += (negative ? " - " : " + ") + body;
      first = false;
    }
    return out;
  }

 private:
  static bool is_constant_exponent(const Exponents& e) {
    for (int v : e)
      if (v != 0) return false;
    return true;
  }
  void check_compatible(const LaurentPolynomial& o) const {
    if (vars_ != o.vars_ && !(*vars_ == *o.vars_)) throw DomainError("polynomials over different variable sets");
  }

  VariableSetPtr vars_;
  TermMap terms_;
};

// ---------------------------------------------------------------------------

/// 2x2 matrix over Q.
struct RationalMatrix2 {
  std::array<Rational, 4> e{1, 0, 0, 1};  // row-major

  static RationalMatrix2 identity() { return {}; }
  static RationalMatrix2 of(Rational a, Rational b, Rational c, Rational d) { return {{a, b, c, d}}; }

  Rational det() const { return e[0] * e[3] - e[1] * e[2]; }
  Rational trace() const { return e[0] + e[3]; }

  RationalMatrix2 inverse() const {
    const Rational d = det();
    if (d == 0) throw DomainError("singular rational matrix");
    return of(e[3] / d, -e[1] / d, -e[2] / d, e[0] / d);
  }

  friend RationalMatrix2 operator*(const RationalMatrix2& a, const RationalMatrix2& b) {
    return of(a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
              a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]);
  }
  friend bool operator==(const RationalMatrix2&, const RationalMatrix2&) = default;
};

/// 2x2 matrix over a Laurent polynomial ring with a cached determinant.
class PolyMatrix2 {
 public:
  PolyMatrix2(LaurentPolynomial a, LaurentPolynomial b, LaurentPolynomial c, LaurentPolynomial d)
      : e_{std::move(a), std::move(b), std::move(c), std::move(d)}, det_(compute_det()) {}

  static PolyMatrix2 identity(const VariableSetPtr& v) {
    return with_det(LaurentPolynomial::constant(v, 1), LaurentPolynomial(v), LaurentPolynomial(v),
                    LaurentPolynomial::constant(v, 1), LaurentPolynomial::constant(v, 1));
  }

  static PolyMatrix2 from_rational(const VariableSetPtr& v, const RationalMatrix2& m) {
    return {LaurentPolynomial::constant(v, m.e[0]), LaurentPolynomial::constant(v, m.e[1]),
            LaurentPolynomial::constant(v, m.e[2]), LaurentPolynomial::constant(v, m.e[3])};
  }

  const LaurentPolynomial& operator()(int row, int col) const { return e_[static_cast<std::size_t>(row * 2 + col)]; }
  const LaurentPolynomial& determinant() const noexcept { return det_; }
  LaurentPolynomial recompute_determinant() const { return compute_det(); }
  LaurentPolynomial trace() const { return e_[0] + e_[3]; }
  const VariableSetPtr& variables() const { return e_[0].variables(); }

  bool is_unimodular() const { return det_ == LaurentPolynomial::constant(variables(), 1); }
  bool is_upper_triangular() const { return e_[2].is_zero(); }
  bool is_identity() const { return *this == identity(variables()); }

  /// Adjugate; only defined for determinant 1.
  PolyMatrix2 inverse() const {
    if (!is_unimodular()) throw DomainError("inverse requires a determinant-1 matrix");
    return with_det(e_[3], -e_[1], -e_[2], e_[0], det_);
  }

  friend PolyMatrix2 operator*(const PolyMatrix2& a, const PolyMatrix2& b) {
    return with_det(a.e_[0] * b.e_[0] + a.e_[1] * b.e_[2], a.e_[0] * b.e_[1] + a.e_[1] * b.e_[3],
                    a.e_[2] * b.e_[0] + a.e_[3] * b.e_[2], a.e_[2] * b.e_[1] + a.e_[3] * b.e_[3],
                    a.det_ * b.det_);
  }

  friend bool operator==(const PolyMatrix2& a, const PolyMatrix2& b) { return a.e_ == b.e_; }

 private:
  static PolyMatrix2 with_det(LaurentPolynomial a, LaurentPolynomial b, LaurentPolynomial c, LaurentPolynomial d,
                              LaurentPolynomial det) {
    PolyMatrix2 m(std::move(a), std::move(b), std::move(c), std::move(d), std::move(det));
    return m;
  }
  PolyMatrix2(LaurentPolynomial a, LaurentPolynomial b, LaurentPolynomial c, LaurentPolynomial d,
              LaurentPolynomial det)
      : e_{std::move(a), std::move(b), std::move(c), std::move(d)}, det_(std::move(det)) {}

  LaurentPolynomial compute_det() const { return e_[0] * e_[3] - e_[1] * e_[2]; }

  std::array<LaurentPolynomial, 4> e_;
  LaurentPolynomial det_;
};

// ---------------------------------------------------------------------------
// Trace polynomial

struct TracePolynomial {
  LaurentPolynomial phi;
  Rational phi_at_origin;
  bool nonconstant = false;
  bool identity_at_origin = false;  // w(1, g2, ..., gd) = 1
};

/// The generic element [[1, y], [x, 1 + xy]] of SL2.
inline PolyMatrix2 generic_sl2_element(const VariableSetPtr& xy) {
  const auto one = LaurentPolynomial::constant(xy, 1);
  const auto x = LaurentPolynomial::variable(xy, 0);
  const auto y = LaurentPolynomial::variable(xy, 1);
  return {one, y, x, one + x * y};
}

inline RationalMatrix2 evaluate_rational(const Word& w, std::span<const RationalMatrix2> values) {
  if (values.size() != static_cast<std::size_t>(w.rank())) throw DomainError("evaluate: rank mismatch");
  std::vector<RationalMatrix2> inv;
  for (const auto& m : values) inv.push_back(m.inverse());
  RationalMatrix2 acc;
  for (Letter l : w.letters()) {
    const auto i = static_cast<std::size_t>(l.generator - 1);
    acc = acc * (l.sign > 0 ? values[i] : inv[i]);
  }
  return acc;
}

/// tr w(g1, g2, ..., gd) with g1 generic and g2.. the given constants.
/// Whenever w(1, g2, ..., gd) = 1, phi(0, 0) = 2 is enforced.
inline TracePolynomial trace_polynomial(const Word& w, std::span<const RationalMatrix2> constants) {
  if (static_cast<std::size_t>(w.rank()) != constants.size() + 1)
    throw DomainError("trace_polynomial: word rank " + std::to_string(w.rank()) + " needs " +
                      std::to_string(w.rank() - 1) + " constants, got " + std::to_string(constants.size()));
  for (const auto& c : constants)
    if (c.det() != 1) throw DomainError("trace_polynomial: constant matrices must have determinant 1");

  const auto xy = make_variables({"x", "y"});
  std::vector<PolyMatrix2> fwd{generic_sl2_element(xy)};
  for (const auto& c : constants) fwd.push_back(PolyMatrix2::from_rational(xy, c));
  std::vector<PolyMatrix2> inv;
  for (const auto& m : fwd) inv.push_back(m.inverse());

  PolyMatrix2 acc = PolyMatrix2::identity(xy);
  for (Letter l : w.letters()) {
    const auto i = static_cast<std::size_t>(l.generator - 1);
    acc = acc * (l.sign > 0 ? fwd[i] : inv[i]);
  }

  TracePolynomial r{acc.trace(), 0, false, false};
  const std::array<Rational, 2> origin{0, 0};
  r.phi_at_origin = r.phi.evaluate(origin);
  r.nonconstant = !r.phi.is_constant();

  std::vector<RationalMatrix2> at_origin{RationalMatrix2::identity()};
  at_origin.insert(at_origin.end(), constants.begin(), constants.end());
  r.identity_at_origin = evaluate_rational(w, at_origin) == RationalMatrix2::identity();
  if (r.identity_at_origin && r.phi_at_origin != 2)
    throw std::logic_error("trace polynomial violates phi(0,0) = 2");
  return r;
}

// ---------------------------------------------------------------------------
// Magnus embedding F_d / F_d'' -> B(Z[t^{+-1}, s])

inline constexpr int kDefaultMagnusRankCap = 4;

/// Variables t1..td (invertible) followed by s1..sd.
inline VariableSetPtr magnus_variables(int d) {
  std::vector<std::string> names;
  std::vector<bool> inv;
  for (int i = 1; i <= d; ++i) {
    names.push_back("t" + std::to_string(i));
    inv.push_back(true);
  }
  for (int i = 1; i <= d; ++i) {
    names.push_back("s" + std::to_string(i));
    inv.push_back(false);
  }
  return make_variables(std::move(names), std::move(inv));
}

/// x_i -> [[t_i, s_i], [0, t_i^-1]], extended multiplicatively.
inline PolyMatrix2 magnus_evaluate(const Word& w, int rank_cap = kDefaultMagnusRankCap) {
  const int d = std::max(1, w.rank());
  if (d > rank_cap) throw DomainError("magnus_evaluate: rank " + std::to_string(d) + " exceeds cap " + std::to_string(rank_cap));
  const auto vars = magnus_variables(d);
  auto t = [&](int i, int e) { return LaurentPolynomial::variable(vars, static_cast<std::size_t>(i - 1), e); };
  auto s = [&](int i) { return LaurentPolynomial::variable(vars, static_cast<std::size_t>(d + i - 1)); };
  const LaurentPolynomial zero(vars);

  PolyMatrix2 acc = PolyMatrix2::identity(vars);
  for (Letter l : w.letters()) {
    const int i = l.generator;
    const PolyMatrix2 m = l.sign > 0 ? PolyMatrix2(t(i, 1), s(i), zero, t(i, -1))
                                     : PolyMatrix2(t(i, -1), -s(i), zero, t(i, 1));
    acc = acc * m;
  }
  return acc;
}

enum class DerivedClass { NotInDerived, InDerivedNotSecond, InSecondDerived };

inline std::string to_string(DerivedClass c) {
  switch (c) {
    case DerivedClass::NotInDerived: return "NotInDerived";
    case DerivedClass::InDerivedNotSecond: return "InDerivedNotSecond";
    case DerivedClass::InSecondDerived: return "InSecondDerived";
  }
  return "?";
}

inline DerivedClass derived_class(const Word& w, int rank_cap = kDefaultMagnusRankCap) {
  for (long long e : exponent_sums(w))
    if (e != 0) return DerivedClass::NotInDerived;
  return magnus_evaluate(w, rank_cap).is_identity() ? DerivedClass::InSecondDerived : DerivedClass::InDerivedNotSecond;
}

struct UnipotentCertificate {
  bool available = false;
  std::string rationale;
};

/// For w outside F'' and any characteristic-zero field L, Im w on SL2(L)
/// contains a non-trivial unipotent.
inline UnipotentCertificate unipotent_certificate(const Word& w, int rank_cap = kDefaultMagnusRankCap) {
  switch (derived_class(w, rank_cap)) {
    case DerivedClass::NotInDerived:
      return {true, "w is not in [F,F] (nonzero exponent sum); restricting to the unipotent subgroup gives a nontrivial unipotent value"};
    case DerivedClass::InDerivedNotSecond:
      return {true, "w lies in F' but not F'' (Magnus image is not the identity); the word map onto the unipotent radical of B is surjective"};
    case DerivedClass::InSecondDerived:
      return {false, "w lies in F'' (Magnus image is the identity); no certificate, which is not a disproof"};
  }
  return {};
}

}  // namespace wordmap
