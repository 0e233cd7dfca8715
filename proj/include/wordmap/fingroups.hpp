#pragma once

// Fully enumerated finite groups: SL/PSL/GL(n, p) over prime fields and
// permutation groups given by generators. Elements are stored in a flat
// table of 16-bit codes (matrix entries row-major, or permutation images,
// 0-based) and addressed by dense indices assigned in BFS order.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "wordmap/errors.hpp"
#include "wordmap/words.hpp"

namespace wordmap {

using ElementIndex = std::int32_t;
using Code = std::uint16_t;

// ---------------------------------------------------------------------------
// Prime fields

inline bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

class PrimeField {
 public:
  explicit PrimeField(int p) : p_(p) {
    if (!is_prime(p)) throw DomainError(std::to_string(p) + " is not prime");
    if (p > 65521) throw DomainError("prime too large for 16-bit element codes");
  }
  int modulus() const noexcept { return p_; }
  int add(int a, int b) const { return (a + b) % p_; }
  int sub(int a, int b) const { return (a - b + p_) % p_; }
  int mul(int a, int b) const { return static_cast<int>(static_cast<long long>(a) * b % p_); }
  int neg(int a) const { return a == 0 ? 0 : p_ - a; }
  int pow(int a, long long e) const {
    long long r = 1, b = a % p_;
    while (e > 0) {
      if (e & 1) r = r * b % p_;
      b = b * b % p_;
      e >>= 1;
    }
    return static_cast<int>(r);
  }
  int inv(int a) const {
    if (a % p_ == 0) throw DomainError("division by zero in prime field");
    return pow(a, p_ - 2);
  }
  int primitive_root() const {
    std::vector<int> factors;
    int m = p_ - 1;
    for (int d = 2; d * d <= m; ++d) {
      if (m % d == 0) {
        factors.push_back(d);
        while (m % d == 0) m /= d;
      }
    }
    if (m > 1) factors.push_back(m);
    for (int g = 1; g < p_; ++g) {
      bool ok = true;
      for (int q : factors) ok = ok && pow(g, (p_ - 1) / q) != 1;
      if (ok) return g;
    }
    return 1;
  }

 private:
  int p_;
};

// ---------------------------------------------------------------------------
// Group specifications

enum class GroupKind { SL, PSL, GL, Perm };

inline std::string to_string(GroupKind k) {
  switch (k) {
    case GroupKind::SL: return "SL";
    case GroupKind::PSL: return "PSL";
    case GroupKind::GL: return "GL";
    case GroupKind::Perm: return "perm";
  }
  return "?";
}

inline GroupKind group_kind_from_string(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "sl") return GroupKind::SL;
  if (lower == "psl") return GroupKind::PSL;
  if (lower == "gl") return GroupKind::GL;
  if (lower == "perm") return GroupKind::Perm;
  throw DomainError("unknown group kind '" + std::string(s) + "'");
}

struct GroupSpec {
  GroupKind kind = GroupKind::SL;
  int n = 2;
  int p = 2;
  int degree = 0;                       // perm only; 0 = infer from cycles
  std::vector<std::string> generators;  // perm only, cycle notation

  static GroupSpec matrix(GroupKind kind, int n, int p) { return {kind, n, p, 0, {}}; }
  static GroupSpec permutation(std::vector<std::string> gens, int degree = 0) {
    return {GroupKind::Perm, 0, 0, degree, std::move(gens)};
  }
  bool is_matrix() const { return kind != GroupKind::Perm; }

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

/// "SL(2,5)", "PSL(2,7)", "Perm(11)".
inline std::string describe(const GroupSpec& s) {
  if (s.is_matrix()) return to_string(s.kind) + "(" + std::to_string(s.n) + "," + std::to_string(s.p) + ")";
  return "Perm(" + std::to_string(s.degree) + ")";
}

/// Shorthand "sl2:5", "psl2:7", "gl3:2".
inline GroupSpec parse_group_shorthand(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw DomainError("group shorthand must look like psl2:7");
  std::string_view head = text.substr(0, colon);
  std::size_t i = 0;
  while (i < head.size() && std::isalpha(static_cast<unsigned char>(head[i]))) ++i;
  const GroupKind kind = group_kind_from_string(head.substr(0, i));
  if (kind == GroupKind::Perm) throw DomainError("permutation groups need a JSON spec file");
  try {
    const int n = std::stoi(std::string(head.substr(i)));
    const int p = std::stoi(std::string(text.substr(colon + 1)));
    return GroupSpec::matrix(kind, n, p);
  } catch (const std::logic_error&) {
    throw DomainError("malformed group shorthand '" + std::string(text) + "'");
  }
}

inline long long ipow(long long b, int e) {
  long long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// Classical order formula for SL/PSL/GL(n, p).
inline long long classical_order(GroupKind kind, int n, int p) {
  long long sl = ipow(p, n * (n - 1) / 2);
  for (int i = 2; i <= n; ++i) sl *= ipow(p, i) - 1;
  switch (kind) {
    case GroupKind::SL: return sl;
    case GroupKind::GL: return sl * (p - 1);
    case GroupKind::PSL: return sl / std::gcd(n, p - 1);
    default: throw DomainError("no order formula for permutation groups");
  }
}

/// Parses "(1 2 3)(4 5)" into 0-based images on `degree` points. Commas
/// between points are accepted.
inline std::vector<Code> parse_cycles(std::string_view text, int degree) {
  std::vector<Code> img(static_cast<std::size_t>(degree));
  std::iota(img.begin(), img.end(), Code{0});
  std::vector<bool> seen(static_cast<std::size_t>(degree), false);
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ','))
      ++pos;
  };
  skip();
  while (pos < text.size()) {
    if (text[pos] != '(') throw ParseError("expected '(' in cycle notation", pos);
    ++pos;
    std::vector<int> cycle;
    skip();
    while (pos < text.size() && text[pos] != ')') {
      if (!std::isdigit(static_cast<unsigned char>(text[pos]))) throw ParseError("expected point", pos);
      const std::size_t start = pos;
      long long v = 0;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        v = v * 10 + (text[pos] - '0');
        if (v > 65535) throw ParseError("point too large", start);
        ++pos;
      }
      if (v < 1 || v > degree) throw ParseError("point " + std::to_string(v) + " outside 1.." + std::to_string(degree), start);
      if (seen[static_cast<std::size_t>(v - 1)]) throw ParseError("point " + std::to_string(v) + " repeated", start);
      seen[static_cast<std::size_t>(v - 1)] = true;
      cycle.push_back(static_cast<int>(v - 1));
      skip();
    }
    if (pos >= text.size()) throw ParseError("unterminated cycle", pos);
    ++pos;
    for (std::size_t i = 0; i < cycle.size(); ++i)
      img[static_cast<std::size_t>(cycle[i])] = static_cast<Code>(cycle[(i + 1) % cycle.size()]);
    skip();
  }
  return img;
}

/// Largest point mentioned in a list of cycle strings.
inline int max_point(const std::vector<std::string>& cycles) {
  int m = 0;
  for (const auto& s : cycles) {
    long long v = -1;
    for (char c : s) {
      if (std::isdigit(static_cast<unsigned char>(c))) {
        v = (v < 0 ? 0 : v * 10) + (c - '0');
        if (v > 65535) throw DomainError("point too large in '" + s + "'");
      } else {
        if (v > m) m = static_cast<int>(v);
        v = -1;
      }
    }
    if (v > m) m = static_cast<int>(v);
  }
  return m;
}

// ---------------------------------------------------------------------------

struct ConjugacyClass {
  int id = 0;
  ElementIndex representative = 0;  // smallest element index in the class
  std::size_t size = 0;
  int element_order = 1;
  int inverse_class = 0;  // class containing rep^-1
  std::vector<ElementIndex> members;  // ascending
};

struct BuildOptions {
  std::size_t order_cap = 100'000;
  std::size_t cayley_threshold = 4096;
};

/// FNV-1a over a stride and an element table.
inline std::uint64_t hash_element_table(std::size_t stride, std::span<const Code> elements) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (static_cast<std::uint64_t>(stride) >> (8 * i)) & 0xff;
    h *= 1099511628211ULL;
  }
  for (Code c : elements) {
    h ^= c & 0xff;
    h *= 1099511628211ULL;
    h ^= c >> 8;
    h *= 1099511628211ULL;
  }
  return h;
}

class FiniteGroup;
FiniteGroup build_group(const GroupSpec& spec, const BuildOptions& options);

namespace detail {

/// Open-addressed index from element codes to element indices.
class CodeIndex {
 public:
  void reset(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected + 16) cap <<= 1;
    slots_.assign(cap, -1);
    mask_ = cap - 1;
  }

  static std::uint64_t hash(std::span<const Code> c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (Code v : c) {
      h ^= v;
      h *= 1099511628211ULL;
    }
    return h ^ (h >> 29);
  }

  ElementIndex find(std::span<const Code> key, const std::vector<Code>& table, std::size_t stride) const {
    std::size_t s = hash(key) & mask_;
    while (true) {
      const ElementIndex e = slots_[s];
      if (e < 0) return -1;
      if (std::equal(key.begin(), key.end(), table.begin() + static_cast<std::ptrdiff_t>(e * stride))) return e;
      s = (s + 1) & mask_;
    }
  }

  /// Caller guarantees the key is absent and load stays below 1/2.
  void insert(std::span<const Code> key, ElementIndex e) {
    std::size_t s = hash(key) & mask_;
    while (slots_[s] >= 0) s = (s + 1) & mask_;
    slots_[s] = e;
  }

  std::size_t capacity() const { return slots_.size(); }

 private:
  std::vector<ElementIndex> slots_;
  std::size_t mask_ = 0;
};

}  // namespace detail

/// Immutable after construction; safe to share across threads.
class FiniteGroup {
 public:
  const GroupSpec& spec() const noexcept { return spec_; }
  std::string name() const { return describe(spec_); }
  std::size_t order() const noexcept { return inverse_.size(); }
  std::size_t stride() const noexcept { return stride_; }
  ElementIndex identity() const noexcept { return 0; }
  ElementIndex inverse(ElementIndex g) const { return inverse_[static_cast<std::size_t>(g)]; }
  int element_order(ElementIndex g) const { return order_[static_cast<std::size_t>(g)]; }
  int class_of(ElementIndex g) const { return class_of_[static_cast<std::size_t>(g)]; }
  const std::vector<ConjugacyClass>& classes() const noexcept { return classes_; }
  const std::vector<ElementIndex>& generators() const noexcept { return generators_; }
  bool has_cayley_table() const noexcept { return !cayley_.empty(); }
  const std::vector<Code>& element_table() const noexcept { return elements_; }

  std::span<const Code> element(ElementIndex g) const {
    return {elements_.data() + static_cast<std::size_t>(g) * stride_, stride_};
  }

  /// Index of a (canonicalized) code, or -1.
  ElementIndex find(std::span<const Code> code) const { return index_.find(code, elements_, stride_); }

  ElementIndex multiply(ElementIndex a, ElementIndex b) const {
    if (!cayley_.empty()) return cayley_[static_cast<std::size_t>(a) * order() + static_cast<std::size_t>(b)];
    std::vector<Code> out(stride_);
    raw_multiply(element(a), element(b), out);
    canonicalize(out);
    return lookup(out);
  }

  ElementIndex conjugate(ElementIndex g, ElementIndex by) const {
    return multiply(multiply(by, g), inverse(by));
  }

  std::vector<ElementIndex> center() const {
    std::vector<ElementIndex> z;
    for (const auto& c : classes_)
      if (c.size == 1) z.push_back(c.representative);
    std::sort(z.begin(), z.end());
    return z;
  }

  /// Left-to-right product of the letters of w with generator i -> tuple[i-1].
  ElementIndex evaluate(const Word& w, std::span<const ElementIndex> tuple) const {
    if (tuple.size() != static_cast<std::size_t>(w.rank()))
      throw DomainError("evaluate: tuple length " + std::to_string(tuple.size()) + " does not match word rank " +
                        std::to_string(w.rank()));
    for (ElementIndex t : tuple)
      if (t < 0 || static_cast<std::size_t>(t) >= order()) throw DomainError("evaluate: element index out of range");
    std::vector<Code> a(stride_), b(stride_);
    return evaluate_unchecked(w.letters(), tuple, a, b);
  }

  /// Hot-path evaluation; `scratch_a`/`scratch_b` must have stride() entries.
  ElementIndex evaluate_unchecked(std::span<const Letter> letters, std::span<const ElementIndex> tuple,
                                  std::vector<Code>& scratch_a, std::vector<Code>& scratch_b) const {
    auto value = [&](Letter l) {
      const ElementIndex g = tuple[static_cast<std::size_t>(l.generator - 1)];
      return l.sign > 0 ? g : inverse_[static_cast<std::size_t>(g)];
    };
    if (letters.empty()) return identity();
    if (!cayley_.empty()) {
      ElementIndex acc = value(letters[0]);
      const std::size_t n = order();
      for (std::size_t i = 1; i < letters.size(); ++i)
        acc = cayley_[static_cast<std::size_t>(acc) * n + static_cast<std::size_t>(value(letters[i]))];
      return acc;
    }
    auto first = element(value(letters[0]));
    std::copy(first.begin(), first.end(), scratch_a.begin());
    for (std::size_t i = 1; i < letters.size(); ++i) {
      raw_multiply(scratch_a, element(value(letters[i])), scratch_b);
      std::swap(scratch_a, scratch_b);
    }
    canonicalize(scratch_a);
    return lookup(scratch_a);
  }

  /// FNV-1a over the element table, used to validate caches.
  std::uint64_t element_table_hash() const { return hash_element_table(stride_, elements_); }

  /// Rebuilds a group from a stored element table (indices preserved).
  static FiniteGroup from_element_table(const GroupSpec& spec, std::vector<Code> elements,
                                        std::vector<ElementIndex> generators, const BuildOptions& options = {}) {
    FiniteGroup g(spec);
    if (g.stride_ == 0 || elements.size() % g.stride_ != 0) throw DomainError("element table has wrong shape");
    g.elements_ = std::move(elements);
    g.generators_ = std::move(generators);
    const std::size_t n = g.elements_.size() / g.stride_;
    g.index_.reset(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (g.find(g.element(static_cast<ElementIndex>(i))) >= 0) throw DomainError("duplicate element in table");
      g.index_.insert(g.element(static_cast<ElementIndex>(i)), static_cast<ElementIndex>(i));
    }
    for (ElementIndex s : g.generators_)
      if (s < 0 || static_cast<std::size_t>(s) >= n) throw DomainError("generator index out of range");
    g.finish(options);
    return g;
  }

 private:
  friend FiniteGroup build_group(const GroupSpec&, const BuildOptions&);

  explicit FiniteGroup(GroupSpec spec) : spec_(std::move(spec)) {
    if (spec_.is_matrix()) {
      field_.emplace(spec_.p);
      if (spec_.n < 1 || spec_.n > 8) throw DomainError("matrix dimension must be in 1..8");
      stride_ = static_cast<std::size_t>(spec_.n * spec_.n);
      if (spec_.kind == GroupKind::PSL) {
        for (int z = 1; z < spec_.p; ++z)
          if (field_->pow(z, spec_.n) == 1) scalars_.push_back(z);
      }
    } else {
      if (spec_.degree < 1) throw DomainError("permutation degree must be positive");
      stride_ = static_cast<std::size_t>(spec_.degree);
    }
  }

  std::size_t element_count() const noexcept { return stride_ == 0 ? 0 : elements_.size() / stride_; }

  ElementIndex lookup(std::span<const Code> code) const {
    const ElementIndex e = find(code);
    if (e < 0) throw std::logic_error("product fell outside the element table");
    return e;
  }

  void raw_multiply(std::span<const Code> a, std::span<const Code> b, std::span<Code> out) const {
    if (spec_.is_matrix()) {
      const int n = spec_.n;
      const long long p = spec_.p;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          long long s = 0;
          for (int k = 0; k < n; ++k) s += static_cast<long long>(a[i * n + k]) * b[k * n + j];
          out[i * n + j] = static_cast<Code>(s % p);
        }
    } else {
      // Points act on the right: i^(ab) = (i^a)^b.
      for (std::size_t i = 0; i < stride_; ++i) out[i] = b[a[i]];
    }
  }

  /// PSL: choose the lexicographically smallest scalar multiple. For n = 2
  /// this is the multiple whose first nonzero entry lies in 1..(p-1)/2.
  void canonicalize(std::span<Code> m) const {
    if (scalars_.size() <= 1) return;
    std::vector<Code> best(m.begin(), m.end()), cand(m.size());
    for (int z : scalars_) {
      for (std::size_t i = 0; i < m.size(); ++i) cand[i] = static_cast<Code>(field_->mul(m[i], z));
      if (std::lexicographical_compare(cand.begin(), cand.end(), best.begin(), best.end())) best = cand;
    }
    std::copy(best.begin(), best.end(), m.begin());
  }

  std::vector<Code> raw_inverse(std::span<const Code> a) const {
    std::vector<Code> out(stride_);
    if (!spec_.is_matrix()) {
      for (std::size_t i = 0; i < stride_; ++i) out[a[i]] = static_cast<Code>(i);
      return out;
    }
    const int n = spec_.n;
    const PrimeField& F = *field_;
    std::vector<int> m(a.begin(), a.end());
    std::vector<int> inv(stride_, 0);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      while (piv < n && m[piv * n + col] == 0) ++piv;
      if (piv == n) throw std::logic_error("singular matrix in group");
      for (int k = 0; k < n; ++k) {
        std::swap(m[col * n + k], m[piv * n + k]);
        std::swap(inv[col * n + k], inv[piv * n + k]);
      }
      const int s = F.inv(m[col * n + col]);
      for (int k = 0; k < n; ++k) {
        m[col * n + k] = F.mul(m[col * n + k], s);
        inv[col * n + k] = F.mul(inv[col * n + k], s);
      }
      for (int r = 0; r < n; ++r) {
        if (r == col || m[r * n + col] == 0) continue;
        const int f = m[r * n + col];
        for (int k = 0; k < n; ++k) {
          m[r * n + k] = F.sub(m[r * n + k], F.mul(f, m[col * n + k]));
          inv[r * n + k] = F.sub(inv[r * n + k], F.mul(f, inv[col * n + k]));
        }
      }
    }
    for (std::size_t i = 0; i < stride_; ++i) out[i] = static_cast<Code>(inv[i]);
    return out;
  }

  std::vector<Code> identity_code() const {
    std::vector<Code> id(stride_, 0);
    if (spec_.is_matrix()) {
      for (int i = 0; i < spec_.n; ++i) id[static_cast<std::size_t>(i * spec_.n + i)] = 1;
    } else {
      std::iota(id.begin(), id.end(), Code{0});
    }
    return id;
  }

  std::vector<std::vector<Code>> generator_codes() const {
    std::vector<std::vector<Code>> gens;
    if (spec_.is_matrix()) {
      const int n = spec_.n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          auto t = identity_code();
          t[static_cast<std::size_t>(i * n + j)] = 1;
          gens.push_back(std::move(t));
        }
      // Transvections generate SL; GL also needs a determinant generator.
      if (spec_.kind == GroupKind::GL && spec_.p > 2) {
        auto d = identity_code();
        d[0] = static_cast<Code>(field_->primitive_root());
        gens.push_back(std::move(d));
      }
      for (auto& g : gens) canonicalize(g);
    } else {
      for (const auto& s : spec_.generators) gens.push_back(parse_cycles(s, spec_.degree));
    }
    return gens;
  }

  void finish(const BuildOptions& options) {
    const std::size_t n = elements_.size() / stride_;
    if (find(identity_code()) != 0) throw DomainError("element 0 must be the identity");

    inverse_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto inv = raw_inverse(element(static_cast<ElementIndex>(i)));
      canonicalize(inv);
      inverse_[i] = lookup(inv);
    }

    if (n <= options.cayley_threshold) {
      cayley_.resize(n * n);
      std::vector<Code> out(stride_);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          raw_multiply(element(static_cast<ElementIndex>(a)), element(static_cast<ElementIndex>(b)), out);
          canonicalize(out);
          cayley_[a * n + b] = lookup(out);
        }
    }

    order_.assign(n, 1);
    {
      std::vector<Code> acc(stride_), tmp(stride_);
      const auto id = identity_code();
      for (std::size_t g = 1; g < n; ++g) {
        auto e = element(static_cast<ElementIndex>(g));
        std::copy(e.begin(), e.end(), acc.begin());
        int k = 1;
        while (!std::equal(acc.begin(), acc.end(), id.begin())) {
          raw_multiply(acc, e, tmp);
          canonicalize(tmp);
          std::swap(acc, tmp);
          ++k;
        }
        order_[g] = k;
      }
    }
    compute_classes();
  }

  void compute_classes() {
    const std::size_t n = order();
    std::vector<int> raw_class(n, -1);
    std::vector<std::vector<ElementIndex>> orbits;
    for (std::size_t g = 0; g < n; ++g) {
      if (raw_class[g] >= 0) continue;
      const int id = static_cast<int>(orbits.size());
      std::vector<ElementIndex> orbit{static_cast<ElementIndex>(g)};
      raw_class[g] = id;
      for (std::size_t head = 0; head < orbit.size(); ++head) {
        for (ElementIndex s : generators_) {
          const ElementIndex c = conjugate(orbit[head], s);
          if (raw_class[static_cast<std::size_t>(c)] < 0) {
            raw_class[static_cast<std::size_t>(c)] = id;
            orbit.push_back(c);
          }
        }
      }
      std::sort(orbit.begin(), orbit.end());
      orbits.push_back(std::move(orbit));
    }
    // Orbits are discovered in order of smallest member, so the final
    // ordering key (element order, size, smallest index) is total.
    std::vector<int> perm(orbits.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) {
      const auto& A = orbits[static_cast<std::size_t>(a)];
      const auto& B = orbits[static_cast<std::size_t>(b)];
      const auto ka = std::make_tuple(order_[static_cast<std::size_t>(A[0])], A.size(), A[0]);
      const auto kb = std::make_tuple(order_[static_cast<std::size_t>(B[0])], B.size(), B[0]);
      return ka < kb;
    });
    classes_.clear();
    class_of_.assign(n, 0);
    for (std::size_t id = 0; id < perm.size(); ++id) {
      auto& orbit = orbits[static_cast<std::size_t>(perm[id])];
      ConjugacyClass c;
      c.id = static_cast<int>(id);
      c.representative = orbit.front();
      c.size = orbit.size();
      c.element_order = order_[static_cast<std::size_t>(orbit.front())];
      for (ElementIndex m : orbit) class_of_[static_cast<std::size_t>(m)] = c.id;
      c.members = std::move(orbit);
      classes_.push_back(std::move(c));
    }
    for (auto& c : classes_) c.inverse_class = class_of(inverse(c.representative));
  }

  GroupSpec spec_;
  std::optional<PrimeField> field_;
  std::vector<int> scalars_;
  std::size_t stride_ = 0;
  std::vector<Code> elements_;
  detail::CodeIndex index_;
  std::vector<ElementIndex> generators_;
  std::vector<ElementIndex> inverse_;
  std::vector<ElementIndex> cayley_;
  std::vector<int> order_;
  std::vector<int> class_of_;
  std::vector<ConjugacyClass> classes_;
};

/// BFS closure from the generators: the identity gets index 0 and new
/// elements are appended in discovery order (g * s for s in generator order).
inline FiniteGroup build_group(const GroupSpec& spec_in, const BuildOptions& options = {}) {
  GroupSpec spec = spec_in;
  if (spec.kind == GroupKind::Perm) {
    const int used = max_point(spec.generators);
    if (spec.degree == 0) spec.degree = used;
    if (used > spec.degree) throw DomainError("generator moves a point beyond the declared degree");
    if (spec.degree == 0) spec.degree = 1;
  } else {
    if (!is_prime(spec.p)) throw DomainError(std::to_string(spec.p) + " is not prime");
    if (spec.n < 1) throw DomainError("matrix dimension must be positive");
    // Overflow-safe estimate first: p^(n^2) bounds the order.
    double estimate = 1;
    for (int i = 0; i < spec.n * spec.n; ++i) estimate *= spec.p;
    if (estimate > 1e15 || classical_order(spec.kind, spec.n, spec.p) > static_cast<long long>(options.order_cap))
      throw DomainError("order of " + describe(spec) + " exceeds cap " + std::to_string(options.order_cap));
  }

  FiniteGroup G(spec);
  const auto gens = G.generator_codes();
  const std::size_t stride = G.stride_;
  G.index_.reset(std::min<std::size_t>(options.order_cap, 1024));
  auto grow_index = [&] {
    if (2 * (G.elements_.size() / stride) + 16 < G.index_.capacity()) return;
    const std::size_t n = G.elements_.size() / stride;
    G.index_.reset(2 * n);
    for (std::size_t i = 0; i < n; ++i) G.index_.insert(G.element(static_cast<ElementIndex>(i)), static_cast<ElementIndex>(i));
  };
  auto add = [&](const std::vector<Code>& code) -> ElementIndex {
    const ElementIndex found = G.find(code);
    if (found >= 0) return found;
    const std::size_t n = G.elements_.size() / stride;
    if (n >= options.order_cap)
      throw DomainError("closure of " + describe(spec) + " exceeds order cap " + std::to_string(options.order_cap));
    G.elements_.insert(G.elements_.end(), code.begin(), code.end());
    G.index_.insert(code, static_cast<ElementIndex>(n));
    grow_index();
    return static_cast<ElementIndex>(n);
  };

  add(G.identity_code());
  for (const auto& s : gens) G.generators_.push_back(add(s));
  std::vector<Code> out(stride);
  for (std::size_t head = 0; head < G.elements_.size() / stride; ++head) {
    for (const auto& s : gens) {
      G.raw_multiply(G.element(static_cast<ElementIndex>(head)), s, out);
      G.canonicalize(out);
      add(out);
    }
  }
  // Generators were inserted right after the identity; keep only distinct ones.
  std::sort(G.generators_.begin(), G.generators_.end());
  G.generators_.erase(std::unique(G.generators_.begin(), G.generators_.end()), G.generators_.end());

  if (spec.is_matrix()) {
    const long long expected = classical_order(spec.kind, spec.n, spec.p);
    if (static_cast<long long>(G.element_count()) != expected)
      throw DomainError("closure of " + describe(spec) + " has order " + std::to_string(G.element_count()) +
                        ", expected " + std::to_string(expected));
  }
  G.finish(options);
  return G;
}

}  // namespace wordmap
