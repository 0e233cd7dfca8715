#pragma once

// Reduced words in the free group F_d on generators x1..xd.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wordmap/errors.hpp"

namespace wordmap {

struct Letter {
  int generator = 1;  // 1-based
  int sign = 1;       // +1 or -1

  constexpr Letter inverse() const { return {generator, -sign}; }
  constexpr bool cancels(Letter other) const {
    return generator == other.generator && sign == -other.sign;
  }
  friend constexpr bool operator==(Letter, Letter) = default;
};

inline constexpr int kDefaultThomCap = 14;
inline constexpr std::size_t kMaxWordLength = std::size_t{1} << 28;

/// A freely reduced word. `rank` is the ambient number of generators; it is
/// not part of equality, which compares group elements of F_d only.
class Word {
 public:
  Word() = default;
  explicit Word(int rank) : rank_(rank) {
    if (rank < 0) throw DomainError("word rank must be nonnegative");
  }
  Word(int rank, std::span<const Letter> letters) : rank_(rank) {
    if (rank < 0) throw DomainError("word rank must be nonnegative");
    letters_.reserve(letters.size());
    for (Letter l : letters) push(l);
  }
  Word(int rank, std::initializer_list<Letter> letters)
      : Word(rank, std::span<const Letter>(letters.begin(), letters.size())) {}

  /// x_index (or its inverse); rank defaults to index.
  static Word generator(int index, int sign = 1, int rank = 0) {
    if (index < 1) throw DomainError("generator index must be >= 1");
    return Word(std::max(rank, index), {Letter{index, sign}});
  }

  int rank() const noexcept { return rank_; }
  std::size_t length() const noexcept { return letters_.size(); }
  bool is_identity() const noexcept { return letters_.empty(); }
  std::span<const Letter> letters() const noexcept { return letters_; }

  /// Same element, ambient rank raised (never lowered below what is used).
  Word with_rank(int rank) const {
    Word w = *this;
    w.rank_ = std::max(rank, max_generator());
    return w;
  }

  int max_generator() const noexcept {
    int m = 0;
    for (Letter l : letters_) m = std::max(m, l.generator);
    return m;
  }

  friend bool operator==(const Word& a, const Word& b) { return a.letters_ == b.letters_; }

  /// Appends with free reduction at the end.
  void push(Letter l) {
    if (l.generator < 1 || (l.sign != 1 && l.sign != -1))
      throw DomainError("malformed letter");
    if (l.generator > rank_) throw DomainError("generator index exceeds word rank");
    if (!letters_.empty() && letters_.back().cancels(l)) {
      letters_.pop_back();
    } else {
      if (letters_.size() >= kMaxWordLength) throw DomainError("word length cap exceeded");
      letters_.push_back(l);
    }
  }

 private:
  int rank_ = 0;
  std::vector<Letter> letters_;
};

inline Word concat(const Word& u, const Word& v) {
  Word out(std::max(u.rank(), v.rank()));
  for (Letter l : u.letters()) out.push(l);
  for (Letter l : v.letters()) out.push(l);
  return out;
}

inline Word operator*(const Word& u, const Word& v) { return concat(u, v); }

inline Word inverse(const Word& w) {
  std::vector<Letter> rev;
  rev.reserve(w.length());
  for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) rev.push_back(it->inverse());
  return Word(w.rank(), rev);
}

inline Word power(const Word& w, long long k) {
  const Word base = k < 0 ? inverse(w) : w;
  const unsigned long long n = k < 0 ? 0ULL - static_cast<unsigned long long>(k) : k;
  if (n != 0 && base.length() > kMaxWordLength / n)
    throw DomainError("power exceeds the word length cap");
  Word out(w.rank());
  for (unsigned long long i = 0; i < n; ++i)
    for (Letter l : base.letters()) out.push(l);
  return out;
}

inline Word commutator(const Word& u, const Word& v) {
  return concat(concat(u, v), concat(inverse(u), inverse(v)));
}

/// Left-normed Engel word [[x,y],y,...,y] with k copies of y.
inline Word engel_word(int k) {
  if (k < 1) throw DomainError("engel_word requires k >= 1");
  const Word x = Word::generator(1, 1, 2);
  const Word y = Word::generator(2, 1, 2);
  Word e = commutator(x, y);
  for (int i = 2; i <= k; ++i) e = commutator(e, y);
  return e;
}

/// Almost-law sequence on two letters:
///   w0 = [x,y], w1 = [w0,x], w_{2i-1} = [w_{2i-2}, x^i], w_{2i} = [w_{2i-1}, y w_{2i-1} y^-1].
inline Word thom_word(int k, int cap = kDefaultThomCap) {
  if (k < 0) throw DomainError("thom_word requires k >= 0");
  if (k > cap) throw DomainError("thom_word index " + std::to_string(k) + " exceeds cap " + std::to_string(cap));
  const Word x = Word::generator(1, 1, 2);
  const Word y = Word::generator(2, 1, 2);
  Word w = commutator(x, y);
  for (int j = 1; j <= k; ++j) {
    if (j % 2 == 1) {
      w = commutator(w, power(x, (j + 1) / 2));
    } else {
      w = commutator(w, concat(concat(y, w), inverse(y)));
    }
  }
  return w;
}

inline std::vector<long long> exponent_sums(const Word& w) {
  std::vector<long long> sums(static_cast<std::size_t>(w.rank()), 0);
  for (Letter l : w.letters()) sums[static_cast<std::size_t>(l.generator - 1)] += l.sign;
  return sums;
}

/// Splits w = c * core * c^-1 with core cyclically reduced.
struct CyclicDecomposition {
  Word conjugator;
  Word core;
};

inline CyclicDecomposition cyclic_reduction(const Word& w) {
  auto letters = w.letters();
  std::size_t lo = 0;
  std::size_t hi = letters.size();
  while (hi - lo >= 2 && letters[lo].cancels(letters[hi - 1])) {
    ++lo;
    --hi;
  }
  return {Word(w.rank(), letters.subspan(0, lo)), Word(w.rank(), letters.subspan(lo, hi - lo))};
}

struct PowerRoot {
  Word root;
  int exponent = 1;
};

/// Maximal k with w = root^k.
inline PowerRoot proper_power_root(const Word& w) {
  if (w.is_identity()) throw DomainError("proper_power_root: identity word has no root");
  const auto [c, core] = cyclic_reduction(w);
  const auto letters = core.letters();
  const std::size_t n = letters.size();
  for (std::size_t k = n; k >= 2; --k) {
    if (n % k != 0) continue;
    const std::size_t period = n / k;
    bool periodic = true;
    for (std::size_t i = period; i < n && periodic; ++i) periodic = letters[i] == letters[i - period];
    if (periodic) {
      Word r(w.rank(), letters.subspan(0, period));
      return {concat(concat(c, r), inverse(c)), static_cast<int>(k)};
    }
  }
  return {w, 1};
}

/// Replaces generator i by images[i-1].
inline Word substitute(const Word& w, std::span<const Word> images) {
  if (images.size() != static_cast<std::size_t>(w.rank()))
    throw DomainError("substitute: expected " + std::to_string(w.rank()) + " images, got " +
                      std::to_string(images.size()));
  int rank = 0;
  for (const Word& im : images) rank = std::max(rank, im.rank());
  Word out(rank);
  for (Letter l : w.letters()) {
    const Word& im = images[static_cast<std::size_t>(l.generator - 1)];
    if (l.sign > 0) {
      for (Letter m : im.letters()) out.push(m);
    } else {
      for (auto it = im.letters().rbegin(); it != im.letters().rend(); ++it) out.push(it->inverse());
    }
  }
  return out;
}

/// Renames x_i to x_{i+offset}.
inline Word shift_generators(const Word& w, int offset) {
  if (offset < 0) throw DomainError("shift_generators: negative offset");
  std::vector<Letter> out;
  out.reserve(w.length());
  for (Letter l : w.letters()) out.push_back({l.generator + offset, l.sign});
  return Word(w.rank() + offset, out);
}

namespace detail {

inline constexpr std::string_view kAliases = "xyzuv";

class WordParser {
 public:
  WordParser(std::string_view text, std::optional<int> rank) : text_(text), rank_(rank) {}

  Word run() {
    skip_space();
    std::vector<Letter> body = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    int used = 0;
    for (Letter l : body) used = std::max(used, l.generator);
    return Word(rank_.value_or(used), body);
  }

 private:
  using Letters = std::vector<Letter>;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool starts_factor() {
    skip_space();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    return c == '(' || c == '[' || c == '1' || kAliases.find(c) != std::string_view::npos;
  }

  static Letters reduce(Letters in) {
    Letters out;
    out.reserve(in.size());
    for (Letter l : in) {
      if (!out.empty() && out.back().cancels(l)) out.pop_back();
      else out.push_back(l);
    }
    return out;
  }
  static Letters inverted(const Letters& in) {
    Letters out;
    out.reserve(in.size());
    for (auto it = in.rbegin(); it != in.rend(); ++it) out.push_back(it->inverse());
    return out;
  }
  static void append(Letters& dst, const Letters& src) {
    for (Letter l : src) {
      if (!dst.empty() && dst.back().cancels(l)) dst.pop_back();
      else dst.push_back(l);
    }
  }

  Letters expr() {
    Letters out = factor();
    while (true) {
      if (peek('*')) {
        ++pos_;
        append(out, factor());
      } else if (starts_factor()) {
        append(out, factor());
      } else {
        break;
      }
    }
    return out;
  }

  Letters factor() {
    Letters base = atom();
    if (!peek('^')) return base;
    ++pos_;
    skip_space();
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    const std::size_t start = pos_;
    long long e = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      e = e * 10 + (text_[pos_] - '0');
      if (e > 1'000'000'000LL) fail("exponent too large");
      ++pos_;
    }
    if (pos_ == start) fail("expected integer exponent");
    const Letters unit = negative ? inverted(base) : base;
    if (!unit.empty() && static_cast<unsigned long long>(e) > kMaxWordLength / unit.size())
      fail("power exceeds the word length cap");
    Letters out;
    for (long long i = 0; i < e; ++i) append(out, unit);
    return out;
  }

  Letters atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '1') {
      ++pos_;
      return {};
    }
    if (c == '(') {
      ++pos_;
      Letters inner = expr();
      expect(')');
      return inner;
    }
    if (c == '[') {
      ++pos_;
      Letters u = expr();
      expect(',');
      Letters v = expr();
      expect(']');
      Letters out = u;
      append(out, v);
      append(out, inverted(u));
      append(out, inverted(v));
      return out;
    }
    const std::size_t alias = kAliases.find(c);
    if (alias == std::string_view::npos) fail(std::string("unexpected character '") + c + "'");
    const std::size_t start = pos_;
    ++pos_;
    int index = static_cast<int>(alias) + 1;
    if (c == 'x' && pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      long long v = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        v = v * 10 + (text_[pos_] - '0');
        if (v > 1'000'000) fail("generator index too large");
        ++pos_;
      }
      if (v < 1) {
        pos_ = start;
        fail("generator index must be >= 1");
      }
      index = static_cast<int>(v);
    }
    if (rank_ && index > *rank_) {
      pos_ = start;
      fail("generator index " + std::to_string(index) + " exceeds rank " + std::to_string(*rank_));
    }
    return {Letter{index, 1}};
  }

  std::string_view text_;
  std::optional<int> rank_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Grammar:
///   expr   := factor { ['*'] factor }
///   factor := atom [ '^' signed-int ]
///   atom   := gen | '1' | '(' expr ')' | '[' expr ',' expr ']'
///   gen    := 'x' digits | x | y | z | u | v     (aliases of x1..x5)
/// Whitespace is ignored. Without an explicit rank, the rank is the largest
/// generator index used.
inline Word parse_word(std::string_view text, std::optional<int> rank = std::nullopt) {
  if (rank && *rank < 0) throw DomainError("rank must be nonnegative");
  return detail::WordParser(text, rank).run();
}

inline std::string generator_name(int index, int rank) {
  if (rank <= static_cast<int>(detail::kAliases.size()))
    return std::string(1, detail::kAliases[static_cast<std::size_t>(index - 1)]);
  return "x" + std::to_string(index);
}

/// Canonical form: runs collapse to powers, factors joined by '*', e.g.
/// "x*y*x^-1*y^-1" or "x^4*y^2*x*y^3". The identity renders as "1".
inline std::string render(const Word& w) {
  if (w.is_identity()) return "1";
  std::string out;
  const auto letters = w.letters();
  for (std::size_t i = 0; i < letters.size();) {
    std::size_t j = i;
    while (j < letters.size() && letters[j] == letters[i]) ++j;
    const long long run = static_cast<long long>(j - i) * letters[i].sign;
    if (!out.empty()) out += '*';
    out += generator_name(letters[i].generator, w.rank());
    if (run != 1) out += "^" + std::to_string(run);
    i = j;
  }
  return out;
}

}  // namespace wordmap
