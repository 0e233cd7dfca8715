#pragma once

// Image and additive width of the Lie bracket [X, Y] = XY - YX on 2x2
// matrices over a small prime field.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wordmap/errors.hpp"
#include "wordmap/fingroups.hpp"

namespace wordmap {

enum class MatrixSpace { GL, SL };  // gl2 = all matrices, sl2 = traceless

inline std::string to_string(MatrixSpace s) { return s == MatrixSpace::GL ? "gl" : "sl"; }

inline MatrixSpace matrix_space_from_string(std::string_view s) {
  if (s == "gl") return MatrixSpace::GL;
  if (s == "sl") return MatrixSpace::SL;
  throw DomainError("unknown matrix space '" + std::string(s) + "'");
}

/// 2x2 matrix over F_p, row-major.
struct SmallMatrix {
  std::array<int, 4> e{};

  bool traceless(int p) const { return (e[0] + e[3]) % p == 0; }

  /// Base-p code a + b p + c p^2 + d p^3.
  std::uint32_t code(int p) const {
    return static_cast<std::uint32_t>(e[0] + p * (e[1] + p * (e[2] + p * e[3])));
  }
  static SmallMatrix decode(std::uint32_t code, int p) {
    SmallMatrix m;
    for (int& v : m.e) {
      v = static_cast<int>(code % static_cast<std::uint32_t>(p));
      code /= static_cast<std::uint32_t>(p);
    }
    return m;
  }
  friend bool operator==(const SmallMatrix&, const SmallMatrix&) = default;
};

inline SmallMatrix bracket(const SmallMatrix& x, const SmallMatrix& y, int p) {
  auto mul = [p](const SmallMatrix& a, const SmallMatrix& b) {
    return SmallMatrix{{(a.e[0] * b.e[0] + a.e[1] * b.e[2]) % p, (a.e[0] * b.e[1] + a.e[1] * b.e[3]) % p,
                        (a.e[2] * b.e[0] + a.e[3] * b.e[2]) % p, (a.e[2] * b.e[1] + a.e[3] * b.e[3]) % p}};
  };
  const SmallMatrix xy = mul(x, y), yx = mul(y, x);
  SmallMatrix r;
  for (int i = 0; i < 4; ++i) r.e[static_cast<std::size_t>(i)] = (xy.e[static_cast<std::size_t>(i)] - yx.e[static_cast<std::size_t>(i)] + p) % p;
  return r;
}

/// All elements of the chosen space, as codes.
inline std::vector<std::uint32_t> space_elements(int p, MatrixSpace space) {
  std::vector<std::uint32_t> out;
  const std::uint32_t total = static_cast<std::uint32_t>(p) * p * p * p;
  for (std::uint32_t c = 0; c < total; ++c)
    if (space == MatrixSpace::GL || SmallMatrix::decode(c, p).traceless(p)) out.push_back(c);
  return out;
}

struct BracketImageReport {
  int p = 0;
  MatrixSpace space = MatrixSpace::GL;
  std::size_t image_size = 0;
  std::size_t traceless_count = 0;
  bool equals_traceless = false;
  std::vector<SmallMatrix> missed;  // traceless matrices outside the image
  std::vector<bool> image;          // indexed by code
};

inline constexpr int kBracketPrimeCap = 13;

inline void check_bracket_prime(int p, int cap) {
  if (!is_prime(p)) throw DomainError(std::to_string(p) + " is not prime");
  if (p > cap) throw DomainError("p = " + std::to_string(p) + " exceeds bracket cap " + std::to_string(cap));
}

/// Exhaustive over all pairs (X, Y); split over X across threads.
inline BracketImageReport bracket_image(int p, MatrixSpace space, unsigned threads = 1, int cap = kBracketPrimeCap) {
  check_bracket_prime(p, cap);
  const auto elems = space_elements(p, space);
  const std::size_t total = static_cast<std::size_t>(p) * p * p * p;
  threads = std::max(1u, threads);
  std::vector<std::vector<bool>> partial(threads, std::vector<bool>(total, false));
  std::vector<int> bad(threads, 0);
  std::vector<SmallMatrix> decoded;
  decoded.reserve(elems.size());
  for (auto c : elems) decoded.push_back(SmallMatrix::decode(c, p));
  auto worker = [&](unsigned t) {
    for (std::size_t i = t; i < decoded.size(); i += threads)
      for (const auto& y : decoded) {
        const SmallMatrix z = bracket(decoded[i], y, p);
        if (!z.traceless(p)) ++bad[t];
        partial[t][z.code(p)] = true;
      }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (int b : bad)
    if (b) throw std::logic_error("bracket produced a matrix with nonzero trace");

  BracketImageReport r;
  r.p = p;
  r.space = space;
  r.image.assign(total, false);
  for (const auto& part : partial)
    for (std::size_t c = 0; c < total; ++c)
      if (part[c]) r.image[c] = true;
  for (std::uint32_t c = 0; c < total; ++c) {
    const SmallMatrix m = SmallMatrix::decode(c, p);
    if (!m.traceless(p)) continue;
    ++r.traceless_count;
    if (r.image[c]) ++r.image_size;
    else r.missed.push_back(m);
  }
  r.equals_traceless = r.missed.empty();
  return r;
}

struct BracketWidthReport {
  int p = 0;
  MatrixSpace space = MatrixSpace::GL;
  std::vector<std::size_t> sizes;  // |S|, |S+S|, ...
  std::optional<int> width;        // least k with k-fold sums = sl2
  bool stabilized_below_sl2 = false;
  bool exceeds_cap = false;
};

/// Iterated sumsets of the bracket image until they stop growing.
inline BracketWidthReport bracket_width(int p, MatrixSpace space = MatrixSpace::GL, int width_cap = 8,
                                        unsigned threads = 1, int prime_cap = kBracketPrimeCap) {
  const BracketImageReport im = bracket_image(p, space, threads, prime_cap);
  BracketWidthReport r;
  r.p = p;
  r.space = space;
  std::vector<std::uint32_t> base;
  for (std::uint32_t c = 0; c < im.image.size(); ++c)
    if (im.image[c]) base.push_back(c);
  std::vector<bool> cur = im.image;
  std::size_t size = base.size();
  r.sizes.push_back(size);
  int k = 1;
  while (true) {
    if (size == im.traceless_count) {
      r.width = k;
      return r;
    }
    std::vector<bool> next(cur.size(), false);
    for (std::uint32_t a = 0; a < cur.size(); ++a) {
      if (!cur[a]) continue;
      const SmallMatrix ma = SmallMatrix::decode(a, p);
      for (auto b : base) {
        const SmallMatrix mb = SmallMatrix::decode(b, p);
        SmallMatrix s;
        for (int i = 0; i < 4; ++i) s.e[static_cast<std::size_t>(i)] = (ma.e[static_cast<std::size_t>(i)] + mb.e[static_cast<std::size_t>(i)]) % p;
        next[s.code(p)] = true;
      }
    }
    std::size_t next_size = 0;
    for (bool v : next) next_size += v ? 1 : 0;
    if (next_size == size) {
      r.stabilized_below_sl2 = true;
      return r;
    }
    if (k == width_cap) {
      r.exceeds_cap = true;
      return r;
    }
    cur = std::move(next);
    size = next_size;
    r.sizes.push_back(size);
    ++k;
  }
}

}  // namespace wordmap
