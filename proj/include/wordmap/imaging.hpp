#pragma once

// Word-map images, fibers, widths, chirality and Waring-type coverage on
// finite groups.
//
// Pruning: w(g x1 g^-1, ..., g xd g^-1) = g w(x1, ..., xd) g^-1, so the
// number of tuples landing in a conjugacy class C can be computed with x1
// restricted to class representatives r, weighting each representative by
// |class(r)|. Naive mode enumerates all |G|^d tuples and is kept as the
// correctness oracle.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "wordmap/errors.hpp"
#include "wordmap/fingroups.hpp"
#include "wordmap/words.hpp"

namespace wordmap {

enum class Mode { Pruned, Naive };

inline std::string to_string(Mode m) { return m == Mode::Pruned ? "pruned" : "naive"; }

inline Mode mode_from_string(std::string_view s) {
  if (s == "pruned") return Mode::Pruned;
  if (s == "naive") return Mode::Naive;
  throw DomainError("unknown mode '" + std::string(s) + "'");
}

struct EnumerationOptions {
  Mode mode = Mode::Pruned;
  unsigned threads = 1;
  double cost_cap = 1e10;  // word-letter operations
  std::size_t rank3_order_cap = 1000;
};

struct EnumerationStats {
  std::uint64_t tuples = 0;
  double wall_ms = 0;
};

/// Conjugacy-closed subset of G, one flag per class id.
using ClassSet = std::vector<bool>;

inline std::size_t element_count(const FiniteGroup& G, const ClassSet& s) {
  std::size_t n = 0;
  for (std::size_t c = 0; c < s.size(); ++c)
    if (s[c]) n += G.classes()[c].size;
  return n;
}

struct ImageReport {
  Word word;
  GroupSpec group;
  std::size_t group_order = 0;
  std::vector<int> classes;  // class ids in the image, ascending
  std::size_t element_count = 0;
  bool surjective = false;
  std::vector<int> excluded_classes;
  Mode mode = Mode::Pruned;
  unsigned threads = 1;
  EnumerationStats stats;

  ClassSet as_class_set(std::size_t class_count) const {
    ClassSet s(class_count, false);
    for (int c : classes) s[static_cast<std::size_t>(c)] = true;
    return s;
  }
};

struct FiberReport {
  Word word;
  GroupSpec group;
  std::size_t group_order = 0;
  std::vector<std::uint64_t> fibers;  // |w^-1(a)| for a in class id
  Mode mode = Mode::Pruned;
  unsigned threads = 1;
  EnumerationStats stats;
};

namespace detail {

inline double pow_size(std::size_t base, int exp) {
  double r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<double>(base);
  return r;
}

inline void check_enumerable(const FiniteGroup& G, const Word& w, const EnumerationOptions& opt) {
  if (w.rank() == 0) throw DomainError("word map needs rank >= 1");
  if (w.rank() >= 3 && G.order() > opt.rank3_order_cap)
    throw DomainError("rank-" + std::to_string(w.rank()) + " words are limited to groups of order <= " +
                      std::to_string(opt.rank3_order_cap));
  const double outer = opt.mode == Mode::Pruned ? static_cast<double>(G.classes().size()) : static_cast<double>(G.order());
  const double cost = outer * pow_size(G.order(), w.rank() - 1) * static_cast<double>(std::max<std::size_t>(w.length(), 1));
  if (cost > opt.cost_cap)
    throw DomainError("estimated cost " + std::to_string(cost) + " exceeds cap " + std::to_string(opt.cost_cap));
}

struct CountResult {
  std::vector<std::uint64_t> per_class;   // tuples whose value lies in each class
  std::vector<bool> values;               // naive only: exact value set
  std::uint64_t tuples = 0;
};

/// Enumerates tuples with x1 drawn from `outer` (weighted) and x2..xd over
/// all of G. Work is split over outer indices by stride; results are merged
/// by addition/union, so they do not depend on the partition.
inline CountResult count_values(const FiniteGroup& G, const Word& w, std::span<const ElementIndex> outer,
                                std::span<const std::uint64_t> weights, bool record_values, unsigned threads) {
  const std::size_t nc = G.classes().size();
  const std::size_t n = G.order();
  const int d = w.rank();
  threads = std::max(1u, threads);
  std::vector<CountResult> partial(threads);

  auto worker = [&](unsigned t) {
    CountResult& out = partial[t];
    out.per_class.assign(nc, 0);
    if (record_values) out.values.assign(n, false);
    std::vector<Code> a(G.stride()), b(G.stride());
    std::vector<ElementIndex> tuple(static_cast<std::size_t>(d), 0);
    std::vector<std::uint64_t> local(nc);
    for (std::size_t i = t; i < outer.size(); i += threads) {
      std::fill(local.begin(), local.end(), 0);
      tuple[0] = outer[i];
      std::fill(tuple.begin() + 1, tuple.end(), 0);
      while (true) {
        const ElementIndex v = G.evaluate_unchecked(w.letters(), tuple, a, b);
        ++local[static_cast<std::size_t>(G.class_of(v))];
        if (record_values) out.values[static_cast<std::size_t>(v)] = true;
        ++out.tuples;
        int k = d - 1;
        while (k >= 1 && static_cast<std::size_t>(++tuple[static_cast<std::size_t>(k)]) == n) {
          tuple[static_cast<std::size_t>(k)] = 0;
          --k;
        }
        if (k < 1) break;
      }
      for (std::size_t c = 0; c < nc; ++c) out.per_class[c] += local[c] * weights[i];
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  CountResult total;
  total.per_class.assign(nc, 0);
  if (record_values) total.values.assign(n, false);
  for (const auto& p : partial) {
    for (std::size_t c = 0; c < nc; ++c) total.per_class[c] += p.per_class[c];
    for (std::size_t g = 0; g < p.values.size(); ++g)
      if (p.values[g]) total.values[g] = true;
    total.tuples += p.tuples;
  }
  return total;
}

inline CountResult enumerate(const FiniteGroup& G, const Word& w, const EnumerationOptions& opt) {
  check_enumerable(G, w, opt);
  std::vector<ElementIndex> outer;
  std::vector<std::uint64_t> weights;
  if (opt.mode == Mode::Pruned) {
    for (const auto& c : G.classes()) {
      outer.push_back(c.representative);
      weights.push_back(c.size);
    }
  } else {
    outer.resize(G.order());
    std::iota(outer.begin(), outer.end(), 0);
    weights.assign(G.order(), 1);
  }
  return count_values(G, w, outer, weights, opt.mode == Mode::Naive, opt.threads);
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline ImageReport image(const FiniteGroup& G, const Word& w, const EnumerationOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto counts = detail::enumerate(G, w, opt);
  ImageReport r;
  r.word = w;
  r.group = G.spec();
  r.group_order = G.order();
  r.mode = opt.mode;
  r.threads = std::max(1u, opt.threads);
  for (const auto& c : G.classes()) {
    bool hit = counts.per_class[static_cast<std::size_t>(c.id)] > 0;
    if (opt.mode == Mode::Naive) {
      // The raw value set must already be a union of classes.
      std::size_t present = 0;
      for (ElementIndex m : c.members) present += counts.values[static_cast<std::size_t>(m)] ? 1 : 0;
      if (present != 0 && present != c.size) throw std::logic_error("naive image is not conjugacy-closed");
      hit = present > 0;
    }
    if (hit) {
      r.classes.push_back(c.id);
      r.element_count += c.size;
    } else {
      r.excluded_classes.push_back(c.id);
    }
  }
  r.surjective = r.element_count == G.order();
  r.stats = {counts.tuples, detail::ms_since(t0)};
  return r;
}

inline FiberReport fibers(const FiniteGroup& G, const Word& w, const EnumerationOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto counts = detail::enumerate(G, w, opt);
  FiberReport r;
  r.word = w;
  r.group = G.spec();
  r.group_order = G.order();
  r.mode = opt.mode;
  r.threads = std::max(1u, opt.threads);
  for (const auto& c : G.classes()) {
    const std::uint64_t total = counts.per_class[static_cast<std::size_t>(c.id)];
    if (total % c.size != 0)
      throw std::logic_error("fiber total for class " + std::to_string(c.id) + " is not divisible by class size");
    r.fibers.push_back(total / c.size);
  }
  r.stats = {counts.tuples, detail::ms_since(t0)};
  return r;
}

/// Sum over classes of |C| * fiber(C); equals |G|^rank for a valid report.
inline long double fiber_mass(const FiniteGroup& G, const FiberReport& r) {
  long double s = 0;
  for (std::size_t c = 0; c < r.fibers.size(); ++c)
    s += static_cast<long double>(G.classes()[c].size) * static_cast<long double>(r.fibers[c]);
  return s;
}

/// S * T for conjugacy-closed S, T: class(s t) over representatives s of S
/// and all t in T. The result is again conjugacy-closed.
inline ClassSet class_product(const FiniteGroup& G, const ClassSet& S, const ClassSet& T) {
  ClassSet out(G.classes().size(), false);
  for (const auto& cs : G.classes()) {
    if (!S[static_cast<std::size_t>(cs.id)]) continue;
    for (const auto& ct : G.classes()) {
      if (!T[static_cast<std::size_t>(ct.id)]) continue;
      for (ElementIndex t : ct.members) out[static_cast<std::size_t>(G.class_of(G.multiply(cs.representative, t)))] = true;
    }
  }
  return out;
}

struct WidthReport {
  Word word;
  GroupSpec group;
  std::size_t group_order = 0;
  std::vector<std::size_t> sizes;  // |S|, |S^2|, ...
  std::optional<int> width;        // unset if image trivial or cap hit
  std::size_t generated_order = 0;  // order of <Im w>
  bool generated_is_proper = false;
  bool trivial_image = false;
  bool exceeds_cap = false;
};

/// Least k with S^k = <S>, where S = Im w.
inline WidthReport width(const FiniteGroup& G, const Word& w, int cap = 16, const EnumerationOptions& opt = {}) {
  if (cap < 1) throw DomainError("width cap must be positive");
  const ImageReport im = image(G, w, opt);
  const std::size_t nc = G.classes().size();
  const ClassSet S = im.as_class_set(nc);
  WidthReport r;
  r.word = w;
  r.group = G.spec();
  r.group_order = G.order();
  ClassSet power = S;
  r.sizes.push_back(element_count(G, power));
  int k = 1;
  while (true) {
    ClassSet next = class_product(G, power, S);
    if (next == power) break;
    if (k == cap) {
      r.exceeds_cap = true;
      return r;
    }
    power = std::move(next);
    r.sizes.push_back(element_count(G, power));
    ++k;
  }
  r.generated_order = r.sizes.back();
  r.generated_is_proper = r.generated_order < G.order();
  r.trivial_image = im.element_count == 1;
  if (!r.trivial_image) r.width = k;
  return r;
}

enum class VariableScope {
  Separate,  // each factor is a word in its own variables
  Shared     // factors share one namespace and must use disjoint generators
};

struct WaringReport {
  std::vector<Word> factors;
  GroupSpec group;
  std::size_t group_order = 0;
  std::vector<ImageReport> factor_images;
  std::vector<int> covered_classes;
  std::size_t covered_count = 0;
  bool covers_group = false;
  bool covers_noncentral = false;  // product contains G \ Z(G)
  std::vector<int> missed_classes;
};

/// Im(w1 w2 ...) for words in disjoint variables equals Im w1 * Im w2 * ...
inline WaringReport waring_check(const FiniteGroup& G, const std::vector<Word>& factors,
                                 VariableScope scope = VariableScope::Separate, const EnumerationOptions& opt = {}) {
  if (factors.empty() || factors.size() > 3) throw DomainError("waring_check takes 1 to 3 factors");
  std::vector<Word> local;
  if (scope == VariableScope::Shared) {
    std::vector<int> owner;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      for (Letter l : factors[f].letters()) {
        const auto g = static_cast<std::size_t>(l.generator);
        if (owner.size() <= g) owner.resize(g + 1, -1);
        if (owner[g] >= 0 && owner[g] != static_cast<int>(f))
          throw DomainError("factor words share generator x" + std::to_string(l.generator) +
                            "; Im(w1 w2) = Im w1 * Im w2 needs disjoint variables");
        owner[g] = static_cast<int>(f);
      }
    }
    // Restrict each factor to the generators it uses.
    for (const Word& f : factors) {
      std::vector<Word> images(static_cast<std::size_t>(f.rank()), Word(0));
      std::vector<int> used;
      for (Letter l : f.letters())
        if (std::find(used.begin(), used.end(), l.generator) == used.end()) used.push_back(l.generator);
      std::sort(used.begin(), used.end());
      const int r = std::max<int>(1, static_cast<int>(used.size()));
      for (auto& im : images) im = Word(r);
      for (std::size_t i = 0; i < used.size(); ++i)
        images[static_cast<std::size_t>(used[i] - 1)] = Word::generator(static_cast<int>(i) + 1, 1, r);
      local.push_back(substitute(f, images).with_rank(r));
    }
  } else {
    for (const Word& f : factors) local.push_back(f.rank() == 0 ? f.with_rank(1) : f);
  }

  WaringReport r;
  r.factors = factors;
  r.group = G.spec();
  r.group_order = G.order();
  const std::size_t nc = G.classes().size();
  ClassSet acc;
  for (const Word& f : local) {
    r.factor_images.push_back(image(G, f, opt));
    const ClassSet s = r.factor_images.back().as_class_set(nc);
    acc = acc.empty() ? s : class_product(G, acc, s);
  }
  r.covers_noncentral = true;
  for (const auto& c : G.classes()) {
    if (acc[static_cast<std::size_t>(c.id)]) {
      r.covered_classes.push_back(c.id);
      r.covered_count += c.size;
    } else {
      r.missed_classes.push_back(c.id);
      if (c.size > 1) r.covers_noncentral = false;
    }
  }
  r.covers_group = r.covered_count == G.order();
  return r;
}

struct ChiralityPair {
  int class_id = 0;
  int inverse_class = 0;
  std::uint64_t fiber = 0;
  std::uint64_t inverse_fiber = 0;
};

struct ChiralityReport {
  FiberReport fibers;
  std::vector<ChiralityPair> pairs;
  bool weakly_chiral = false;
};

/// Compares |w^-1(a)| with |w^-1(a^-1)| for every class.
inline ChiralityReport chirality_scan(const FiniteGroup& G, const Word& w, const EnumerationOptions& opt = {}) {
  ChiralityReport r;
  r.fibers = fibers(G, w, opt);
  for (const auto& c : G.classes()) {
    ChiralityPair p{c.id, c.inverse_class, r.fibers.fibers[static_cast<std::size_t>(c.id)],
                    r.fibers.fibers[static_cast<std::size_t>(c.inverse_class)]};
    r.weakly_chiral = r.weakly_chiral || p.fiber != p.inverse_fiber;
    r.pairs.push_back(p);
  }
  return r;
}

struct ScanRow {
  int p = 0;
  std::string group;
  std::string word;
  std::size_t group_order = 0;
  std::optional<bool> surjective;
  std::size_t image_count = 0;
  std::size_t missed_class_count = 0;
  std::vector<int> missed_classes;
  std::string error;
};

/// Replaces "{N}" with `parameter` and "{order}" with the group order.
inline std::string instantiate_template(std::string text, std::optional<long long> parameter, std::size_t order) {
  auto replace_all = [&](const std::string& key, const std::string& value) {
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
      text.replace(pos, key.size(), value);
  };
  if (parameter) replace_all("{N}", std::to_string(*parameter));
  replace_all("{order}", std::to_string(order));
  if (text.find('{') != std::string::npos) throw DomainError("unresolved placeholder in word template '" + text + "'");
  return text;
}

/// One row per (prime, parameter). Errors are recorded per row and the
/// scan continues.
inline std::vector<ScanRow> surjectivity_scan(const std::string& word_template, GroupKind kind, int n,
                                              std::span<const int> primes, std::span<const long long> parameters,
                                              const EnumerationOptions& opt = {}, const BuildOptions& build = {}) {
  std::vector<ScanRow> rows;
  std::vector<std::optional<long long>> params;
  if (parameters.empty()) params.push_back(std::nullopt);
  for (long long v : parameters) params.emplace_back(v);
  for (int p : primes) {
    const GroupSpec spec = GroupSpec::matrix(kind, n, p);
    std::optional<FiniteGroup> G;
    std::string build_error;
    try {
      G.emplace(build_group(spec, build));
    } catch (const DomainError& e) {
      build_error = e.what();
    }
    for (const auto& param : params) {
      ScanRow row;
      row.p = p;
      row.group = describe(spec);
      try {
        if (!G) throw DomainError(build_error);
        row.group_order = G->order();
        row.word = instantiate_template(word_template, param, G->order());
        const Word w = parse_word(row.word);
        const ImageReport im = image(*G, w, opt);
        row.surjective = im.surjective;
        row.image_count = im.element_count;
        row.missed_classes = im.excluded_classes;
        row.missed_class_count = im.excluded_classes.size();
      } catch (const DomainError& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace wordmap
