#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "wordmap/fingroups.hpp"
#include "wordmap/group_io.hpp"

using namespace wordmap;

namespace {

// Conjugacy classes by brute force: orbit of g under conjugation by every h.
std::vector<std::set<ElementIndex>> brute_force_classes(const FiniteGroup& G) {
  std::vector<int> seen(G.order(), 0);
  std::vector<std::set<ElementIndex>> out;
  for (ElementIndex g = 0; g < static_cast<ElementIndex>(G.order()); ++g) {
    if (seen[static_cast<std::size_t>(g)]) continue;
    std::set<ElementIndex> cls;
    for (ElementIndex h = 0; h < static_cast<ElementIndex>(G.order()); ++h)
      cls.insert(G.multiply(G.multiply(h, g), G.inverse(h)));
    for (ElementIndex c : cls) seen[static_cast<std::size_t>(c)] = 1;
    out.push_back(cls);
  }
  return out;
}

void check_structure(const FiniteGroup& G) {
  const ElementIndex n = static_cast<ElementIndex>(G.order());
  std::size_t total = 0;
  for (const auto& c : G.classes()) {
    total += c.size;
    EXPECT_EQ(G.order() % c.size, 0u);
    EXPECT_EQ(G.class_of(c.representative), c.id);
    EXPECT_EQ(G.classes()[static_cast<std::size_t>(c.inverse_class)].inverse_class, c.id);
    EXPECT_EQ(G.class_of(G.inverse(c.representative)), c.inverse_class);
  }
  EXPECT_EQ(total, G.order());
  EXPECT_EQ(G.class_of(G.identity()), 0);
  for (ElementIndex g = 0; g < n; ++g) {
    EXPECT_EQ(G.multiply(g, G.inverse(g)), G.identity());
    EXPECT_EQ(G.multiply(G.identity(), g), g);
    // element order by repeated multiplication
    int k = 1;
    ElementIndex acc = g;
    while (acc != G.identity()) {
      acc = G.multiply(acc, g);
      ++k;
    }
    EXPECT_EQ(G.element_order(g), k);
  }
  // center = elements commuting with everything
  std::vector<ElementIndex> z;
  for (ElementIndex g = 0; g < n; ++g) {
    bool central = true;
    for (ElementIndex h = 0; h < n && central; ++h) central = G.multiply(g, h) == G.multiply(h, g);
    if (central) z.push_back(g);
  }
  EXPECT_EQ(G.center(), z);
  // classes agree with the brute-force orbits
  auto bf = brute_force_classes(G);
  ASSERT_EQ(bf.size(), G.classes().size());
  for (const auto& cls : bf) {
    const int id = G.class_of(*cls.begin());
    EXPECT_EQ(G.classes()[static_cast<std::size_t>(id)].size, cls.size());
    for (ElementIndex c : cls) EXPECT_EQ(G.class_of(c), id);
  }
}

long long count_sl2(int p) {
  long long c = 0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int cc = 0; cc < p; ++cc)
        for (int d = 0; d < p; ++d)
          if (((a * d - b * cc) % p + p) % p == 1) ++c;
  return c;
}

}  // namespace

TEST(PrimeField, Arithmetic) {
  const PrimeField F(7);
  EXPECT_EQ(F.mul(3, 5), 1);
  EXPECT_EQ(F.inv(3), 5);
  EXPECT_EQ(F.pow(3, 6), 1);
  EXPECT_EQ(F.neg(0), 0);
  EXPECT_EQ(F.sub(2, 5), 4);
  const int g = F.primitive_root();
  std::set<int> powers;
  for (int k = 0; k < 6; ++k) powers.insert(F.pow(g, k));
  EXPECT_EQ(powers.size(), 6u);
  EXPECT_THROW(PrimeField(9), DomainError);
  EXPECT_TRUE(is_prime(47));
  EXPECT_FALSE(is_prime(1));
}

TEST(GroupSpecs, ShorthandAndOrders) {
  EXPECT_EQ(parse_group_shorthand("psl2:7"), GroupSpec::matrix(GroupKind::PSL, 2, 7));
  EXPECT_EQ(parse_group_shorthand("SL3:3"), GroupSpec::matrix(GroupKind::SL, 3, 3));
  EXPECT_EQ(parse_group_shorthand("gl2:3"), GroupSpec::matrix(GroupKind::GL, 2, 3));
  EXPECT_THROW(parse_group_shorthand("psl2"), DomainError);
  EXPECT_THROW(parse_group_shorthand("foo2:7"), DomainError);
  EXPECT_EQ(classical_order(GroupKind::SL, 2, 5), 120);
  EXPECT_EQ(classical_order(GroupKind::PSL, 2, 7), 168);
  EXPECT_EQ(classical_order(GroupKind::GL, 2, 3), 48);
  EXPECT_EQ(classical_order(GroupKind::SL, 3, 3), 5616);
  for (int p : {2, 3, 5, 7}) EXPECT_EQ(classical_order(GroupKind::SL, 2, p), count_sl2(p));
}

TEST(BuildGroup, SmallMatrixGroups) {
  const FiniteGroup sl25 = build_group(parse_group_shorthand("sl2:5"));
  EXPECT_EQ(sl25.order(), 120u);
  EXPECT_EQ(sl25.classes().size(), 9u);
  EXPECT_EQ(sl25.center().size(), 2u);
  check_structure(sl25);

  const FiniteGroup a5 = build_group(parse_group_shorthand("psl2:5"));
  EXPECT_EQ(a5.order(), 60u);
  EXPECT_EQ(a5.classes().size(), 5u);
  std::multiset<std::size_t> sizes;
  for (const auto& c : a5.classes()) sizes.insert(c.size);
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{1, 12, 12, 15, 20}));
  check_structure(a5);

  const FiniteGroup psl27 = build_group(parse_group_shorthand("psl2:7"));
  EXPECT_EQ(psl27.order(), 168u);
  EXPECT_EQ(psl27.classes().size(), 6u);
  check_structure(psl27);

  const FiniteGroup gl23 = build_group(parse_group_shorthand("gl2:3"));
  EXPECT_EQ(gl23.order(), 48u);
  check_structure(gl23);

  const FiniteGroup sl22 = build_group(parse_group_shorthand("sl2:2"));
  EXPECT_EQ(sl22.order(), 6u);
  check_structure(sl22);
}

TEST(BuildGroup, MatrixMultiplicationMatchesDirectProduct) {
  const FiniteGroup G = build_group(parse_group_shorthand("sl2:7"));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    const auto a = static_cast<ElementIndex>(rng() % G.order());
    const auto b = static_cast<ElementIndex>(rng() % G.order());
    const auto A = G.element(a), B = G.element(b);
    std::vector<Code> C{static_cast<Code>((A[0] * B[0] + A[1] * B[2]) % 7), static_cast<Code>((A[0] * B[1] + A[1] * B[3]) % 7),
                        static_cast<Code>((A[2] * B[0] + A[3] * B[2]) % 7), static_cast<Code>((A[2] * B[1] + A[3] * B[3]) % 7)};
    EXPECT_EQ(G.find(C), G.multiply(a, b));
  }
}

TEST(BuildGroup, PslCanonicalForm) {
  const FiniteGroup G = build_group(parse_group_shorthand("psl2:11"));
  EXPECT_EQ(G.order(), 660u);
  for (ElementIndex g = 0; g < static_cast<ElementIndex>(G.order()); ++g) {
    const auto e = G.element(g);
    const auto first = *std::find_if(e.begin(), e.end(), [](Code c) { return c != 0; });
    EXPECT_GE(first, 1);
    EXPECT_LE(first, 5);
  }
}

TEST(BuildGroup, LargerGroups) {
  const FiniteGroup sl33 = build_group(parse_group_shorthand("sl3:3"));
  EXPECT_EQ(sl33.order(), 5616u);
  EXPECT_EQ(sl33.classes().size(), 12u);
  EXPECT_FALSE(sl33.has_cayley_table());
  std::size_t total = 0;
  for (const auto& c : sl33.classes()) total += c.size;
  EXPECT_EQ(total, 5616u);
}

TEST(BuildGroup, PermutationGroups) {
  const FiniteGroup s4 = build_group(GroupSpec::permutation({"(1 2)", "(1 2 3 4)"}));
  EXPECT_EQ(s4.order(), 24u);
  EXPECT_EQ(s4.classes().size(), 5u);
  check_structure(s4);

  const FiniteGroup a6 = build_group(GroupSpec::permutation({"(1 2 3)", "(2 3 4 5 6)"}));
  EXPECT_EQ(a6.order(), 360u);
  EXPECT_EQ(a6.classes().size(), 7u);

  const FiniteGroup m11 = build_group(load_group_spec(WORDMAP_DATA_DIR "/m11.json"));
  EXPECT_EQ(m11.order(), 7920u);
  EXPECT_EQ(m11.classes().size(), 10u);
  int order11 = 0;
  for (const auto& c : m11.classes())
    if (c.element_order == 11) {
      ++order11;
      EXPECT_NE(c.inverse_class, c.id);
    }
  EXPECT_EQ(order11, 2);
}

TEST(BuildGroup, RightActionConvention) {
  const FiniteGroup G = build_group(GroupSpec::permutation({"(1 2)", "(2 3)"}));
  // i^(ab) = (i^a)^b : 1 -(12)-> 2 -(23)-> 3
  const ElementIndex a = G.generators()[0], b = G.generators()[1];
  EXPECT_EQ(G.element(G.multiply(a, b))[0], 2);
}

TEST(BuildGroup, Errors) {
  EXPECT_THROW(build_group(GroupSpec::matrix(GroupKind::SL, 2, 8)), DomainError);
  BuildOptions small;
  small.order_cap = 100;
  EXPECT_THROW(build_group(parse_group_shorthand("psl2:7"), small), DomainError);
  EXPECT_THROW(build_group(GroupSpec::permutation({"(1 2"})), DomainError);
  EXPECT_THROW(build_group(GroupSpec::permutation({"(1 2 1)"})), DomainError);
  EXPECT_THROW(parse_cycles("(1 5)", 3), DomainError);
}

TEST(Evaluate, WordHomomorphism) {
  const FiniteGroup G = build_group(parse_group_shorthand("psl2:7"));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    std::vector<ElementIndex> tuple{static_cast<ElementIndex>(rng() % G.order()),
                                    static_cast<ElementIndex>(rng() % G.order())};
    const Word u = parse_word("x^3*y*x^-1", 2), v = parse_word("[y,x]*y^2", 2);
    EXPECT_EQ(G.evaluate(concat(u, v), tuple), G.multiply(G.evaluate(u, tuple), G.evaluate(v, tuple)));
    EXPECT_EQ(G.evaluate(inverse(u), tuple), G.inverse(G.evaluate(u, tuple)));
  }
  const std::vector<ElementIndex> one{1};
  EXPECT_THROW(G.evaluate(parse_word("x*y"), one), DomainError);
  const std::vector<ElementIndex> bad{-1, 0};
  EXPECT_THROW(G.evaluate(parse_word("x*y"), bad), DomainError);
}

TEST(Evaluate, NoCayleyTablePathMatches) {
  BuildOptions no_table;
  no_table.cayley_threshold = 0;
  const FiniteGroup A = build_group(parse_group_shorthand("psl2:7"));
  const FiniteGroup B = build_group(parse_group_shorthand("psl2:7"), no_table);
  EXPECT_FALSE(B.has_cayley_table());
  EXPECT_EQ(A.element_table(), B.element_table());
  const Word w = parse_word("x^4*y^2*x*y^3");
  for (ElementIndex a = 0; a < 168; a += 7)
    for (ElementIndex b = 0; b < 168; b += 5) {
      const std::vector<ElementIndex> t{a, b};
      EXPECT_EQ(A.evaluate(w, t), B.evaluate(w, t));
    }
}

TEST(Determinism, IndicesStableAcrossBuilds) {
  const FiniteGroup A = build_group(parse_group_shorthand("sl2:5"));
  const FiniteGroup B = build_group(parse_group_shorthand("sl2:5"));
  EXPECT_EQ(A.element_table_hash(), B.element_table_hash());
  EXPECT_EQ(A.element_table(), B.element_table());
}

class CacheRoundTrip : public ::testing::TestWithParam<CacheFormat> {};

TEST_P(CacheRoundTrip, PreservesIndexingAndClasses) {
  const auto dir = std::filesystem::temp_directory_path() / "wordmap_cache_test";
  std::filesystem::create_directories(dir);
  for (const GroupSpec& spec : {parse_group_shorthand("psl2:7"), parse_group_shorthand("sl3:3"),
                                load_group_spec(WORDMAP_DATA_DIR "/m11.json")}) {
    const FiniteGroup G = build_group(spec);
    const auto path = dir / cache_file_name(G.spec(), GetParam());
    save_group_cache(G, path, GetParam());
    EXPECT_TRUE(is_group_cache(path));
    const FiniteGroup H = load_group_cache(path);
    EXPECT_EQ(H.spec(), G.spec());
    EXPECT_EQ(H.element_table(), G.element_table());
    EXPECT_EQ(H.element_table_hash(), G.element_table_hash());
    EXPECT_EQ(H.generators(), G.generators());
    ASSERT_EQ(H.classes().size(), G.classes().size());
    for (std::size_t i = 0; i < G.classes().size(); ++i) {
      EXPECT_EQ(H.classes()[i].representative, G.classes()[i].representative);
      EXPECT_EQ(H.classes()[i].size, G.classes()[i].size);
    }
  }
  std::filesystem::remove_all(dir);
}

INSTANTIATE_TEST_SUITE_P(Formats, CacheRoundTrip, ::testing::Values(CacheFormat::Json, CacheFormat::Binary));

TEST(Cache, CorruptionIsDetected) {
  const auto dir = std::filesystem::temp_directory_path() / "wordmap_cache_corrupt";
  std::filesystem::create_directories(dir);
  const FiniteGroup G = build_group(parse_group_shorthand("psl2:5"));

  const auto bin = dir / "g.wmgc";
  save_group_cache(G, bin, CacheFormat::Binary);
  {
    std::fstream f(bin, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-2, std::ios::end);
    const char junk[2] = {0x7f, 0x7f};
    f.write(junk, 2);
  }
  EXPECT_THROW(load_group_cache(bin), DomainError);

  const auto js = dir / "g.cache.json";
  save_group_cache(G, js, CacheFormat::Json);
  auto j = read_json_file(js);
  j["element_hash"] = "0000000000000000";
  std::ofstream(js) << j.dump();
  EXPECT_THROW(load_group_cache(js), DomainError);

  const auto trunc = dir / "t.wmgc";
  std::ofstream(trunc, std::ios::binary) << "WMGC";
  EXPECT_THROW(load_group_cache(trunc), DomainError);
  std::filesystem::remove_all(dir);
}

TEST(GroupSpecs, JsonRoundTrip) {
  const GroupSpec m = parse_group_shorthand("psl2:13");
  EXPECT_EQ(group_spec_from_json(to_json(m)), m);
  const GroupSpec p = load_group_spec(WORDMAP_DATA_DIR "/m11.json");
  EXPECT_EQ(p.degree, 11);
  EXPECT_EQ(group_spec_from_json(to_json(p)), p);
  EXPECT_THROW(group_spec_from_json(nlohmann::json{{"kind", "perm"}}), DomainError);
  EXPECT_THROW(group_spec_from_json(nlohmann::json{{"kind", "xx"}, {"n", 2}, {"p", 5}}), DomainError);
}
