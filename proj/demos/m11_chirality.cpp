// Builds M11 from the shipped generators and compares fibers of
// x^4 y^2 x y^3 at inverse-paired classes.
#include <iostream>

#include "wordmap/group_io.hpp"
#include "wordmap/imaging.hpp"

int main(int argc, char** argv) {
  using namespace wordmap;
  const std::string path = argc > 1 ? argv[1] : WORDMAP_DATA_DIR "/m11.json";
  const FiniteGroup G = build_group(load_group_spec(path));
  std::cout << G.name() << " order " << G.order() << ", " << G.classes().size() << " classes\n";

  const ChiralityReport r = chirality_scan(G, parse_word("x^4*y^2*x*y^3"));
  for (const auto& p : r.pairs) {
    if (p.class_id > p.inverse_class) continue;
    const auto& c = G.classes()[static_cast<std::size_t>(p.class_id)];
    std::cout << "class " << p.class_id << " (order " << c.element_order << ", size " << c.size << "): " << p.fiber;
    if (p.class_id != p.inverse_class) std::cout << " vs inverse class " << p.inverse_class << ": " << p.inverse_fiber;
    std::cout << "\n";
  }
  std::cout << (r.weakly_chiral ? "weakly chiral" : "achiral") << "\n";
}
