// Trace polynomial of [x, y] and of a rank-3 word with rational constants.
#include <iostream>

#include "wordmap/symbolic.hpp"

int main() {
  using namespace wordmap;
  const RationalMatrix2 a = RationalMatrix2::of(2, 1, 1, 1);
  const RationalMatrix2 b = RationalMatrix2::of(1, Rational(1, 2), 0, 1);

  for (const auto& [text, constants] :
       std::vector<std::pair<std::string, std::vector<RationalMatrix2>>>{{"[x,y]", {a}}, {"[x,y]*[x,z]^2", {a, b}}}) {
    const TracePolynomial t = trace_polynomial(parse_word(text), constants);
    std::cout << text << "\n  phi      = " << t.phi.to_string() << "\n  phi(0,0) = " << to_string(t.phi_at_origin)
              << "\n";
  }
  const Word w = parse_word("[[x,y],[x^-1,y^-1]]");
  std::cout << render(w) << ": " << to_string(derived_class(w)) << "\n";
}
