#pragma once

// JSON serialization of engine reports and their CSV projections. JSON is
// the source of truth; CSV is derived from the JSON object only.

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordmap/compact.hpp"
#include "wordmap/group_io.hpp"
#include "wordmap/imaging.hpp"
#include "wordmap/liebracket.hpp"
#include "wordmap/symbolic.hpp"

namespace wordmap {

using nlohmann::json;

inline json group_json(const FiniteGroup& G) {
  json j = to_json(G.spec());
  j["name"] = G.name();
  j["order"] = G.order();
  return j;
}

inline json class_json(const FiniteGroup& G, int class_id) {
  const auto& c = G.classes()[static_cast<std::size_t>(class_id)];
  return {{"class", c.id}, {"rep_index", c.representative}, {"element_order", c.element_order}, {"class_size", c.size}};
}

inline json class_list_json(const FiniteGroup& G, const std::vector<int>& ids) {
  json a = json::array();
  for (int c : ids) a.push_back(class_json(G, c));
  return a;
}

inline json to_json(const FiniteGroup& G, const ImageReport& r) {
  return {{"word", render(r.word)},
          {"group", group_json(G)},
          {"image", {{"count", r.element_count}, {"classes", class_list_json(G, r.classes)}}},
          {"surjective", r.surjective},
          {"missed_classes", class_list_json(G, r.excluded_classes)},
          {"mode", to_string(r.mode)},
          {"threads", r.threads},
          {"tuples", r.stats.tuples}};
}

inline json to_json(const FiniteGroup& G, const FiberReport& r) {
  json fib = json::array();
  std::vector<int> hit, missed;
  std::size_t count = 0;
  for (std::size_t c = 0; c < r.fibers.size(); ++c) {
    json e = class_json(G, static_cast<int>(c));
    e["value"] = r.fibers[c];
    fib.push_back(e);
    if (r.fibers[c] > 0) {
      hit.push_back(static_cast<int>(c));
      count += G.classes()[c].size;
    } else {
      missed.push_back(static_cast<int>(c));
    }
  }
  return {{"word", render(r.word)},
          {"group", group_json(G)},
          {"image", {{"count", count}, {"classes", class_list_json(G, hit)}}},
          {"surjective", count == G.order()},
          {"missed_classes", class_list_json(G, missed)},
          {"fibers", fib},
          {"fiber_mass", static_cast<double>(fiber_mass(G, r))},
          {"mode", to_string(r.mode)},
          {"threads", r.threads},
          {"tuples", r.stats.tuples}};
}

inline json to_json(const FiniteGroup& G, const WidthReport& r) {
  json j{{"word", render(r.word)},
         {"group", group_json(G)},
         {"sizes", r.sizes},
         {"generated_order", r.generated_order},
         {"generated_is_proper", r.generated_is_proper},
         {"trivial_image", r.trivial_image},
         {"exceeds_cap", r.exceeds_cap}};
  j["width"] = r.width ? json(*r.width) : json(nullptr);
  return j;
}

inline json to_json(const FiniteGroup& G, const WaringReport& r) {
  json factors = json::array();
  for (std::size_t i = 0; i < r.factors.size(); ++i)
    factors.push_back({{"word", render(r.factors[i])},
                       {"image_count", r.factor_images[i].element_count},
                       {"image_classes", r.factor_images[i].classes}});
  std::vector<int> central_missed;
  for (int c : r.missed_classes)
    if (G.classes()[static_cast<std::size_t>(c)].size == 1) central_missed.push_back(c);
  return {{"group", group_json(G)},
          {"factors", factors},
          {"covered_count", r.covered_count},
          {"covered_classes", class_list_json(G, r.covered_classes)},
          {"covers_group", r.covers_group},
          {"covers_noncentral", r.covers_noncentral},
          {"missed_classes", class_list_json(G, r.missed_classes)},
          {"missed_central_classes", central_missed}};
}

inline json to_json(const FiniteGroup& G, const ChiralityReport& r) {
  json j = to_json(G, r.fibers);
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"class", p.class_id},
                     {"inverse_class", p.inverse_class},
                     {"element_order", G.classes()[static_cast<std::size_t>(p.class_id)].element_order},
                     {"fiber", p.fiber},
                     {"inverse_fiber", p.inverse_fiber}});
  j["pairs"] = pairs;
  j["weakly_chiral"] = r.weakly_chiral;
  return j;
}

inline json to_json(const std::vector<ScanRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    json e{{"p", r.p},
           {"group", r.group},
           {"word", r.word},
           {"order", r.group_order},
           {"image_count", r.image_count},
           {"missed_class_count", r.missed_class_count},
           {"missed_classes", r.missed_classes},
           {"error", r.error}};
    e["surjective"] = r.surjective ? json(*r.surjective) : json(nullptr);
    a.push_back(e);
  }
  return a;
}

inline json to_json(const TracePolynomial& t) {
  return {{"phi", t.phi.to_string()},
          {"phi_at_origin", to_string(t.phi_at_origin)},
          {"nonconstant", t.nonconstant},
          {"identity_at_origin", t.identity_at_origin}};
}

inline json to_json(const PolyMatrix2& m) {
  return json::array({json::array({m(0, 0).to_string(), m(0, 1).to_string()}),
                      json::array({m(1, 0).to_string(), m(1, 1).to_string()})});
}

inline json to_json(const DecayReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back({{"k", row.k}, {"min", row.min}, {"median", row.median}, {"max", row.max}});
  return {{"dim", r.dim},
          {"kmax", r.k_max},
          {"samples", r.samples},
          {"norm", to_string(r.norm)},
          {"rows", rows},
          {"inequality_checks", r.inequality_checks},
          {"inequality_violations", r.inequality_violations},
          {"worst_inequality_slack", r.worst_inequality_slack}};
}

inline json to_json(const BracketImageReport& im, const BracketWidthReport& w) {
  json j{{"p", im.p},
         {"space", to_string(im.space)},
         {"image_size", im.image_size},
         {"traceless_count", im.traceless_count},
         {"equals_traceless", im.equals_traceless},
         {"missed_count", im.missed.size()},
         {"sumset_sizes", w.sizes},
         {"stabilized_below_sl2", w.stabilized_below_sl2},
         {"exceeds_cap", w.exceeds_cap}};
  j["width"] = w.width ? json(*w.width) : json(nullptr);
  return j;
}

namespace detail {

inline std::string csv_cell(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_null()) return "";
  if (v.is_array() || v.is_object()) {
    std::string s = v.dump();
    return csv_cell(json(s));
  }
  return v.dump();
}

inline std::string csv_table(const json& rows, const std::vector<std::string>& columns) {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      os << (i ? "," : "") << csv_cell(row.contains(columns[i]) ? row[columns[i]] : json(nullptr));
    os << "\n";
  }
  return os.str();
}

}  // namespace detail

/// CSV projection of a CLI report: the command's natural table, or a
/// key,value listing of top-level scalars for non-tabular reports.
inline std::string to_csv(const json& report) {
  const std::string cmd = report.value("command", "");
  if (cmd == "scan")
    return detail::csv_table(report.at("rows"), {"p", "group", "word", "order", "surjective", "image_count",
                                                 "missed_class_count", "error"});
  if (cmd == "thom") return detail::csv_table(report.at("rows"), {"k", "min", "median", "max"});
  if (cmd == "fibers" || cmd == "chirality")
    return detail::csv_table(report.at("fibers"), {"class", "rep_index", "element_order", "class_size", "value"});
  if (cmd == "image") return detail::csv_table(report.at("image").at("classes"), {"class", "rep_index", "element_order", "class_size"});
  if (cmd == "waring")
    return detail::csv_table(report.at("missed_classes"), {"class", "rep_index", "element_order", "class_size"});
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : report.items())
    if (!v.is_structured()) os << k << "," << detail::csv_cell(v) << "\n";
  return os.str();
}

}  // namespace wordmap
