#pragma once

// Group spec files and group caches.
//
// Spec file:   {"kind": "PSL", "n": 2, "p": 7}
//              {"kind": "perm", "degree": 11, "generators": ["(1 2 ...)", ...]}
// Cache file:  element table + generators + class table, either JSON
//              ("cache_version") or binary ("WMGC" magic). Loading recomputes
//              inverses/orders/classes from the element table and checks them
//              and the element-table hash against the stored values.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordmap/errors.hpp"
#include "wordmap/fingroups.hpp"

namespace wordmap {

inline constexpr int kCacheVersion = 1;

enum class CacheFormat { Json, Binary };

inline nlohmann::json to_json(const GroupSpec& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  if (s.is_matrix()) {
    j["n"] = s.n;
    j["p"] = s.p;
  } else {
    j["degree"] = s.degree;
    j["generators"] = s.generators;
  }
  return j;
}

inline GroupSpec group_spec_from_json(const nlohmann::json& j) {
  try {
    GroupSpec s;
    s.kind = group_kind_from_string(j.at("kind").get<std::string>());
    if (s.is_matrix()) {
      s.n = j.at("n").get<int>();
      s.p = j.at("p").get<int>();
    } else {
      s.degree = j.value("degree", 0);
      s.generators = j.at("generators").get<std::vector<std::string>>();
      if (s.generators.empty()) throw DomainError("permutation spec needs at least one generator");
      for (const auto& g : s.generators) parse_cycles(g, std::max(s.degree, max_point(s.generators)));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed group spec: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

inline GroupSpec load_group_spec(const std::filesystem::path& path) { return group_spec_from_json(read_json_file(path)); }

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// File name used for a group inside a cache directory.
inline std::string cache_file_name(const GroupSpec& s, CacheFormat f) {
  std::string base;
  if (s.is_matrix()) {
    base = to_string(s.kind) + std::to_string(s.n) + "_" + std::to_string(s.p);
  } else {
    std::string joined;
    for (const auto& g : s.generators) joined += g + "|";
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : joined) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    base = "perm" + std::to_string(s.degree) + "_" + hex64(h);
  }
  return base + (f == CacheFormat::Json ? ".cache.json" : ".wmgc");
}

namespace detail {

inline nlohmann::json class_table_json(const FiniteGroup& G) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : G.classes())
    classes.push_back({{"id", c.id}, {"representative", c.representative}, {"size", c.size},
                       {"element_order", c.element_order}, {"inverse_class", c.inverse_class}});
  return classes;
}

inline void verify_loaded(const FiniteGroup& G, std::uint64_t stored_hash, const nlohmann::json& stored_classes) {
  if (G.element_table_hash() != stored_hash) throw DomainError("group cache: element-table hash mismatch");
  if (class_table_json(G) != stored_classes) throw DomainError("group cache: class table does not match recomputation");
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DomainError("group cache: truncated file");
  return v;
}

}  // namespace detail

inline void save_group_cache(const FiniteGroup& G, const std::filesystem::path& path, CacheFormat format) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (format == CacheFormat::Json) {
    nlohmann::json j;
    j["cache_version"] = kCacheVersion;
    j["spec"] = to_json(G.spec());
    j["order"] = G.order();
    j["stride"] = G.stride();
    j["element_hash"] = hex64(G.element_table_hash());
    j["generators"] = G.generators();
    j["elements"] = G.element_table();
    j["classes"] = detail::class_table_json(G);
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    out << j.dump() << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out.write("WMGC", 4);
  detail::put<std::uint32_t>(out, kCacheVersion);
  const std::string meta = nlohmann::json{{"spec", to_json(G.spec())}, {"classes", detail::class_table_json(G)}}.dump();
  detail::put<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  detail::put<std::uint64_t>(out, G.element_table_hash());
  detail::put<std::uint64_t>(out, G.stride());
  detail::put<std::uint64_t>(out, G.generators().size());
  for (ElementIndex g : G.generators()) detail::put<std::int32_t>(out, g);
  detail::put<std::uint64_t>(out, G.element_table().size());
  out.write(reinterpret_cast<const char*>(G.element_table().data()),
            static_cast<std::streamsize>(G.element_table().size() * sizeof(Code)));
}

inline bool is_group_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  if (in && std::memcmp(magic, "WMGC", 4) == 0) return true;
  if (path.extension() != ".json") return false;
  try {
    return read_json_file(path).contains("cache_version");
  } catch (const DomainError&) {
    return false;
  }
}

namespace detail {

inline FiniteGroup load_group_cache_impl(const std::filesystem::path& path, const BuildOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in && std::memcmp(magic, "WMGC", 4) == 0) {
    if (detail::get<std::uint32_t>(in) != kCacheVersion) throw DomainError("group cache: unsupported version");
    const auto meta_len = detail::get<std::uint64_t>(in);
    if (meta_len > (1u << 26)) throw DomainError("group cache: corrupt header");
    std::string meta(meta_len, '\0');
    if (!in.read(meta.data(), static_cast<std::streamsize>(meta_len))) throw DomainError("group cache: truncated file");
    const auto header = nlohmann::json::parse(meta);
    const auto hash = detail::get<std::uint64_t>(in);
    const auto stride = detail::get<std::uint64_t>(in);
    const auto ngens = detail::get<std::uint64_t>(in);
    if (ngens > (1u << 20)) throw DomainError("group cache: corrupt header");
    std::vector<ElementIndex> gens(ngens);
    for (auto& g : gens) g = detail::get<std::int32_t>(in);
    const auto ncodes = detail::get<std::uint64_t>(in);
    if (ncodes > (1ull << 32)) throw DomainError("group cache: corrupt header");
    std::vector<Code> codes(ncodes);
    if (!in.read(reinterpret_cast<char*>(codes.data()), static_cast<std::streamsize>(ncodes * sizeof(Code))))
      throw DomainError("group cache: truncated file");
    if (hash_element_table(stride, codes) != hash) throw DomainError("group cache: element-table hash mismatch");
    FiniteGroup G = FiniteGroup::from_element_table(group_spec_from_json(header.at("spec")), std::move(codes),
                                                    std::move(gens), options);
    detail::verify_loaded(G, hash, header.at("classes"));
    return G;
  }
  const auto j = read_json_file(path);
  try {
    if (j.at("cache_version").get<int>() != kCacheVersion) throw DomainError("group cache: unsupported version");
    auto codes = j.at("elements").get<std::vector<Code>>();
    const std::uint64_t hash = std::stoull(j.at("element_hash").get<std::string>(), nullptr, 16);
    if (hash_element_table(j.at("stride").get<std::size_t>(), codes) != hash)
      throw DomainError("group cache: element-table hash mismatch");
    FiniteGroup G = FiniteGroup::from_element_table(group_spec_from_json(j.at("spec")), std::move(codes),
                                                    j.at("generators").get<std::vector<ElementIndex>>(), options);
    detail::verify_loaded(G, hash, j.at("classes"));
    return G;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("group cache: ") + e.what());
  }
}

}  // namespace detail

/// Loads a JSON or binary cache; any inconsistency is a DomainError.
inline FiniteGroup load_group_cache(const std::filesystem::path& path, const BuildOptions& options = {}) {
  try {
    return detail::load_group_cache_impl(path, options);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("group cache: ") + e.what());
  } catch (const std::logic_error& e) {
    throw DomainError(std::string("group cache: inconsistent table: ") + e.what());
  }
}

}  // namespace wordmap
