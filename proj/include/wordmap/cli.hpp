#pragma once

// Command-line front end. `parse_command_line` turns argv into a RunConfig,
// `run` executes one and writes its report. Every report embeds the full
// resolved config so `rerun --report FILE` reproduces it.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wordmap/compact.hpp"
#include "wordmap/errors.hpp"
#include "wordmap/fingroups.hpp"
#include "wordmap/group_io.hpp"
#include "wordmap/imaging.hpp"
#include "wordmap/liebracket.hpp"
#include "wordmap/report.hpp"
#include "wordmap/symbolic.hpp"
#include "wordmap/words.hpp"

#ifndef WORDMAP_VERSION
#define WORDMAP_VERSION "0.0.0"
#endif

namespace wordmap::cli {

using nlohmann::json;

inline constexpr const char* kCacheDirEnv = "WORDMAP_CACHE_DIR";
inline constexpr const char* kDefaultCacheDir = ".wordmap-cache";

/// Invalid flag combination or value; maps to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;

  // finite groups
  std::string group;
  std::string word;
  std::optional<int> rank;
  std::vector<std::string> factors;
  bool shared_variables = false;
  std::string action = "info";  // group: build | info | cache
  std::string cache_format = "json";
  bool use_cache = true;
  std::string mode = "pruned";
  unsigned threads = 1;
  double cost_cap = 1e10;
  std::size_t order_cap = 100'000;
  int width_cap = 16;

  // scan
  std::string kind = "psl";
  int n = 2;
  std::vector<int> primes;
  std::vector<long long> params;

  // symbolic
  std::vector<std::string> constants;  // "a,b;c,d" rationals
  bool random_constants = false;
  int rank_cap = kDefaultMagnusRankCap;

  // compact
  int dim = 2;
  int kmax = 12;
  int samples = 100;
  int targets = 100;
  std::uint64_t seed = 1;
  std::string norm = "operator";
  std::size_t budget = 200'000;
  double tol = 1e-9;
  double epsilon = 0.5;
  std::string target = "random";  // random | identity | minus-identity | "a,b;c,d"
  int thom_cap = kDefaultThomCap;

  // roots
  std::string root_group = "sl2r";
  std::string matrix;
  int degree = 2;

  // bracket
  int p = 5;
  std::string space = "gl";
  int prime_cap = kBracketPrimeCap;

  // output
  std::string out;
  std::string format = "json";
  bool stable = false;
  std::string report;  // rerun source
};

inline json to_json(const RunConfig& c) {
  json j{{"command", c.command},     {"group", c.group},
         {"word", c.word},           {"factors", c.factors},
         {"shared_variables", c.shared_variables},
         {"action", c.action},       {"cache_format", c.cache_format},
         {"use_cache", c.use_cache}, {"mode", c.mode},
         {"threads", c.threads},     {"cost_cap", c.cost_cap},
         {"order_cap", c.order_cap}, {"width_cap", c.width_cap},
         {"kind", c.kind},           {"n", c.n},
         {"primes", c.primes},       {"params", c.params},
         {"constants", c.constants}, {"random_constants", c.random_constants},
         {"rank_cap", c.rank_cap},   {"dim", c.dim},
         {"kmax", c.kmax},           {"samples", c.samples},
         {"targets", c.targets},     {"seed", c.seed},
         {"norm", c.norm},           {"budget", c.budget},
         {"tol", c.tol},             {"epsilon", c.epsilon},
         {"target", c.target},       {"thom_cap", c.thom_cap},
         {"root_group", c.root_group}, {"matrix", c.matrix},
         {"degree", c.degree},       {"p", c.p},
         {"space", c.space},         {"prime_cap", c.prime_cap},
         {"format", c.format},       {"stable", c.stable}};
  j["rank"] = c.rank ? json(*c.rank) : json(nullptr);
  return j;
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    j.at("command").get_to(c.command);
    j.at("group").get_to(c.group);
    j.at("word").get_to(c.word);
    if (!j.at("rank").is_null()) c.rank = j.at("rank").get<int>();
    j.at("factors").get_to(c.factors);
    j.at("shared_variables").get_to(c.shared_variables);
    j.at("action").get_to(c.action);
    j.at("cache_format").get_to(c.cache_format);
    j.at("use_cache").get_to(c.use_cache);
    j.at("mode").get_to(c.mode);
    j.at("threads").get_to(c.threads);
    j.at("cost_cap").get_to(c.cost_cap);
    j.at("order_cap").get_to(c.order_cap);
    j.at("width_cap").get_to(c.width_cap);
    j.at("kind").get_to(c.kind);
    j.at("n").get_to(c.n);
    j.at("primes").get_to(c.primes);
    j.at("params").get_to(c.params);
    j.at("constants").get_to(c.constants);
    j.at("random_constants").get_to(c.random_constants);
    j.at("rank_cap").get_to(c.rank_cap);
    j.at("dim").get_to(c.dim);
    j.at("kmax").get_to(c.kmax);
    j.at("samples").get_to(c.samples);
    j.at("targets").get_to(c.targets);
    j.at("seed").get_to(c.seed);
    j.at("norm").get_to(c.norm);
    j.at("budget").get_to(c.budget);
    j.at("tol").get_to(c.tol);
    j.at("epsilon").get_to(c.epsilon);
    j.at("target").get_to(c.target);
    j.at("thom_cap").get_to(c.thom_cap);
    j.at("root_group").get_to(c.root_group);
    j.at("matrix").get_to(c.matrix);
    j.at("degree").get_to(c.degree);
    j.at("p").get_to(c.p);
    j.at("space").get_to(c.space);
    j.at("prime_cap").get_to(c.prime_cap);
    j.at("format").get_to(c.format);
    j.at("stable").get_to(c.stable);
  } catch (const json::exception& e) {
    throw UsageError(std::string("report config is incomplete: ") + e.what());
  }
  return c;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"parse", "group", "image",      "fibers", "width",   "chirality",
                                              "waring", "scan", "trace-poly", "magnus", "thom",    "solve",
                                              "density", "root", "bracket",   "rerun"};
  return names;
}

inline void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
  };
  require(std::find(subcommands().begin(), subcommands().end(), c.command) != subcommands().end(),
          "unknown subcommand '" + c.command + "'");
  require(c.format == "json" || c.format == "csv", "--format must be json or csv");
  require(c.mode == "pruned" || c.mode == "naive", "--mode must be pruned or naive");
  require(c.cache_format == "json" || c.cache_format == "binary", "--cache-format must be json or binary");
  require(c.action == "build" || c.action == "info" || c.action == "cache", "group action must be build, info or cache");
  require(c.norm == "operator" || c.norm == "frobenius", "--norm must be operator or frobenius");
  require(c.root_group == "sl2r" || c.root_group == "sl2c", "root group must be sl2r or sl2c");
  require(c.space == "gl" || c.space == "sl", "--space must be gl or sl");
  require(c.threads >= 1, "--threads must be positive");
  require(c.cost_cap > 0 && c.order_cap > 0 && c.width_cap > 0 && c.rank_cap > 0 && c.thom_cap >= 0 &&
              c.prime_cap > 0 && c.budget > 0,
          "caps must be positive");
  require(c.samples > 0 && c.targets > 0, "--samples and --targets must be positive");
  require(c.dim >= 2, "--dim must be at least 2");
  require(c.tol > 0, "--tol must be positive");

  const std::string& cmd = c.command;
  const bool needs_group = cmd == "group" || cmd == "image" || cmd == "fibers" || cmd == "width" ||
                           cmd == "chirality" || cmd == "waring";
  const bool needs_word = cmd == "parse" || cmd == "image" || cmd == "fibers" || cmd == "width" ||
                          cmd == "chirality" || cmd == "scan" || cmd == "trace-poly" || cmd == "magnus" ||
                          cmd == "solve" || cmd == "density";
  require(!needs_group || !c.group.empty(), cmd + " requires --group");
  require(!needs_word || !c.word.empty(), cmd + " requires --word");
  if (cmd == "waring") require(!c.factors.empty() && c.factors.size() <= 3, "waring takes 1 to 3 --factor words");
  if (cmd == "scan") require(!c.primes.empty(), "scan requires --primes");
  if (cmd == "root") require(!c.matrix.empty(), "root requires --matrix");
  if (cmd == "rerun") require(!c.report.empty(), "rerun requires --report");
}

// ---------------------------------------------------------------------------
// Argument parsing

/// Parses argv into a config. Returns nullopt after printing help (exit 0);
/// throws UsageError on bad flags.
inline std::optional<RunConfig> parse_command_line(int argc, const char* const* argv, std::ostream& out) {
  RunConfig c;
  CLI::App app{"wordmap-lab: word maps on finite and compact groups", "wordmap_lab"};
  app.set_version_flag("--version", WORDMAP_VERSION);
  app.require_subcommand(1);

  std::string rank_text;
  auto common_out = [&](CLI::App* s) {
    s->add_option("--out,-o", c.out, "Report path (default wordmap-<command>.<format>)");
    s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    s->add_flag("--stable", c.stable, "Zero all timing fields so reruns are byte-identical");
  };
  auto group_opts = [&](CLI::App* s) {
    s->add_option("--group,-g", c.group, "Shorthand like psl2:7 or a spec/cache file")->required();
    s->add_option("--order-cap", c.order_cap, "Maximum group order to build");
    s->add_flag("!--no-cache", c.use_cache, "Ignore cached group tables");
  };
  auto enum_opts = [&](CLI::App* s) {
    s->add_option("--mode", c.mode, "pruned or naive")->check(CLI::IsMember({"pruned", "naive"}));
    s->add_option("--threads,-j", c.threads, "Worker threads");
    s->add_option("--cost-cap", c.cost_cap, "Maximum word evaluations");
  };
  auto word_opt = [&](CLI::App* s) {
    s->add_option("--word,-w", c.word, "Word, e.g. \"[x,y]\" or \"x^4*y^2*x*y^3\"")->required();
  };

  auto* parse = app.add_subcommand("parse", "Parse, reduce and analyse a word");
  word_opt(parse);
  parse->add_option("--rank", rank_text, "Number of generators");
  common_out(parse);

  auto* group = app.add_subcommand("group", "Build a group and report its class table");
  group->add_option("action", c.action, "build, info or cache")->check(CLI::IsMember({"build", "info", "cache"}));
  group_opts(group);
  group->add_option("--cache-format", c.cache_format, "json or binary")->check(CLI::IsMember({"json", "binary"}));
  common_out(group);

  for (const char* name : {"image", "fibers", "chirality"}) {
    auto* s = app.add_subcommand(name, std::string(name == std::string("image") ? "Image of a word map"
                                                   : name == std::string("fibers") ? "Fiber sizes per conjugacy class"
                                                                                  : "Compare fibers at a and a^-1"));
    group_opts(s);
    word_opt(s);
    enum_opts(s);
    common_out(s);
  }

  auto* width = app.add_subcommand("width", "Word width via iterated products of the image");
  group_opts(width);
  word_opt(width);
  enum_opts(width);
  width->add_option("--width-cap", c.width_cap, "Largest power of the image to form");
  common_out(width);

  auto* waring = app.add_subcommand("waring", "Coverage of a product of word images");
  group_opts(waring);
  enum_opts(waring);
  waring->add_option("--factor,-f", c.factors, "Factor word (repeat 1-3 times)")->required();
  waring->add_flag("--shared-variables", c.shared_variables, "Factors share one variable namespace");
  common_out(waring);

  auto* scan = app.add_subcommand("scan", "Surjectivity scan over primes");
  scan->add_option("--word,-w", c.word, "Word template; {N} and {order} are substituted")->required();
  scan->add_option("--kind", c.kind, "sl, psl or gl")->check(CLI::IsMember({"sl", "psl", "gl"}));
  scan->add_option("--n", c.n, "Matrix size");
  scan->add_option("--primes", c.primes, "Primes to scan")->delimiter(',')->required();
  scan->add_option("--params", c.params, "Values for {N}")->delimiter(',');
  scan->add_option("--order-cap", c.order_cap, "Maximum group order to build");
  enum_opts(scan);
  common_out(scan);

  auto* trace = app.add_subcommand("trace-poly", "Trace polynomial with generic first generator");
  word_opt(trace);
  trace->add_option("--constant,-c", c.constants, "Rational SL2 constant \"a,b;c,d\" for generators 2..d");
  trace->add_flag("--random-constants", c.random_constants, "Draw missing constants from --seed");
  trace->add_option("--seed", c.seed, "Seed for random constants");
  common_out(trace);

  auto* magnus = app.add_subcommand("magnus", "Magnus embedding and derived-series class");
  word_opt(magnus);
  magnus->add_option("--rank-cap", c.rank_cap, "Largest rank to embed");
  common_out(magnus);

  auto* thom = app.add_subcommand("thom", "Decay of the almost-law sequence on Haar pairs");
  thom->add_option("--dim", c.dim, "n for SU(n)");
  thom->add_option("--kmax", c.kmax, "Last word index");
  thom->add_option("--samples", c.samples, "Haar pairs");
  thom->add_option("--seed", c.seed, "Seed");
  thom->add_option("--norm", c.norm, "operator or frobenius")->check(CLI::IsMember({"operator", "frobenius"}));
  thom->add_option("--threads,-j", c.threads, "Worker threads");
  thom->add_option("--cap", c.thom_cap, "Largest admissible kmax");
  common_out(thom);

  auto* solve = app.add_subcommand("solve", "Solve w(tuple) = target in SU(n)");
  word_opt(solve);
  solve->add_option("--dim", c.dim, "n for SU(n)");
  solve->add_option("--target", c.target, "random, identity, minus-identity or \"a,b;c,d\" (complex)");
  solve->add_option("--seed", c.seed, "Seed");
  solve->add_option("--budget", c.budget, "Word evaluations");
  solve->add_option("--tol", c.tol, "Residual tolerance");
  common_out(solve);

  auto* density = app.add_subcommand("density", "Rank-metric density of a word image in SU(n)");
  word_opt(density);
  density->add_option("--dim", c.dim, "n for SU(n)");
  density->add_option("--epsilon", c.epsilon, "Radius in the normalized rank metric");
  density->add_option("--samples", c.samples, "Image samples");
  density->add_option("--targets", c.targets, "Haar targets");
  density->add_option("--seed", c.seed, "Seed");
  common_out(density);

  auto* root = app.add_subcommand("root", "Roots in SL2(R) or SL2(C)");
  root->add_option("group", c.root_group, "sl2r or sl2c")->check(CLI::IsMember({"sl2r", "sl2c"}));
  root->add_option("--matrix,-m", c.matrix, "\"a,b;c,d\"; complex entries like 1+2i")->required();
  root->add_option("--degree", c.degree, "Root degree (sl2c)");
  common_out(root);

  auto* bracket = app.add_subcommand("bracket", "Image and width of [X,Y] on 2x2 matrices mod p");
  bracket->add_option("--p", c.p, "Prime");
  bracket->add_option("--space", c.space, "gl or sl")->check(CLI::IsMember({"gl", "sl"}));
  bracket->add_option("--width-cap", c.width_cap, "Largest sumset power");
  bracket->add_option("--prime-cap", c.prime_cap, "Largest admissible prime");
  bracket->add_option("--threads,-j", c.threads, "Worker threads");
  common_out(bracket);

  auto* rerun = app.add_subcommand("rerun", "Re-execute the config embedded in a report");
  rerun->add_option("--report,-r", c.report, "Report JSON")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out,-o", c.out, "Report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::CallForVersion&) {
    out << WORDMAP_VERSION << "\n";
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  c.command = app.get_subcommands().front()->get_name();
  if (!rank_text.empty()) {
    try {
      c.rank = std::stoi(rank_text);
    } catch (const std::exception&) {
      throw UsageError("--rank must be an integer");
    }
  }
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Helpers

inline std::filesystem::path cache_dir() {
  const char* env = std::getenv(kCacheDirEnv);
  return (env && *env) ? std::filesystem::path(env) : std::filesystem::path(kDefaultCacheDir);
}

/// Resolves --group: a cache file, a spec file, or shorthand. Cached tables
/// for the spec are used when present (and allowed).
inline FiniteGroup resolve_group(const RunConfig& c, std::ostream& err) {
  BuildOptions build;
  build.order_cap = c.order_cap;
  const std::filesystem::path path(c.group);
  GroupSpec spec;
  if (std::filesystem::is_regular_file(path)) {
    if (is_group_cache(path)) return load_group_cache(path, build);
    spec = load_group_spec(path);
  } else if (c.group.find(':') != std::string::npos) {
    spec = parse_group_shorthand(c.group);
  } else {
    throw DomainError("group '" + c.group + "' is neither a file nor a shorthand like psl2:7");
  }
  if (c.use_cache) {
    if (spec.kind == GroupKind::Perm && spec.degree == 0) spec.degree = max_point(spec.generators);
    for (CacheFormat f : {CacheFormat::Binary, CacheFormat::Json}) {
      const auto cached = cache_dir() / cache_file_name(spec, f);
      if (!std::filesystem::is_regular_file(cached)) continue;
      try {
        FiniteGroup G = load_group_cache(cached, build);
        if (G.spec() == spec) return G;
      } catch (const DomainError& e) {
        err << "warning: ignoring cache " << cached.string() << ": " << e.what() << "\n";
      }
    }
  }
  return build_group(spec, build);
}

inline EnumerationOptions enumeration_options(const RunConfig& c) {
  EnumerationOptions o;
  o.mode = mode_from_string(c.mode);
  o.threads = c.threads;
  o.cost_cap = c.cost_cap;
  return o;
}

/// "a,b;c,d" split into four entry strings.
inline std::array<std::string, 4> split_matrix(const std::string& text) {
  std::array<std::string, 4> out;
  std::size_t k = 0;
  std::string cur;
  for (char ch : text) {
    if (ch == ',' || ch == ';') {
      if (k >= 3) throw DomainError("matrix needs exactly four entries: \"a,b;c,d\"");
      out[k++] = cur;
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  if (k != 3 || cur.empty()) throw DomainError("matrix needs exactly four entries: \"a,b;c,d\"");
  out[3] = cur;
  for (const auto& e : out)
    if (e.empty()) throw DomainError("empty matrix entry in '" + text + "'");
  return out;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      std::size_t u2 = 0;
      const double num = std::stod(s.substr(0, slash), &used);
      const double den = std::stod(s.substr(slash + 1), &u2);
      if (used != slash || slash + 1 + u2 != s.size()) throw DomainError("");
      return num / den;
    }
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("malformed number '" + s + "'");
  }
  if (used != s.size()) throw DomainError("malformed number '" + s + "'");
  return v;
}

/// "1.5", "-2i", "1+2i", "i", "1/4".
inline Complex parse_complex(const std::string& s) {
  if (s.empty()) throw DomainError("empty complex number");
  if (s.back() != 'i') return {parse_real(s), 0};
  std::string body = s.substr(0, s.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;)
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  const std::string re = split == std::string::npos ? "" : body.substr(0, split);
  std::string im = split == std::string::npos ? body : body.substr(split);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  return {re.empty() ? 0.0 : parse_real(re), parse_real(im)};
}

inline RationalMatrix2 parse_rational_matrix(const std::string& text) {
  const auto e = split_matrix(text);
  return RationalMatrix2::of(parse_rational(e[0]), parse_rational(e[1]), parse_rational(e[2]), parse_rational(e[3]));
}

/// Random determinant-1 rational matrix [[1,a],[0,1]] [[1,0],[b,1]].
inline RationalMatrix2 random_unimodular(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  const Rational a(num(rng), den(rng)), b(num(rng), den(rng));
  return RationalMatrix2::of(1, a, 0, 1) * RationalMatrix2::of(1, 0, b, 1);
}

inline json complex_matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline json real_matrix_json(const RealMat2& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

inline json rational_matrix_json(const RationalMatrix2& m) {
  return json::array({json::array({to_string(m.e[0]), to_string(m.e[1])}),
                      json::array({to_string(m.e[2]), to_string(m.e[3])})});
}

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the command-specific report fields and a
// one-line summary.

struct Outcome {
  json fields;
  std::string summary;
};

inline Outcome run_parse(const RunConfig& c) {
  const Word w = parse_word(c.word, c.rank);
  const auto [conj, core] = cyclic_reduction(w);
  json j{{"input", c.word},
         {"word", render(w)},
         {"rank", w.rank()},
         {"length", w.length()},
         {"identity", w.is_identity()},
         {"exponent_sums", exponent_sums(w)},
         {"cyclic_core", render(core)},
         {"cyclic_conjugator", render(conj)},
         {"inverse", render(inverse(w))}};
  if (w.is_identity()) {
    j["root"] = nullptr;
    j["power_exponent"] = nullptr;
  } else {
    const auto [root, exponent] = proper_power_root(w);
    j["root"] = render(root);
    j["power_exponent"] = exponent;
  }
  return {j, "parse " + c.word + " -> " + render(w) + (w.is_identity() ? " (identity)" : "")};
}

inline Outcome run_group(const RunConfig& c, std::ostream& err) {
  const FiniteGroup G = resolve_group(c, err);
  json j{{"group", group_json(G)}, {"class_count", G.classes().size()}, {"center_order", G.center().size()},
         {"element_hash", hex64(G.element_table_hash())}, {"action", c.action}};
  json classes = json::array();
  for (const auto& cl : G.classes())
    classes.push_back({{"class", cl.id}, {"rep_index", cl.representative}, {"element_order", cl.element_order},
                       {"class_size", cl.size}, {"inverse_class", cl.inverse_class}});
  j["classes"] = classes;
  std::string summary = "group " + G.name() + ": order " + std::to_string(G.order()) + ", " +
                        std::to_string(G.classes().size()) + " classes";
  if (c.action == "cache") {
    const CacheFormat f = c.cache_format == "json" ? CacheFormat::Json : CacheFormat::Binary;
    const auto path = cache_dir() / cache_file_name(G.spec(), f);
    save_group_cache(G, path, f);
    const FiniteGroup back = load_group_cache(path);
    if (back.element_table_hash() != G.element_table_hash()) throw DomainError("cache round-trip changed element table");
    j["cache_file"] = cache_file_name(G.spec(), f);
    j["cache_format"] = c.cache_format;
    err << "cache written to " << path.string() << "\n";
    summary += ", cached";
  }
  return {j, summary};
}

inline Outcome run_image(const RunConfig& c, std::ostream& err) {
  const FiniteGroup G = resolve_group(c, err);
  const ImageReport r = image(G, parse_word(c.word), enumeration_options(c));
  return {to_json(G, r), "image " + G.name() + " " + render(r.word) + ": " + std::to_string(r.element_count) + "/" +
                             std::to_string(G.order()) + (r.surjective ? " surjective" : " not surjective")};
}

inline Outcome run_fibers(const RunConfig& c, std::ostream& err) {
  const FiniteGroup G = resolve_group(c, err);
  const FiberReport r = fibers(G, parse_word(c.word), enumeration_options(c));
  std::string s = "fibers " + G.name() + " " + render(r.word) + ":";
  for (std::size_t i = 0; i < r.fibers.size(); ++i) s += " " + std::to_string(r.fibers[i]);
  return {to_json(G, r), s};
}

inline Outcome run_chirality(const RunConfig& c, std::ostream& err) {
  const FiniteGroup G = resolve_group(c, err);
  const ChiralityReport r = chirality_scan(G, parse_word(c.word), enumeration_options(c));
  std::string s = "chirality " + G.name() + " " + render(r.fibers.word) + ": " +
                  (r.weakly_chiral ? "weakly chiral" : "achiral");
  for (const auto& p : r.pairs)
    if (p.fiber != p.inverse_fiber && p.class_id < p.inverse_class)
      s += " (" + std::to_string(p.fiber) + " vs " + std::to_string(p.inverse_fiber) + ")";
  return {to_json(G, r), s};
}

inline Outcome run_width(const RunConfig& c, std::ostream& err) {
  const FiniteGroup G = resolve_group(c, err);
  const WidthReport r = width(G, parse_word(c.word), c.width_cap, enumeration_options(c));
  std::string s = "width " + G.name() + " " + render(r.word) + ": ";
  if (r.width) s += std::to_string(*r.width);
  else if (r.trivial_image) s += "undefined (trivial image)";
  else s += "exceeds cap";
  if (r.generated_is_proper) s += " (proper subgroup of order " + std::to_string(r.generated_order) + ")";
  return {to_json(G, r), s};
}

inline Outcome run_waring(const RunConfig& c, std::ostream& err) {
  const FiniteGroup G = resolve_group(c, err);
  std::vector<Word> factors;
  for (const auto& f : c.factors) factors.push_back(parse_word(f));
  const WaringReport r = waring_check(G, factors, c.shared_variables ? VariableScope::Shared : VariableScope::Separate,
                                      enumeration_options(c));
  std::string s = "waring " + G.name() + ": " + std::to_string(r.covered_count) + "/" + std::to_string(G.order());
  s += r.covers_group ? " covers G" : (r.covers_noncentral ? " covers G\\Z(G)" : " misses classes " + join_ints(r.missed_classes));
  return {to_json(G, r), s};
}

inline Outcome run_scan(const RunConfig& c) {
  BuildOptions build;
  build.order_cap = c.order_cap;
  GroupKind kind = group_kind_from_string(c.kind);
  const auto rows = surjectivity_scan(c.word, kind, c.n, c.primes, c.params, enumeration_options(c), build);
  std::vector<int> failing, errors;
  for (const auto& r : rows) {
    if (!r.error.empty()) errors.push_back(r.p);
    else if (r.surjective && !*r.surjective) failing.push_back(r.p);
  }
  json j{{"template", c.word}, {"rows", to_json(rows)}, {"non_surjective_primes", failing}, {"error_primes", errors}};
  return {j, "scan " + c.word + ": " + std::to_string(rows.size()) + " rows, non-surjective at p in {" +
                 join_ints(failing) + "}" + (errors.empty() ? "" : ", errors at {" + join_ints(errors) + "}")};
}

inline Outcome run_trace_poly(const RunConfig& c) {
  const Word w = parse_word(c.word);
  std::vector<RationalMatrix2> constants;
  for (const auto& m : c.constants) constants.push_back(parse_rational_matrix(m));
  const std::size_t needed = w.rank() > 0 ? static_cast<std::size_t>(w.rank() - 1) : 0;
  if (constants.size() > needed) throw DomainError("too many constants for a word of rank " + std::to_string(w.rank()));
  if (constants.size() < needed) {
    if (!c.random_constants)
      throw DomainError("word of rank " + std::to_string(w.rank()) + " needs " + std::to_string(needed) +
                        " constants (pass --constant or --random-constants)");
    std::mt19937_64 rng(c.seed);
    while (constants.size() < needed) constants.push_back(random_unimodular(rng));
  }
  const Word ww = w.rank() == 0 ? w.with_rank(1) : w;
  const TracePolynomial t = trace_polynomial(ww, constants);
  json j = to_json(t);
  j["word"] = render(ww);
  json cs = json::array();
  for (const auto& m : constants) cs.push_back(rational_matrix_json(m));
  j["constants"] = cs;
  return {j, "trace-poly " + render(ww) + ": phi = " + t.phi.to_string() + ", phi(0,0) = " + to_string(t.phi_at_origin)};
}

inline Outcome run_magnus(const RunConfig& c) {
  const Word w = parse_word(c.word);
  const PolyMatrix2 m = magnus_evaluate(w, c.rank_cap);
  const DerivedClass d = derived_class(w, c.rank_cap);
  const UnipotentCertificate u = unipotent_certificate(w, c.rank_cap);
  json j{{"word", render(w)},
         {"matrix", to_json(m)},
         {"derived_class", to_string(d)},
         {"unipotent_certificate", {{"available", u.available}, {"rationale", u.rationale}}}};
  return {j, "magnus " + render(w) + ": " + to_string(d)};
}

inline Outcome run_thom(const RunConfig& c) {
  const DecayReport r = thom_decay(c.dim, c.kmax, c.samples, c.seed, norm_from_string(c.norm), c.threads, c.thom_cap);
  json j = to_json(r);
  j["seed"] = c.seed;
  const auto& last = r.rows.back();
  std::ostringstream s;
  s << "thom SU(" << c.dim << ") k=" << last.k << ": median " << last.median << ", inequality violations "
    << r.inequality_violations << "/" << r.inequality_checks;
  return {j, s.str()};
}

inline UnitaryMatrix solve_target(const RunConfig& c) {
  if (c.target == "random") {
    std::mt19937_64 rng(stream_seed(c.seed, 0xA11CE));
    return haar_su(c.dim, rng);
  }
  if (c.target == "identity") return UnitaryMatrix::identity(c.dim);
  if (c.target == "minus-identity") {
    if (c.dim % 2) throw DomainError("-I is not in SU(n) for odd n");
    return UnitaryMatrix::from_matrix(-CMatrix::Identity(c.dim, c.dim));
  }
  if (c.dim != 2) throw DomainError("explicit targets are 2x2; use --dim 2");
  const auto e = split_matrix(c.target);
  CMatrix m(2, 2);
  m << parse_complex(e[0]), parse_complex(e[1]), parse_complex(e[2]), parse_complex(e[3]);
  return UnitaryMatrix::from_matrix(m);
}

inline Outcome run_solve(const RunConfig& c) {
  const Word w = parse_word(c.word);
  const UnitaryMatrix target = solve_target(c);
  SolverOptions opt;
  opt.budget = c.budget;
  opt.tolerance = c.tol;
  const SolveResult r = solve_word_equation(w, target, c.seed, opt);
  json tuple = json::array();
  for (const auto& u : r.tuple) tuple.push_back(complex_matrix_json(u.matrix()));
  json j{{"word", render(w)},         {"dim", c.dim},
         {"target", complex_matrix_json(target.matrix())},
         {"tuple", tuple},            {"residual", r.residual},
         {"converged", r.converged},  {"evaluations", r.evaluations},
         {"restarts", r.restarts}};
  std::ostringstream s;
  s << "solve " << render(w) << " in SU(" << c.dim << "): residual " << r.residual
    << (r.converged ? " (converged)" : " (budget exhausted)");
  return {j, s.str()};
}

inline Outcome run_density(const RunConfig& c) {
  const Word w = parse_word(c.word);
  const DensityReport r = rank_metric_density(c.dim, w, c.epsilon, c.samples, c.targets, c.seed);
  json j{{"word", render(w)},        {"dim", r.dim},         {"epsilon", r.epsilon}, {"samples", r.samples},
         {"targets", r.targets},     {"covered_fraction", r.covered_fraction}};
  std::ostringstream s;
  s << "density " << render(w) << " in SU(" << c.dim << "), eps " << c.epsilon << ": " << r.covered_fraction;
  return {j, s.str()};
}

inline Outcome run_root(const RunConfig& c) {
  const auto e = split_matrix(c.matrix);
  json j{{"group", c.root_group}, {"matrix_text", c.matrix}};
  bool exists = false;
  if (c.root_group == "sl2r") {
    if (c.degree != 2) throw DomainError("sl2r decides square roots only (--degree 2)");
    RealMat2 g;
    g << parse_real(e[0]), parse_real(e[1]), parse_real(e[2]), parse_real(e[3]);
    const auto r = sqrt_exists_sl2r(g);
    exists = r.exists;
    j["degree"] = 2;
    j["exists"] = r.exists;
    j["witness"] = r.witness ? real_matrix_json(*r.witness) : json(nullptr);
    j["residual"] = r.residual;
  } else {
    ComplexMat2 g;
    g << parse_complex(e[0]), parse_complex(e[1]), parse_complex(e[2]), parse_complex(e[3]);
    const auto r = root_sl2c(g, c.degree);
    exists = r.exists;
    j["degree"] = c.degree;
    j["exists"] = r.exists;
    j["witness"] = r.witness ? complex_matrix_json(*r.witness) : json(nullptr);
    j["residual"] = r.residual;
  }
  return {j, "root " + c.root_group + " degree " + std::to_string(c.degree) + ": " + (exists ? "exists" : "none")};
}

inline Outcome run_bracket(const RunConfig& c) {
  const MatrixSpace space = matrix_space_from_string(c.space);
  const BracketImageReport im = bracket_image(c.p, space, c.threads, c.prime_cap);
  const BracketWidthReport w = bracket_width(c.p, space, c.width_cap, c.threads, c.prime_cap);
  std::string s = "bracket p=" + std::to_string(c.p) + " " + c.space + ": image " + std::to_string(im.image_size) + "/" +
                  std::to_string(im.traceless_count) + ", width " +
                  (w.width ? std::to_string(*w.width) : std::string(w.exceeds_cap ? "exceeds cap" : "undefined"));
  return {to_json(im, w), s};
}

// ---------------------------------------------------------------------------
// Driver

inline std::filesystem::path default_out(const RunConfig& c) {
  return "wordmap-" + c.command + "." + c.format;
}

/// Executes a validated config: writes the report and prints its path and a
/// summary line to `out`. Returns the process exit status.
inline int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  RunConfig c = config;
  try {
    validate(c);
    if (c.command == "rerun") {
      const json old = read_json_file(c.report);
      if (!old.contains("config")) throw UsageError("report has no embedded config");
      RunConfig again = config_from_json(old.at("config"));
      again.out = c.out;
      if (again.command == "rerun") throw UsageError("embedded config cannot itself be a rerun");
      return run(again, out, err);
    }

    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    const std::string& cmd = c.command;
    if (cmd == "parse") o = run_parse(c);
    else if (cmd == "group") o = run_group(c, err);
    else if (cmd == "image") o = run_image(c, err);
    else if (cmd == "fibers") o = run_fibers(c, err);
    else if (cmd == "chirality") o = run_chirality(c, err);
    else if (cmd == "width") o = run_width(c, err);
    else if (cmd == "waring") o = run_waring(c, err);
    else if (cmd == "scan") o = run_scan(c);
    else if (cmd == "trace-poly") o = run_trace_poly(c);
    else if (cmd == "magnus") o = run_magnus(c);
    else if (cmd == "thom") o = run_thom(c);
    else if (cmd == "solve") o = run_solve(c);
    else if (cmd == "density") o = run_density(c);
    else if (cmd == "root") o = run_root(c);
    else if (cmd == "bracket") o = run_bracket(c);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    json report{{"tool", "wordmap-lab"}, {"version", WORDMAP_VERSION}, {"command", cmd}};
    for (auto& [k, v] : o.fields.items()) report[k] = v;
    report["config"] = to_json(c);
    report["seed"] = c.seed;
    report["threads"] = c.threads;
    report["timing_ms"] = c.stable ? 0.0 : ms;

    const std::filesystem::path path = c.out.empty() ? default_out(c) : std::filesystem::path(c.out);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DomainError("cannot write report " + path.string());
    file << (c.format == "csv" ? to_csv(report) : report.dump(2) + "\n");
    if (!file) throw DomainError("failed writing report " + path.string());
    out << path.string() << "\n" << o.summary << "\n";
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

/// Full entry point: argv parsing plus run.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> c;
  try {
    c = parse_command_line(argc, argv, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  if (!c) return 0;
  return run(*c, out, err);
}

}  // namespace wordmap::cli
