#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lcsgeo/manifold.hpp"
#include "lcsgeo/sampling.hpp"
#include "lcsgeo/soliton.hpp"

namespace lcsgeo {

// ---------------------------------------------------------------------------
// Manifold definition files.
//
// Line-oriented INI-style text:
//
//   # comment
//   [manifold]
//   name   = "lcs3-example"
//   dim    = 3
//   coords = "x, y, z"
//   domain = "z"                  # expressions that must stay nonzero
//
//   [constants]                   # optional named numeric constants,
//   r = "2"                       # substituted into every expression
//
//   [metric]                      # g_ij entries; unspecified -> 0,
//   g11 = "1/z^4"                 # diagonal entries are mandatory
//
//   [frame]                       # optional: E1.. rows of components
//   E1 = "z^2, 0, 0"
//
//   [structure]                   # optional: xi components, alpha optional
//   xi = "0, 0, 1"
//   alpha = "-2/z"
//
//   [soliton]                     # optional
//   kind = "eta-ricci"            # or "eta-einstein"
//   lambda = "2*(z-5)/z^2"
//   mu = "2*(z+1)/z^2"
//   f = "-z"                      # potential (gradient case)
//   xi = "..."                    # optional explicit potential field
//
//   [fields]                      # optional named scalar fields
//
//   [sampling]                    # per-coordinate ranges plus controls
//   z = "1, 4"
//   grid = 3
//   random = 8
//   seed = 0
// ---------------------------------------------------------------------------

struct Fixture {
  ChartManifold manifold;
  std::optional<std::vector<Expr>> xi;
  std::optional<Expr> alpha_declared;
  std::optional<SolitonParams> soliton;
  SampleSpec sampling;
};

namespace detail {

struct RawEntry {
  std::string value;
  int line = 0;
};

using RawSection = std::vector<std::pair<std::string, RawEntry>>;

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline const RawEntry* find_key(const RawSection& sec, const std::string& key) {
  for (auto& [k, v] : sec)
    if (k == key) return &v;
  return nullptr;
}

} // namespace detail

inline Fixture load_manifold_string(const std::string& text,
                                    const std::string& display_name = "<string>") {
  using detail::RawEntry;
  using detail::RawSection;

  std::map<std::string, RawSection> sections;
  std::string current;
  {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      // strip comments outside quotes
      bool quoted = false;
      std::string clean;
      for (char c : line) {
        if (c == '"') quoted = !quoted;
        if (c == '#' && !quoted) break;
        clean += c;
      }
      clean = detail::trim(clean);
      if (clean.empty()) continue;
      if (clean.front() == '[') {
        if (clean.back() != ']')
          throw FixtureError("malformed section header", lineno);
        current = detail::trim(clean.substr(1, clean.size() - 2));
        if (current.empty()) throw FixtureError("empty section name", lineno);
        sections[current];
        continue;
      }
      std::size_t eq = clean.find('=');
      if (eq == std::string::npos)
        throw FixtureError("expected 'key = value'", lineno);
      if (current.empty())
        throw FixtureError("entry outside of any [section]", lineno);
      std::string key = detail::trim(clean.substr(0, eq));
      std::string value = detail::strip_quotes(detail::trim(clean.substr(eq + 1)));
      for (auto& [k, v] : sections[current])
        if (k == key) throw FixtureError("duplicate key '" + key + "'", lineno);
      sections[current].push_back({key, RawEntry{value, lineno}});
    }
  }

  auto section = [&](const std::string& name) -> const RawSection* {
    auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
  };
  auto require_entry = [&](const RawSection& sec, const std::string& key,
                           const std::string& where) -> const RawEntry& {
    const RawEntry* e = detail::find_key(sec, key);
    if (!e) throw FixtureError("missing key '" + key + "' in [" + where + "]", 1);
    return *e;
  };

  const RawSection* man = section("manifold");
  if (!man) throw FixtureError("missing [manifold] section", 1);

  Fixture fx;
  ChartManifold& m = fx.manifold;
  m.name = detail::find_key(*man, "name") ? detail::find_key(*man, "name")->value
                                          : display_name;

  {
    const RawEntry& dim = require_entry(*man, "dim", "manifold");
    try {
      m.n = std::stoi(dim.value);
    } catch (...) {
      throw FixtureError("dim is not an integer", dim.line);
    }
    const RawEntry& coords = require_entry(*man, "coords", "manifold");
    m.coords = detail::split_commas(coords.value);
    if (static_cast<int>(m.coords.size()) != m.n)
      throw FixtureError("coords count does not match dim", coords.line);
    for (auto& c : m.coords)
      if (c.empty()) throw FixtureError("empty coordinate name", coords.line);
  }

  // Symbol set visible to expression parsing: coordinates then constants.
  std::vector<std::string> symbols = m.coords;
  std::vector<std::pair<int, Expr>> const_values;
  if (const RawSection* consts = section("constants")) {
    for (auto& [key, entry] : *consts) {
      Expr value;
      try {
        value = parse_expression(entry.value, {});
      } catch (const ParseError& pe) {
        throw FixtureError("constant '" + key + "': " + pe.what(), entry.line);
      }
      if (value->kind != ExprKind::Constant)
        throw FixtureError("constant '" + key + "' must be a number",
                           entry.line);
      const_values.push_back({static_cast<int>(symbols.size()), value});
      symbols.push_back(key);
    }
  }

  auto parse_in_ctx = [&](const std::string& src, int line) -> Expr {
    Expr e;
    try {
      e = parse_expression(src, symbols);
    } catch (const ParseError& pe) {
      throw FixtureError(std::string(pe.what()), line);
    }
    for (auto& [id, value] : const_values) e = substitute(e, id, value);
    return simplify(e);
  };

  if (const RawEntry* dom = detail::find_key(*man, "domain")) {
    if (!dom->value.empty())
      for (const std::string& part : detail::split_commas(dom->value))
        m.domain.push_back(parse_in_ctx(part, dom->line));
  }

  // Metric: accept keys gIJ or g_I_J with 1-based indices.
  const RawSection* met = section("metric");
  if (!met) throw FixtureError("missing [metric] section", 1);
  m.metric.assign(m.n, std::vector<Expr>(m.n, lit(0)));
  std::vector<std::vector<bool>> given(m.n, std::vector<bool>(m.n, false));
  for (auto& [key, entry] : *met) {
    std::string ix = key;
    if (ix.rfind("g", 0) != 0)
      throw FixtureError("unexpected metric key '" + key + "'", entry.line);
    ix = ix.substr(1);
    std::string digits;
    for (char c : ix)
      if (c != '_') digits += c;
    if (digits.size() != 2 || !std::isdigit((unsigned char)digits[0]) ||
        !std::isdigit((unsigned char)digits[1]))
      throw FixtureError("metric key '" + key + "' must name two indices",
                         entry.line);
    int i = digits[0] - '0';
    int j = digits[1] - '0';
    if (i < 1 || i > m.n || j < 1 || j > m.n)
      throw FixtureError("metric index out of range in '" + key + "' (dim " +
                             std::to_string(m.n) + ")",
                         entry.line);
    if (given[i - 1][j - 1] || given[j - 1][i - 1])
      throw FixtureError("metric entry g" + std::to_string(i) +
                             std::to_string(j) + " given twice",
                         entry.line);
    Expr e = parse_in_ctx(entry.value, entry.line);
    m.metric[i - 1][j - 1] = e;
    m.metric[j - 1][i - 1] = e;
    given[i - 1][j - 1] = given[j - 1][i - 1] = true;
  }
  for (int i = 0; i < m.n; ++i)
    if (!given[i][i])
      throw FixtureError("missing diagonal metric entry g" +
                             std::to_string(i + 1) + std::to_string(i + 1),
                         1);

  if (const RawSection* fr = section("frame")) {
    FrameField frame;
    frame.vecs.resize(m.n);
    for (int a = 1; a <= m.n; ++a) {
      const RawEntry& entry =
          require_entry(*fr, "E" + std::to_string(a), "frame");
      auto parts = detail::split_commas(entry.value);
      if (static_cast<int>(parts.size()) != m.n)
        throw FixtureError("frame vector E" + std::to_string(a) + " needs " +
                               std::to_string(m.n) + " components",
                           entry.line);
      for (auto& part : parts)
        frame.vecs[a - 1].push_back(parse_in_ctx(part, entry.line));
    }
    m.frame = std::move(frame);
  }

  if (const RawSection* fields = section("fields")) {
    for (auto& [key, entry] : *fields)
      m.scalar_fields[key] = parse_in_ctx(entry.value, entry.line);
  }

  if (const RawSection* st = section("structure")) {
    const RawEntry& xi = require_entry(*st, "xi", "structure");
    auto parts = detail::split_commas(xi.value);
    if (static_cast<int>(parts.size()) != m.n)
      throw FixtureError("xi needs " + std::to_string(m.n) + " components",
                         xi.line);
    std::vector<Expr> comps;
    for (auto& part : parts) comps.push_back(parse_in_ctx(part, xi.line));
    fx.xi = std::move(comps);
    if (const RawEntry* a = detail::find_key(*st, "alpha"))
      fx.alpha_declared = parse_in_ctx(a->value, a->line);
  }

  if (const RawSection* sol = section("soliton")) {
    SolitonParams params;
    if (const RawEntry* kind = detail::find_key(*sol, "kind")) {
      if (kind->value == "eta-ricci")
        params.kind = SolitonKind::EtaRicci;
      else if (kind->value == "eta-einstein")
        params.kind = SolitonKind::EtaEinstein;
      else
        throw FixtureError("unknown soliton kind '" + kind->value + "'",
                           kind->line);
    }
    if (const RawEntry* e = detail::find_key(*sol, "lambda"))
      params.lambda = parse_in_ctx(e->value, e->line);
    if (const RawEntry* e = detail::find_key(*sol, "mu"))
      params.mu = parse_in_ctx(e->value, e->line);
    if (const RawEntry* e = detail::find_key(*sol, "f"))
      params.f = parse_in_ctx(e->value, e->line);
    if (const RawEntry* e = detail::find_key(*sol, "xi")) {
      auto parts = detail::split_commas(e->value);
      if (static_cast<int>(parts.size()) != m.n)
        throw FixtureError("soliton xi needs " + std::to_string(m.n) +
                               " components",
                           e->line);
      std::vector<Expr> comps;
      for (auto& part : parts) comps.push_back(parse_in_ctx(part, e->line));
      params.xi = std::move(comps);
    }
    fx.soliton = std::move(params);
  }

  if (const RawSection* sam = section("sampling")) {
    for (auto& [key, entry] : *sam) {
      if (key == "grid") {
        fx.sampling.grid_per_axis = std::stoi(entry.value);
      } else if (key == "random") {
        fx.sampling.random_count = std::stoi(entry.value);
      } else if (key == "seed") {
        fx.sampling.seed = std::stoull(entry.value);
      } else {
        bool is_coord = false;
        for (auto& c : m.coords) is_coord |= (c == key);
        if (!is_coord)
          throw FixtureError("sampling key '" + key +
                                 "' is not a coordinate or control",
                             entry.line);
        auto parts = detail::split_commas(entry.value);
        if (parts.size() != 2)
          throw FixtureError("sampling range needs 'lo, hi'", entry.line);
        double lo = eval(parse_in_ctx(parts[0], entry.line), {});
        double hi = eval(parse_in_ctx(parts[1], entry.line), {});
        fx.sampling.ranges[key] = {lo, hi};
      }
    }
  }

  m.finalize();
  return fx;
}

inline Fixture load_manifold(const std::string& path) {
  std::ifstream in(path);
  std::string actual = path;
  if (!in) {
    actual = path + ".mf";
    in.open(actual);
    if (!in)
      throw FixtureError("cannot open manifold file '" + path + "'", 0);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_manifold_string(buf.str(), actual);
}

} // namespace lcsgeo
