#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "lcsgeo/checks.hpp"
#include "lcsgeo/version.hpp"

namespace lcsgeo {

struct Row {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = true;
  bool informational = false;
  std::string note;
};

struct SuiteResult {
  std::string name;
  bool applicable = true;
  std::vector<Row> rows;
  double residual_max = 0.0;
  bool pass = true;
};

struct Conventions {
  std::string riemann_sign = "R(X,Y)Z = DxDyZ - DyDxZ - D[X,Y]Z";
  std::string laplacian_sign = "Delta f = metric trace of Hess(f)";
  std::string signature;
};

struct Report {
  std::string fixture;
  std::string version = kVersion;
  Conventions conventions;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::vector<SuiteResult> suites;
  bool pass = true;
  double elapsed_seconds = 0.0; // printed to stderr only, to keep stdout and
                                // JSON byte-identical across runs
};

inline SuiteResult finish_suite(std::string name,
                                const StructureReport& checks, double tol,
                                bool applicable = true) {
  SuiteResult s;
  s.name = std::move(name);
  s.applicable = applicable;
  for (const Check& c : checks) {
    Row r;
    r.name = c.name;
    r.value = c.value;
    r.tol = tol;
    r.informational = c.informational;
    r.note = c.note;
    r.pass = c.informational || c.value < tol;
    s.rows.push_back(std::move(r));
  }
  for (const Row& r : s.rows) {
    if (!r.informational) {
      s.residual_max = std::max(s.residual_max, r.value);
      s.pass = s.pass && r.pass;
    }
  }
  return s;
}

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

inline std::string render_text(const Report& rep) {
  std::string out;
  out += "fixture: " + rep.fixture + "  (engine " + rep.version + ")\n";
  out += "conventions: " + rep.conventions.riemann_sign + "; " +
         rep.conventions.laplacian_sign + "; signature " +
         rep.conventions.signature + "\n";
  char head[96];
  std::snprintf(head, sizeof(head), "tolerance: %.1e  seed: %llu\n", rep.tol,
                static_cast<unsigned long long>(rep.seed));
  out += head;
  for (const SuiteResult& s : rep.suites) {
    out += "\n[" + s.name + "] ";
    if (!s.applicable) {
      out += "not applicable\n";
      continue;
    }
    out += s.pass ? "PASS" : "FAIL";
    out += "  (max residual " + format_value(s.residual_max) + ")\n";
    for (const Row& r : s.rows) {
      std::string status = r.informational ? "info" : (r.pass ? "ok  " : "FAIL");
      out += "  " + status + "  " + format_value(r.value) + "  " + r.name;
      if (!r.note.empty()) out += "  [" + r.note + "]";
      out += "\n";
    }
  }
  out += "\noverall: ";
  out += rep.pass ? "PASS" : "FAIL";
  out += "\n";
  return out;
}

inline nlohmann::ordered_json render_json(const Report& rep) {
  nlohmann::ordered_json j;
  j["fixture"] = rep.fixture;
  j["version"] = rep.version;
  j["conventions"] = {
      {"riemann_sign", rep.conventions.riemann_sign},
      {"laplacian_sign", rep.conventions.laplacian_sign},
      {"signature", rep.conventions.signature},
  };
  j["seed"] = rep.seed;
  j["tolerance"] = rep.tol;
  j["suites"] = nlohmann::ordered_json::array();
  for (const SuiteResult& s : rep.suites) {
    nlohmann::ordered_json js;
    js["name"] = s.name;
    js["applicable"] = s.applicable;
    js["residual_max"] = s.residual_max;
    js["tolerance"] = rep.tol;
    js["pass"] = s.pass;
    js["rows"] = nlohmann::ordered_json::array();
    for (const Row& r : s.rows) {
      nlohmann::ordered_json jr;
      jr["name"] = r.name;
      jr["value"] = r.value;
      jr["informational"] = r.informational;
      jr["pass"] = r.pass;
      if (!r.note.empty()) jr["note"] = r.note;
      js["rows"].push_back(std::move(jr));
    }
    j["suites"].push_back(std::move(js));
  }
  j["pass"] = rep.pass;
  return j;
}

} // namespace lcsgeo
