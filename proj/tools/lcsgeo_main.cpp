// Command-line front end: load a manifold definition file, sample points,
// run the requested verification suites and emit a text report on stdout
// (optionally a JSON report to a file). Exit status 0 iff every suite passed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lcsgeo/suites.hpp"
#include "lcsgeo/version.hpp"

namespace {

bool parse_window(const std::string& spec,
                  std::pair<std::string, std::pair<double, double>>& out) {
  auto eq = spec.find('=');
  auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || colon == std::string::npos) return false;
  try {
    out.first = spec.substr(0, eq);
    out.second.first = std::stod(spec.substr(eq + 1, colon - eq - 1));
    out.second.second = std::stod(spec.substr(colon + 1));
  } catch (...) {
    return false;
  }
  return true;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chart-based pseudo-Riemannian verification engine"};
  app.set_version_flag("--version", std::string("lcsgeo ") + lcsgeo::kVersion);

  std::string command;
  std::string fixture_path;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int points = 0;
  bool points_given = false;
  std::string json_path;
  std::vector<std::string> windows;

  CLI::App* run = app.add_subcommand("run", "run verification suites");
  run->add_option("command", command, "one of: check-structure curvature "
                                      "soliton-fit soliton-verify theorems "
                                      "gradient bounds bochner all")
      ->required();
  run->add_option("fixture", fixture_path, "manifold definition file")
      ->required();
  run->add_option("--tol", tol, "residual tolerance (default 1e-9)");
  run->add_option("--seed", seed, "sampling seed override")
      ->each([&](const std::string&) { seed_given = true; });
  run->add_option("--points", points, "random sample count override")
      ->each([&](const std::string&) { points_given = true; });
  run->add_option("--json", json_path, "write a JSON report to this path");
  run->add_option("--window", windows,
                  "coordinate range override, e.g. z=1:4 (repeatable)");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    lcsgeo::Fixture fx = lcsgeo::load_manifold(fixture_path);
    lcsgeo::RunOptions opt;
    opt.tol = tol;
    if (seed_given) opt.seed = seed;
    if (points_given) opt.points = points;
    for (const std::string& w : windows) {
      std::pair<std::string, std::pair<double, double>> parsed;
      if (!parse_window(w, parsed)) {
        std::cerr << "bad --window '" << w << "', expected coord=lo:hi\n";
        return 2;
      }
      opt.windows.push_back(std::move(parsed));
    }

    lcsgeo::Report rep = lcsgeo::run_command(fx, command, opt);
    std::cout << lcsgeo::render_text(rep);
    std::fprintf(stderr, "elapsed: %.3fs\n", rep.elapsed_seconds);

    if (!json_path.empty()) {
      std::ofstream out(json_path);
      if (!out) {
        std::cerr << "cannot write JSON report to '" << json_path << "'\n";
        return 2;
      }
      out << lcsgeo::render_json(rep).dump(2) << "\n";
    }
    return rep.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
