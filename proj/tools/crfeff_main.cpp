// Command-line front end: run verification suites over a geometry and emit
// a report, or export a built-in geometry as a spec file.
//
// Exit codes: 0 pass, 1 fail, 2 input error, 3 numeric error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "crfeff/suites.hpp"

using namespace crfeff;

int main(int argc, char** argv) {
  // accept the documented "--tol.<suite>=<x>" spelling
  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--tol.", 0) == 0)
      args.push_back("--tol=" + a.substr(6));
    else
      args.push_back(a);
  }
  std::vector<char*> argp;
  for (auto& a : args) argp.push_back(a.data());

  CLI::App app{"numerical verification engine for almost CR geometries and their Fefferman spaces"};
  app.require_subcommand(0, 1);

  RunConfig cfg;
  std::vector<std::string> tol_args;
  CLI::App* run = app.add_subcommand("run", "run verification suites (default)");
  run->add_option("--spec", cfg.spec_path, "geometry spec file");
  run->add_option("--gallery", cfg.gallery, "built-in geometry name");
  run->add_option("--suite", cfg.suite,
                  "webster | cr-einstein | fefferman | characterize | scales | all")
      ->default_val("all");
  run->add_option("--points", cfg.points, "sample point count")->default_val(50);
  run->add_option("--seed", cfg.seed, "sampling seed")->default_val(0);
  run->add_option("--order", cfg.order, "jet order override (0 = per-suite defaults)")
      ->default_val(0);
  run->add_option("--tol", tol_args, "per-suite tolerance override, <suite>=<value>");
  run->add_option("--format", cfg.format, "human | structured")->default_val("human");

  std::string export_name;
  CLI::App* exp = app.add_subcommand("export", "print a built-in geometry as a spec file");
  exp->add_option("name", export_name, "gallery name")->required();

  CLI::App* list = app.add_subcommand("list", "list built-in geometries");

  try {
    app.parse(static_cast<int>(argp.size()), argp.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      for (const auto& n : gallery::names()) std::cout << n << "\n";
      return 0;
    }
    if (exp->parsed()) {
      std::cout << serialize_geometry(gallery::by_name(export_name));
      return 0;
    }
    // default subcommand: run
    for (const auto& t : tol_args) {
      auto eq = t.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad --tol argument: " + t);
      cfg.tol[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    }
    if (const char* w = std::getenv("CRFEFF_WORKERS")) cfg.workers = std::max(1, std::atoi(w));
    VerificationReport rep = run_config(cfg);
    if (cfg.format == "structured")
      std::cout << rep.to_ldjson();
    else
      std::cout << rep.to_table();
    return rep.overall_pass() ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
}
