#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "experiments.hpp"
#include "margin_paths/errors.hpp"
#include "margin_paths/format.hpp"
#include "margin_paths/harness.hpp"

namespace mpaths::harness {

namespace {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + tmp.string());
    os << bytes;
    if (!os.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string csv_text(const ExperimentConfig& cfg, const Outcome& out, const std::string& hash) {
  std::ostringstream os;
  os << "# title: margin-paths " << cfg.experiment << " (" << join(statements_for(cfg.experiment), " ") << ")\n";
  os << "# kind: " << out.kind << '\n';
  os << "# seed: " << cfg.seed << '\n';
  os << "# norm: " << out.norm << '\n';
  os << "# grid: " << out.grid << '\n';
  os << "# opts_hash: " << hash << '\n';
  os << "# samples: " << out.samples << '\n';
  os << "# assumptions: " << out.assumptions << '\n';
  os << join(out.columns, ",") << '\n';
  for (const auto& r : out.rows) {
    std::vector<std::string> cells = r;
    cells.resize(out.columns.size());
    os << join(cells, ",") << '\n';
  }
  return os.str();
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  const std::vector<std::string> statements = statements_for(cfg.experiment);
  const std::string cfg_json = config_to_json(cfg);
  const std::string hash = hex(fnv1a(cfg_json));

  Outcome out;
  try {
    out = run_experiment(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    out.checks.push_back({statements.front(), "experiment completes", false, true, e.what()});
  }

  RunResult res;
  res.checks = out.checks;
  res.output_dir = cfg.output_dir;
  bool pass = true;
  for (const auto& c : out.checks)
    if (c.gating && !c.pass) pass = false;
  if (out.checks.empty()) pass = false;
  res.exit_code = pass ? 0 : 1;

  nlohmann::json j;
  j["experiment"] = cfg.experiment;
  j["statements"] = statements;
  j["seed"] = cfg.seed;
  j["opts_hash"] = hash;
  j["config"] = nlohmann::json::parse(cfg_json);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : out.checks)
    checks.push_back({{"statement", c.statement}, {"name", c.name}, {"pass", c.pass}, {"gating", c.gating},
                      {"detail", c.detail}});
  j["checks"] = checks;
  j["notes"] = out.notes;
  j["pass"] = pass;

  std::ostringstream txt;
  txt << "margin-paths " << cfg.experiment << " (statements: " << join(statements, " ") << ")\n";
  for (const auto& c : out.checks)
    txt << "[" << c.statement << "] " << c.name << ": " << (c.pass ? "PASS" : "FAIL")
        << (c.gating ? "" : " (informational)") << "  " << c.detail << '\n';
  for (const auto& n : out.notes) txt << "note: " << n << '\n';
  txt << "overall: " << (pass ? "PASS" : "FAIL") << '\n';

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_atomic(dir / "results.csv", csv_text(cfg, out, hash));
  write_atomic(dir / "summary.json", j.dump(2) + "\n");
  write_atomic(dir / "summary.txt", txt.str());
  return res;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Constrained, margin, regularization and optimization paths of homogeneous predictors",
               "margin-paths"};
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> rho_max;
  std::optional<int> restarts;
  std::optional<double> grid_res;
  app.add_option("experiment", experiment, "one of: " + join(experiment_names(), ", "))->required();
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "run seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--rho-max", rho_max, "largest scale of the rho grid");
  app.add_option("--restarts", restarts, "random restarts per solve");
  app.add_option("--grid-res", grid_res, "grid-oracle resolution");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    statements_for(experiment);
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
      if (cfg.experiment != experiment)
        throw ConfigError(config_path + ": /experiment",
                          "config names '" + cfg.experiment + "' but the command line asks for '" + experiment + "'");
    }
    cfg.experiment = experiment;
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (rho_max) {
      cfg.grids.rho_max = *rho_max;
      cfg.grids.rho_grid();
    }
    if (restarts) {
      if (*restarts < 0) throw ConfigError("--restarts", "must be nonnegative");
      cfg.solver.restarts = *restarts;
    }
    if (grid_res) {
      if (!(*grid_res > 0.0)) throw ConfigError("--grid-res", "must be positive");
      cfg.solver.grid_res = *grid_res;
    }
    const RunResult r = run(cfg);
    std::ifstream txt(std::filesystem::path(cfg.output_dir) / "summary.txt");
    std::cout << txt.rdbuf();
    return r.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "margin-paths: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const SpecError& e) {
    std::cerr << "margin-paths: invalid predictor specification: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "margin-paths: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mpaths::harness
