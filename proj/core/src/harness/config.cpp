#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "margin_paths/errors.hpp"
#include "margin_paths/harness.hpp"
#include "margin_paths/solvers.hpp"

namespace mpaths::harness {

using nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "margin_gap",   "homog_rate", "log_predictor",          "powerlog_predictor",  "ensemble_discard",
      "svm_bias",     "lexicographic", "optimization_alignment", "regularization_link", "pareto_check"};
  return names;
}

std::vector<std::string> statements_for(const std::string& experiment) {
  if (experiment == "margin_gap") return {"L3", "C1", "L2"};
  if (experiment == "homog_rate") return {"EX1"};
  if (experiment == "log_predictor") return {"EX2"};
  if (experiment == "powerlog_predictor") return {"EX3"};
  if (experiment == "ensemble_discard") return {"T1"};
  if (experiment == "svm_bias") return {"T1"};
  if (experiment == "lexicographic") return {"T4"};
  if (experiment == "optimization_alignment") return {"T2", "T3"};
  if (experiment == "regularization_link") return {"F10", "F11"};
  if (experiment == "pareto_check") return {"L1"};
  throw ConfigError("/experiment", "unknown experiment '" + experiment + "'");
}

std::vector<double> GridConfig::rho_grid() const {
  if (!(rho_min > 0.0)) throw ConfigError("/grids/rho_min", "must be positive");
  if (!(rho_ratio > 1.0)) throw ConfigError("/grids/rho_ratio", "must exceed 1");
  if (!rho_max) return geometric_grid(rho_min, rho_ratio, rho_count);
  if (*rho_max < rho_min) throw ConfigError("/grids/rho_max", "must be at least rho_min");
  std::vector<double> g;
  for (double r = rho_min; r <= *rho_max * (1.0 + 1e-12); r *= rho_ratio) g.push_back(r);
  if (g.back() < *rho_max * (1.0 - 1e-12)) g.push_back(*rho_max);
  return g;
}

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void require_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError(path + "/" + k, "unknown field");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

std::int64_t get_integer(const json& j, const std::string& path, std::int64_t min) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < min) throw ConfigError(path, "must be at least " + std::to_string(min));
  return v;
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

Rational parse_rational(const std::string& s, const std::string& path) {
  const auto slash = s.find('/');
  auto to_int = [&](std::string_view part) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || p != part.data() + part.size()) throw ConfigError(path, "bad rational '" + s + "'");
    return v;
  };
  const std::string_view sv(s);
  if (slash == std::string::npos) return Rational(to_int(sv));
  return Rational(to_int(sv.substr(0, slash)), to_int(sv.substr(slash + 1)));
}

Rational get_degree(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) return parse_rational(j.get<std::string>(), path);
  throw ConfigError(path, "degree must be an integer or a string \"p/q\"");
}

std::pair<Family, std::optional<Rational>> parse_block(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return {parse_family(j.get<std::string>()), std::nullopt};
    } catch (const ConfigError& e) {
      throw ConfigError(path, e.detail());
    }
  }
  require_keys(j, path, {"family", "order", "eps", "degree"});
  if (!j.contains("family")) throw ConfigError(path + "/family", "missing");
  Family f;
  try {
    f = parse_family(get_string(j["family"], path + "/family"));
  } catch (const ConfigError& e) {
    throw ConfigError(path + "/family", e.detail());
  }
  if (j.contains("order")) f.order = static_cast<int>(get_integer(j["order"], path + "/order", 1));
  if (j.contains("eps")) f.eps = get_number(j["eps"], path + "/eps");
  std::optional<Rational> deg;
  if (j.contains("degree")) deg = get_degree(j["degree"], path + "/degree");
  return {f, deg};
}

DatasetConfig parse_dataset(const json& j) {
  const std::string p = "/dataset";
  require_keys(j, p, {"generator", "d", "n", "seed", "samples"});
  DatasetConfig ds;
  if (j.contains("samples")) {
    if (j.contains("generator")) throw ConfigError(p, "give either 'generator' or 'samples', not both");
    const json& s = j["samples"];
    if (!s.is_array() || s.empty()) throw ConfigError(p + "/samples", "expected a non-empty array");
    std::size_t d = 0;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string sp = p + "/samples/" + std::to_string(i);
      require_keys(s[i], sp, {"x", "y"});
      if (!s[i].contains("x") || !s[i]["x"].is_array() || s[i]["x"].empty())
        throw ConfigError(sp + "/x", "expected a non-empty array");
      std::vector<double> row;
      for (std::size_t k = 0; k < s[i]["x"].size(); ++k)
        row.push_back(get_number(s[i]["x"][k], sp + "/x/" + std::to_string(k)));
      if (i == 0) d = row.size();
      if (row.size() != d) throw ConfigError(sp + "/x", "dimension differs from the first sample");
      rows.push_back(std::move(row));
      if (!s[i].contains("y")) throw ConfigError(sp + "/y", "missing");
      const auto y = get_integer(s[i]["y"], sp + "/y", -1);
      if (y != 1 && y != -1) throw ConfigError(sp + "/y", "label must be +1 or -1");
      ds.y.push_back(static_cast<int>(y));
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    ds.x = std::move(x);
    ds.generator = "inline";
    ds.d = d;
    ds.n = rows.size();
    return ds;
  }
  if (j.contains("generator")) ds.generator = get_string(j["generator"], p + "/generator");
  if (j.contains("d")) ds.d = static_cast<std::size_t>(get_integer(j["d"], p + "/d", 1));
  if (j.contains("n")) ds.n = static_cast<std::size_t>(get_integer(j["n"], p + "/n", 1));
  if (j.contains("seed")) ds.seed = static_cast<std::uint64_t>(get_integer(j["seed"], p + "/seed", 0));
  return ds;
}

std::vector<double> get_positive_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double v = get_number(j[i], path + "/" + std::to_string(i));
    if (!(v > 0.0)) throw ConfigError(path + "/" + std::to_string(i), "must be positive");
    out.push_back(v);
  }
  return out;
}

}  // namespace

Family parse_family(const std::string& text) {
  std::string name = text;
  std::optional<std::string> arg;
  if (const auto open = text.find('('); open != std::string::npos) {
    if (text.back() != ')') throw ConfigError("", "malformed family '" + text + "'");
    name = text.substr(0, open);
    arg = text.substr(open + 1, text.size() - open - 2);
  }
  auto int_arg = [&](int fallback) {
    if (!arg) return fallback;
    int v = 0;
    const auto [p, ec] = std::from_chars(arg->data(), arg->data() + arg->size(), v);
    if (ec != std::errc() || p != arg->data() + arg->size() || v < 1)
      throw ConfigError("", "bad integer argument in '" + text + "'");
    return v;
  };
  if (name == "Linear") return Family::linear();
  if (name == "PowerLiftedLinear") return Family::power_lifted(int_arg(2));
  if (name == "ProductLinear") return Family::product(int_arg(2));
  if (name == "SquaredBias") return Family::squared_bias();
  if (name == "LogWrap") return Family::log_wrap();
  if (name == "PowerLogWrap") {
    double eps = 1.0;
    if (arg) {
      try {
        std::size_t used = 0;
        eps = std::stod(*arg, &used);
        if (used != arg->size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("", "bad exponent offset in '" + text + "'");
      }
    }
    return Family::power_log(eps);
  }
  throw ConfigError("", "unknown predictor family '" + text + "'");
}

namespace {

/// Optional fields may be given as null, which keeps the default.
bool present(const json& j, const char* key) { return j.contains(key) && !j[key].is_null(); }

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_column(text, e.byte), "invalid JSON");
  }
  require_keys(j, "", {"experiment", "seed", "norm", "dataset", "predictor", "grids", "solver", "output_dir"});

  ExperimentConfig cfg;
  if (!j.contains("experiment")) throw ConfigError("/experiment", "missing");
  cfg.experiment = get_string(j["experiment"], "/experiment");
  statements_for(cfg.experiment);  // rejects unknown names

  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(get_integer(j["seed"], "/seed", 0));
  if (present(j, "norm")) {
    const std::string n = get_string(j["norm"], "/norm");
    try {
      cfg.norm = norm_from_string(n);
    } catch (const Error&) {
      throw ConfigError("/norm", "unknown norm '" + n + "' (expected L2, L1 or Linf)");
    }
  }
  if (present(j, "dataset")) cfg.dataset = parse_dataset(j["dataset"]);
  if (present(j, "predictor")) {
    const json& p = j["predictor"];
    if (!p.is_array() || p.empty()) throw ConfigError("/predictor", "expected a non-empty array of blocks");
    std::vector<Family> fams;
    bool any_degree = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto [f, deg] = parse_block(p[i], "/predictor/" + std::to_string(i));
      fams.push_back(f);
      cfg.declared_degrees.push_back(deg);
      any_degree = any_degree || deg.has_value();
    }
    if (!any_degree) cfg.declared_degrees.clear();
    cfg.predictor = std::move(fams);
  }
  if (j.contains("grids")) {
    const json& g = j["grids"];
    const std::string p = "/grids";
    require_keys(g, p, {"rho_min", "rho_ratio", "rho_count", "rho_max", "c", "gammas", "steps", "eta"});
    if (g.contains("rho_min")) cfg.grids.rho_min = get_number(g["rho_min"], p + "/rho_min");
    if (g.contains("rho_ratio")) cfg.grids.rho_ratio = get_number(g["rho_ratio"], p + "/rho_ratio");
    if (g.contains("rho_count"))
      cfg.grids.rho_count = static_cast<std::size_t>(get_integer(g["rho_count"], p + "/rho_count", 1));
    if (present(g, "rho_max")) cfg.grids.rho_max = get_number(g["rho_max"], p + "/rho_max");
    if (g.contains("c")) cfg.grids.c_grid = get_positive_list(g["c"], p + "/c");
    if (g.contains("gammas")) cfg.grids.gammas = get_positive_list(g["gammas"], p + "/gammas");
    if (g.contains("steps")) cfg.grids.steps = static_cast<std::size_t>(get_integer(g["steps"], p + "/steps", 1));
    if (g.contains("eta")) {
      cfg.grids.eta = get_number(g["eta"], p + "/eta");
      if (!(cfg.grids.eta > 0.0)) throw ConfigError(p + "/eta", "must be positive");
    }
    cfg.grids.rho_grid();  // validates the rho fields
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    const std::string p = "/solver";
    require_keys(s, p, {"restarts", "max_iter", "pgtol", "grid_res"});
    if (s.contains("restarts")) cfg.solver.restarts = static_cast<int>(get_integer(s["restarts"], p + "/restarts", 0));
    if (s.contains("max_iter")) cfg.solver.max_iter = static_cast<int>(get_integer(s["max_iter"], p + "/max_iter", 1));
    if (s.contains("pgtol")) cfg.solver.pgtol = get_number(s["pgtol"], p + "/pgtol");
    if (s.contains("grid_res")) {
      cfg.solver.grid_res = get_number(s["grid_res"], p + "/grid_res");
      if (!(cfg.solver.grid_res > 0.0)) throw ConfigError(p + "/grid_res", "must be positive");
    }
  }
  if (j.contains("output_dir")) cfg.output_dir = get_string(j["output_dir"], "/output_dir");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.where().empty() ? path : path + ": " + e.where(), e.detail());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  j["norm"] = cfg.norm ? json(std::string(to_string(*cfg.norm))) : json(nullptr);
  if (cfg.dataset) {
    const auto& d = *cfg.dataset;
    json dj = json::object();
    if (!d.x) dj = {{"generator", d.generator}, {"d", d.d}, {"n", d.n}, {"seed", d.seed}};
    if (d.x) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < d.x->rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(d.x->cols()));
        for (Eigen::Index k = 0; k < d.x->cols(); ++k) r[static_cast<std::size_t>(k)] = (*d.x)(i, k);
        rows.push_back({{"x", r}, {"y", d.y[static_cast<std::size_t>(i)]}});
      }
      dj["samples"] = rows;
    }
    j["dataset"] = dj;
  } else {
    j["dataset"] = nullptr;
  }
  if (cfg.predictor) {
    json p = json::array();
    for (std::size_t i = 0; i < cfg.predictor->size(); ++i) {
      json b = {{"family", (*cfg.predictor)[i].name()}};
      if (i < cfg.declared_degrees.size() && cfg.declared_degrees[i]) b["degree"] = cfg.declared_degrees[i]->str();
      p.push_back(b);
    }
    j["predictor"] = p;
  } else {
    j["predictor"] = nullptr;
  }
  const auto& g = cfg.grids;
  j["grids"] = {{"rho_min", g.rho_min}, {"rho_ratio", g.rho_ratio}, {"rho_count", g.rho_count},
                {"rho_max", g.rho_max ? json(*g.rho_max) : json(nullptr)},
                {"c", g.c_grid}, {"gammas", g.gammas}, {"steps", g.steps}, {"eta", g.eta}};
  j["solver"] = {{"restarts", cfg.solver.restarts}, {"max_iter", cfg.solver.max_iter},
                 {"pgtol", cfg.solver.pgtol}, {"grid_res", cfg.solver.grid_res}};
  return j.dump();
}

}  // namespace mpaths::harness
