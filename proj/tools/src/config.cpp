#include "fmgls_cli/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "fmgls/error.hpp"

namespace fmgls::cli {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
}

int get_int(const Json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ValidationError(what + ": expected an integer");
  return v.get<int>();
}

double get_double(const Json& v, const std::string& what) {
  if (!v.is_number()) throw ValidationError(what + ": expected a number");
  return v.get<double>();
}

std::string get_string(const Json& v, const std::string& what) {
  if (!v.is_string()) throw ValidationError(what + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const Json& v, const std::string& what) {
  if (!v.is_boolean()) throw ValidationError(what + ": expected true or false");
  return v.get<bool>();
}

std::uint64_t get_seed(const Json& v) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ValidationError("seed: expected a non-negative integer");
  return v.get<std::uint64_t>();
}

// A scalar is a list of one.
std::vector<Json> as_list(const Json& v) {
  if (v.is_array()) return std::vector<Json>(v.begin(), v.end());
  return {v};
}

void check_kind(const Json& j, const std::string& expected) {
  if (!j.contains("kind")) return;
  const std::string kind = get_string(j.at("kind"), "kind");
  if (kind != "estimation" && kind != "experiment") throw ValidationError("kind: expected 'estimation' or 'experiment'");
  if (kind != expected)
    throw ValidationError("this command needs an " + expected + " config, got an " + kind + " config");
}

}  // namespace

Method parse_method(const std::string& s) {
  if (s == "ols") return Method::ols;
  if (s == "sols") return Method::sols_fm;
  if (s == "sur") return Method::sur_fm;
  if (s == "fgls") return Method::fgls_fm;
  throw ValidationError("unknown method '" + s + "', expected ols, sols, sur or fgls");
}

std::string method_key(Method m) {
  switch (m) {
    case Method::ols: return "ols";
    case Method::sols_fm: return "sols";
    case Method::sur_fm: return "sur";
    case Method::fgls_fm: return "fgls";
    default: return method_name(m);
  }
}

KpssVariant parse_variant(const std::string& s) {
  std::string lower = s;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "sols") return KpssVariant::sols;
  if (lower == "sur") return KpssVariant::sur;
  if (lower == "biam") return KpssVariant::biam;
  throw ValidationError("unknown test variant '" + s + "', expected sols, sur or biam");
}

RunConfig parse_run_config(const Json& j) {
  if (j.is_object()) check_kind(j, "estimation");
  check_keys(j,
             {"kind", "units", "trend_order", "power_order", "method", "lr", "bandwidth", "banding", "alpha",
              "block_size", "variants", "restrictions", "seed", "out"},
             "config");
  RunConfig c;
  if (j.contains("trend_order")) c.default_order.trend_order = get_int(j["trend_order"], "trend_order");
  if (j.contains("power_order")) c.default_order.power_order = get_int(j["power_order"], "power_order");
  if (j.contains("units")) {
    if (!j["units"].is_array() || j["units"].empty()) throw ValidationError("units: expected a non-empty array");
    for (const auto& u : j["units"]) {
      check_keys(u, {"name", "trend_order", "power_order"}, "units[]");
      if (!u.contains("name")) throw ValidationError("units[]: 'name' is required");
      UnitSpec s{get_string(u["name"], "units[].name"), c.default_order};
      if (u.contains("trend_order")) s.order.trend_order = get_int(u["trend_order"], "units[].trend_order");
      if (u.contains("power_order")) s.order.power_order = get_int(u["power_order"], "units[].power_order");
      for (const auto& prev : c.units)
        if (prev.name == s.name) throw ValidationError("units: duplicate unit '" + s.name + "'");
      c.units.push_back(s);
    }
  }
  auto check_order = [](const EquationOrder& o, const std::string& who) {
    if (o.trend_order < 0) throw ValidationError(who + ": trend_order must be >= 0");
    if (o.power_order < 1) throw ValidationError(who + ": power_order must be >= 1");
  };
  check_order(c.default_order, "config");
  for (const auto& u : c.units) check_order(u.order, "unit '" + u.name + "'");

  if (j.contains("method")) {
    c.methods.clear();
    for (const auto& m : as_list(j["method"])) c.methods.push_back(parse_method(get_string(m, "method")));
    if (c.methods.empty()) throw ValidationError("method: empty list");
  }
  if (j.contains("lr")) {
    const std::string lr = get_string(j["lr"], "lr");
    if (lr == "kernel")
      c.pipeline.lr = LrPath::kernel;
    else if (lr == "biam")
      c.pipeline.lr = LrPath::biam;
    else
      throw ValidationError("lr: expected 'kernel' or 'biam'");
  }
  if (j.contains("bandwidth")) {
    c.pipeline.bandwidth = get_double(j["bandwidth"], "bandwidth");
    if (!(*c.pipeline.bandwidth > 0)) throw ValidationError("bandwidth must be positive");
  }
  if (j.contains("banding")) {
    const Json& b = j["banding"];
    check_keys(b, {"q", "H", "l0", "norm", "r"}, "banding");
    if (b.contains("q")) c.pipeline.q = get_int(b["q"], "banding.q");
    if (b.contains("H")) c.pipeline.banding.H = get_int(b["H"], "banding.H");
    if (b.contains("l0")) c.pipeline.banding.l0 = get_int(b["l0"], "banding.l0");
    if (b.contains("norm")) c.pipeline.banding.norm = get_int(b["norm"], "banding.norm");
    if (b.contains("r")) c.pipeline.r = get_int(b["r"], "banding.r");
    if (c.pipeline.q && *c.pipeline.q < 1) throw ValidationError("banding.q must be >= 1");
    if (c.pipeline.r && *c.pipeline.r < 0) throw ValidationError("banding.r must be >= 0");
    if (c.pipeline.banding.norm != 1 && c.pipeline.banding.norm != 2)
      throw ValidationError("banding.norm must be 1 or 2");
    if (b.contains("H") != b.contains("l0")) throw ValidationError("banding: give H and l0 together");
    if (b.contains("H") && (c.pipeline.banding.H < 1 || c.pipeline.banding.l0 < 1))
      throw ValidationError("banding: H and l0 must be >= 1");
  }
  if (j.contains("alpha")) c.alpha = get_double(j["alpha"], "alpha");
  if (!(c.alpha > 0 && c.alpha < 1)) throw ValidationError("alpha must lie in (0, 1)");
  if (j.contains("block_size")) {
    c.block_size = get_int(j["block_size"], "block_size");
    if (*c.block_size < 2) throw ValidationError("block_size must be >= 2");
  }
  if (j.contains("variants")) {
    c.variants.clear();
    for (const auto& v : as_list(j["variants"])) c.variants.push_back(parse_variant(get_string(v, "variants")));
    if (c.variants.empty()) throw ValidationError("variants: empty list");
  }
  if (j.contains("restrictions")) {
    if (!j["restrictions"].is_array()) throw ValidationError("restrictions: expected an array");
    for (const auto& r : j["restrictions"]) {
      check_keys(r, {"equation", "coefficient", "value"}, "restrictions[]");
      if (!r.contains("equation") || !r.contains("coefficient") || !r.contains("value"))
        throw ValidationError("restrictions[]: equation, coefficient and value are required");
      Restriction x{get_string(r["equation"], "restrictions[].equation"),
                    get_int(r["coefficient"], "restrictions[].coefficient"),
                    get_double(r["value"], "restrictions[].value")};
      if (x.coefficient < 1) throw ValidationError("restrictions[].coefficient is 1-based");
      c.restrictions.push_back(x);
    }
  }
  if (j.contains("seed")) c.seed = get_seed(j["seed"]);
  if (j.contains("out")) c.out = get_string(j["out"], "out");
  return c;
}

namespace {

const std::set<std::string> kCellKeys{"setting", "task",  "n",     "T",         "rho",        "rho1",
                                      "rho2",    "rho3",  "rho4",  "lambda",    "theta",      "J",
                                      "presample", "reps", "alpha", "wald_shift", "infeasible"};

// J may be given as "n".
int parse_j(const Json& v, int n) {
  if (v.is_string()) {
    if (v.get<std::string>() != "n") throw ValidationError("J: expected an integer or \"n\"");
    return n;
  }
  return get_int(v, "J");
}

void apply_cell_key(ExperimentCell& cell, const std::string& key, const Json& v, std::optional<Json>& pending_j) {
  DgpConfig& d = cell.dgp;
  if (key == "setting") d.setting = parse_setting(get_string(v, key));
  else if (key == "task") cell.task = parse_task(get_string(v, key));
  else if (key == "n") d.n = get_int(v, key);
  else if (key == "T") d.T = get_int(v, key);
  else if (key == "rho") d.set_rho(get_double(v, key));
  else if (key == "rho1") d.rho1 = get_double(v, key);
  else if (key == "rho2") d.rho2 = get_double(v, key);
  else if (key == "rho3") d.rho3 = get_double(v, key);
  else if (key == "rho4") d.rho4 = get_double(v, key);
  else if (key == "lambda") {
    if (!v.is_array() || v.size() != 2) throw ValidationError("lambda: expected [low, high]");
    d.lambda_low = get_double(v[0], "lambda[0]");
    d.lambda_high = get_double(v[1], "lambda[1]");
  } else if (key == "theta") d.theta = get_double(v, key);
  else if (key == "J") pending_j = v;  // resolved after n is known
  else if (key == "presample") d.presample = get_int(v, key);
  else if (key == "reps") cell.reps = get_int(v, key);
  else if (key == "alpha") cell.alpha = get_double(v, key);
  else if (key == "wald_shift") cell.wald_shift = get_double(v, key);
  else if (key == "infeasible") cell.infeasible = get_bool(v, key);
  else throw ValidationError("unknown cell key '" + key + "'");
}

void finish_cell(ExperimentCell& cell, const std::optional<Json>& pending_j) {
  if (pending_j) cell.dgp.J = parse_j(*pending_j, cell.dgp.n);
  cell.dgp.validate();
  if (cell.reps < 1) throw ValidationError("reps must be >= 1");
  if (!(cell.alpha > 0 && cell.alpha < 1)) throw ValidationError("alpha must lie in (0, 1)");
}

// Nesting order of grid axes, outermost first.
const std::vector<std::string> kGridOrder{"setting", "task",  "n",     "J",         "lambda",     "theta",
                                          "T",       "rho",   "rho1",  "rho2",      "rho3",       "rho4",
                                          "presample", "reps", "alpha", "wald_shift", "infeasible"};

void expand_grid(const Json& grid, const ExperimentCell& base, const std::optional<Json>& base_j,
                 std::vector<ExperimentCell>& out) {
  check_keys(grid, kCellKeys, "grid");
  std::vector<std::pair<std::string, std::vector<Json>>> axes;
  for (const auto& key : kGridOrder) {
    if (!grid.contains(key)) continue;
    const Json& v = grid[key];
    std::vector<Json> values;
    // lambda is itself a pair; a list of pairs is the axis
    if (key == "lambda" && v.is_array() && !v.empty() && v[0].is_array())
      values.assign(v.begin(), v.end());
    else if (key == "lambda")
      values = {v};
    else
      values = as_list(v);
    if (values.empty()) throw ValidationError("grid." + key + ": empty axis");
    axes.emplace_back(key, values);
  }
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    ExperimentCell cell = base;
    std::optional<Json> pending = base_j;
    for (std::size_t a = 0; a < axes.size(); ++a) apply_cell_key(cell, axes[a].first, axes[a].second[idx[a]], pending);
    finish_cell(cell, pending);
    out.push_back(cell);
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return;
    }
    if (axes.empty()) return;
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const Json& j) {
  std::set<std::string> allowed{"kind", "name", "seed", "cells", "grid", "out"};
  allowed.insert(kCellKeys.begin(), kCellKeys.end());
  if (j.is_object()) check_kind(j, "experiment");
  check_keys(j, allowed, "config");
  ExperimentConfig c;
  if (j.contains("name")) c.name = get_string(j["name"], "name");
  if (j.contains("seed")) c.seed = get_seed(j["seed"]);
  if (j.contains("out")) c.out = get_string(j["out"], "out");

  // top-level cell keys are defaults for every cell
  ExperimentCell base;
  std::optional<Json> base_j;
  for (const auto& [key, v] : j.items())
    if (kCellKeys.count(key)) apply_cell_key(base, key, v, base_j);

  if (j.contains("grid"))
    for (const auto& g : as_list(j["grid"])) expand_grid(g, base, base_j, c.cells);
  if (j.contains("cells")) {
    if (!j["cells"].is_array()) throw ValidationError("cells: expected an array");
    for (const auto& cj : j["cells"]) {
      check_keys(cj, kCellKeys, "cells[]");
      ExperimentCell cell = base;
      std::optional<Json> pending = base_j;
      for (const auto& [key, v] : cj.items()) apply_cell_key(cell, key, v, pending);
      finish_cell(cell, pending);
      c.cells.push_back(cell);
    }
  }
  if (c.cells.empty()) throw ValidationError("experiment config defines no cells (use 'grid' or 'cells')");
  return c;
}

namespace {

const std::map<std::string, Json>& presets() {
  static const std::map<std::string, Json> p = [] {
    std::map<std::string, Json> m;
    m["table1"] = Json::parse(R"({
      "kind": "experiment", "name": "table1", "seed": 20200101, "task": "mse", "reps": 2500, "infeasible": true,
      "grid": {"setting": "A", "n": [3, 5], "T": [100, 200, 500], "rho": [0.0, 0.3, 0.6, 0.8]}
    })");
    m["table2"] = Json::parse(R"({
      "kind": "experiment", "name": "table2", "seed": 20200102, "task": "mse", "reps": 2500,
      "grid": {"setting": "B", "n": [3, 5], "theta": [0.3, 0.5],
               "lambda": [[0.1, 0.5], [0.5, 0.8], [0.8, 0.95]], "T": [100, 200, 500]}
    })");
    m["table3"] = Json::parse(R"({
      "kind": "experiment", "name": "table3", "seed": 20200103, "task": "wald_size", "reps": 2500,
      "grid": {"setting": "A", "n": [3, 5], "T": [100, 200, 500], "rho": [0.0, 0.3, 0.6, 0.8]}
    })");
    m["ct-tests"] = Json::parse(R"({
      "kind": "experiment", "name": "ct-tests", "seed": 20200104, "reps": 2500,
      "grid": [
        {"setting": "C_size", "task": "coint_size", "n": [3, 5],
         "lambda": [[0.1, 0.5], [0.5, 0.8], [0.8, 0.95]], "T": [100, 200, 500]},
        {"setting": ["C_power1", "C_power2", "C_power3"], "task": "coint_power", "n": [3, 5],
         "J": [1, 2, "n"], "T": [100, 200, 500]}
      ]
    })");
    m["ekc"] = Json::parse(R"({
      "kind": "estimation",
      "units": [{"name": "AT"}, {"name": "BE"}, {"name": "FI"}, {"name": "NL"}, {"name": "CH"}, {"name": "UK"}],
      "trend_order": 1, "power_order": 2,
      "method": ["sols", "sur", "fgls"], "lr": "kernel", "alpha": 0.05,
      "variants": ["sols", "sur", "biam"]
    })");
    return m;
  }();
  return p;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"table1", "table2", "table3", "ct-tests", "ekc"};
  return names;
}

bool is_preset(const std::string& name) { return presets().count(name) > 0; }

const Json& preset(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) throw ValidationError("unknown preset '" + name + "'");
  return it->second;
}

Json load_config(const std::string& name_or_path) {
  if (is_preset(name_or_path)) return preset(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw ValidationError("cannot open config '" + name_or_path + "' (not a preset name either)");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(name_or_path + ": invalid JSON: " + e.what());
  }
}

std::vector<UnitSpec> resolve_units(const RunConfig& cfg, const Dataset& ds) {
  if (!cfg.units.empty()) return cfg.units;
  std::vector<UnitSpec> out;
  for (const auto& name : ds.names) out.push_back({name, cfg.default_order});
  return out;
}

std::pair<CprSpec, Dataset> select_units(const std::vector<UnitSpec>& units, const Dataset& ds) {
  const int n = static_cast<int>(units.size());
  const int T = ds.data.T();
  Dataset sub;
  sub.t = ds.t;
  Matrix y(n, T), x(n, T);
  Vector x0(n);
  std::vector<EquationOrder> orders;
  for (int i = 0; i < n; ++i) {
    const int k = ds.index_of(units[i].name);
    if (k < 0) throw ValidationError("unit '" + units[i].name + "' is not in the data");
    y.row(i) = ds.data.y.row(k);
    x.row(i) = ds.data.x.row(k);
    x0(i) = ds.data.x0(k);
    sub.names.push_back(units[i].name);
    orders.push_back(units[i].order);
  }
  sub.data = PanelData(std::move(y), std::move(x), std::move(x0));
  CprSpec spec(orders);
  validate(spec, sub.data);
  return {spec, sub};
}

}  // namespace fmgls::cli
