#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "growthlab/ball.hpp"
#include "growthlab/fit.hpp"
#include "growthlab/flow.hpp"
#include "growthlab/format.hpp"
#include "growthlab/gap_analysis.hpp"
#include "growthlab/growth.hpp"

namespace growthlab::cli {

using Json = nlohmann::ordered_json;

namespace {

const char* const kMapHelp =
    "map specs: identity | mobius:lambda=<float> | poly:p=<int>,c=<float> | "
    "flatflow:file=<delta.json>";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw UsageError("bad number '" + text + "' for " + what);
  }
  return v;
}

long parse_long(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw UsageError("bad integer '" + text + "' for " + what);
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

// --- options shared by every leaf command ----------------------------------

struct Common {
  std::string config;
  std::string out_path;
  unsigned long seed = 1;
  std::size_t grid_uniform = GridSpec{}.uniform;
  int ladder_depth = GridSpec{}.ladder_depth;
  int ladder_per_octave = GridSpec{}.ladder_per_octave;

  GridSpec grid() const {
    GridSpec g;
    g.uniform = grid_uniform;
    g.ladder_depth = ladder_depth;
    g.ladder_per_octave = ladder_per_octave;
    return g;
  }
};

void add_common(CLI::App* app, Common& c, bool with_grid) {
  app->add_option("--config", c.config, "key=value file; flags override it");
  app->add_option("--out", c.out_path, "write the result to this file");
  app->add_option("--seed", c.seed, "seed for randomized checks");
  if (with_grid) {
    app->add_option("--grid-uniform", c.grid_uniform, "uniform grid points")
        ->check(CLI::PositiveNumber);
    app->add_option("--ladder-depth", c.ladder_depth, "geometric ladder octaves")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--ladder-per-octave", c.ladder_per_octave,
                    "ladder points per octave")
        ->check(CLI::PositiveNumber);
  }
}

void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + c.out_path);
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json verdict_json(const ClassificationVerdict& v) {
  Json j;
  j["verdict"] = to_string(v.verdict);
  j["witness"] = v.witness ? Json(*v.witness) : Json(nullptr);
  j["slope_estimate"] = v.slope_estimate;
  return j;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    for (auto& cell : cells) cell = trim(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool is_number(const std::string& s) {
  try {
    std::size_t used = 0;
    std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

// --- commands ----------------------------------------------------------------

struct MapOptions {
  Common common;
  std::string map;
  long n_max = 100;
};

int cmd_growth(const MapOptions& o, std::ostream& out) {
  const DiffeoPtr f = parse_map(o.map);
  const auto recs = growth_sequence(*f, o.n_max, o.common.grid());
  std::ostringstream csv;
  csv << "n,a_fwd,a_bwd,gamma_n\n";
  for (const auto& r : recs) {
    csv << r.n << ',' << full_precision(r.a_fwd) << ','
        << full_precision(r.a_bwd) << ',' << full_precision(r.gamma_n) << '\n';
  }
  emit(o.common, out, csv.str());
  return kExitOk;
}

struct GammaOptions {
  Common common;
  std::string map;
  long n_probe = 200;
  double tolerance = 1e-2;
};

int cmd_gamma(const GammaOptions& o, std::ostream& out) {
  const DiffeoPtr f = parse_map(o.map);
  const GammaEstimate g =
      gamma_exponent(*f, o.n_probe, o.common.grid(), o.tolerance);
  Json j;
  j["map"] = f->name();
  j["n_probe"] = g.n_probe;
  j["gamma"] = g.gamma;
  j["gamma_previous"] = g.gamma_previous;
  j["fixed_point_gamma"] = g.fixed_point_gamma;
  j["tolerance"] = g.tolerance;
  j["consistent"] = g.consistent;
  emit(o.common, out, dump(j));
  return g.consistent ? kExitOk : kExitCheckFailed;
}

int cmd_gap_check(const MapOptions& o, std::ostream& out) {
  const DiffeoPtr f = parse_map(o.map);
  const GapCertificate c = certify_gap(*f, o.n_max, o.common.grid());
  Json j;
  j["map"] = c.map_name;
  j["n_max"] = c.n_max;
  j["gamma"] = c.gamma;
  j["fixed_point_gamma"] = c.fixed_point_gamma;
  j["hyperbolic"] = c.hyperbolic;
  j["C"] = c.regularity.c_const;
  j["variation"] = c.regularity.variation;
  j["lipschitz"] = c.regularity.lipschitz;
  j["verdict_fwd"] = verdict_json(c.verdict_fwd);
  j["verdict_bwd"] = verdict_json(c.verdict_bwd);
  j["bound_violations"] = c.bound_violations;
  Json conv = Json::array();
  for (const auto& v : c.convexity_violations) {
    conv.push_back({{"n", v.n},
                    {"direction", to_string(v.direction)},
                    {"second_difference", v.second_difference},
                    {"allowed", v.allowed}});
  }
  j["convexity_violations"] = conv;
  j["max_grid_slack"] = c.max_grid_slack;
  j["tolerance"] = c.tolerance;
  j["certified"] = c.certified();
  emit(o.common, out, dump(j));
  const bool failed =
      !c.bound_violations.empty() || !c.convexity_violations.empty();
  return failed ? kExitCheckFailed : kExitOk;
}

struct ClassifyOptions {
  Common common;
  std::string seq;
  double c_const = 0.0;
  double tolerance = RealSequence{}.tolerance;
};

RealSequence read_sequence(const std::string& path) {
  const auto rows = read_csv(path);
  RealSequence s;
  for (const auto& row : rows) {
    if (row.size() < 2) throw UsageError(path + ": expected rows n,a_n");
    if (!is_number(row[0])) {
      if (s.values.empty()) continue;  // header
      throw UsageError(path + ": bad row starting with '" + row[0] + "'");
    }
    const long n = parse_long(row[0], path);
    if (n != static_cast<long>(s.values.size())) {
      throw UsageError(path + ": indices must run 0, 1, 2, ... (found " +
                       row[0] + ")");
    }
    s.values.push_back(parse_double(row[1], path));
  }
  if (s.values.empty()) throw UsageError(path + ": no data rows");
  return s;
}

int cmd_classify(const ClassifyOptions& o, std::ostream& out) {
  RealSequence s = read_sequence(o.seq);
  s.c_const = o.c_const;
  s.tolerance = o.tolerance;
  const ClassificationVerdict v = growth_lemma_classify(s);
  Json j = verdict_json(v);
  j["c_const"] = s.c_const;
  j["tolerance"] = s.tolerance;
  j["length"] = s.values.size();
  emit(o.common, out, dump(j));
  return kExitOk;
}

struct DenjoyOptions {
  Common common;
  std::string map;
  int cases = 100;
  long n_max = 50;
  int samples = 64;
};

int cmd_denjoy(const DenjoyOptions& o, std::ostream& out) {
  const DiffeoPtr f = parse_map(o.map);
  const RegularityData reg = regularity_constants(*f);
  std::mt19937_64 rng(o.common.seed);
  std::uniform_real_distribution<double> ux(0.02, 0.98), ut(0.05, 0.95);
  std::uniform_int_distribution<long> un(1, o.n_max);
  int run_cases = 0, violations = 0, attempts = 0;
  double worst = 0.0;
  Json bad = Json::array();
  while (run_cases < o.cases && attempts < 100 * o.cases) {
    ++attempts;
    const double x = ux(rng);
    const double fx = (*f)(x);
    const double t = ut(rng);
    const long n = un(rng);
    if (!(std::abs(fx - x) > 1e-9)) continue;
    const double lo = fx > x ? x : x - t * (x - fx);
    const double hi = fx > x ? x + t * (fx - x) : x;
    DenjoyReport r;
    try {
      r = denjoy_check(*f, lo, hi, n, o.samples, reg);
    } catch (const PreconditionError&) {
      continue;
    }
    ++run_cases;
    worst = std::max({worst, std::log(r.max_ratio), -std::log(r.min_ratio)});
    if (!r.ok) {
      ++violations;
      bad.push_back({{"lo", lo}, {"hi", hi}, {"n", n}});
    }
  }
  if (run_cases == 0) {
    throw UsageError(f->name() + " has no wandering intervals to sample");
  }
  Json j;
  j["map"] = f->name();
  j["cases"] = run_cases;
  j["n_max"] = o.n_max;
  j["variation"] = reg.variation;
  j["worst_log_ratio"] = worst;
  j["slack"] = kDenjoySlack;
  j["violations"] = violations;
  j["violating_cases"] = bad;
  emit(o.common, out, dump(j));
  return violations == 0 ? kExitOk : kExitCheckFailed;
}

struct DeltaBuildOptions {
  Common common;
  std::string u = "linear";
  int levels = 1;
  double tail_eps = 1e-10;
  int cap = kDefaultIndexCap;
  long tau_floor = 1;
};

int cmd_delta_build(const DeltaBuildOptions& o, std::ostream& out) {
  const TargetSequence u = TargetSequence::parse(o.u);
  DeltaFunction d(build_schedule(u, o.levels, o.tau_floor), o.tail_eps, o.cap);
  emit(o.common, out, delta_document(d, o.cap));
  return kExitOk;
}

struct DeltaVerifyOptions {
  Common common;
  std::string params;
  std::string checks = "integrability,ratio,flatness,g";
  int m = 1;
  double c = 0.5;
  std::vector<double> t{1e3, 1e4, 1e5};
  double quad_tol = 1e-10;
};

inline constexpr double kStability = 1e-6;

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(std::abs(v[i]) < std::abs(v[i - 1]))) return false;
  }
  return true;
}

int cmd_delta_verify(const DeltaVerifyOptions& o, std::ostream& out) {
  const DeltaFunction d = load_delta(o.params);
  Json j;
  j["levels"] = d.schedule().levels();
  j["terms"] = d.terms().size();
  bool all_ok = true;
  for (const std::string& check : split(o.checks, ',')) {
    const std::string name = trim(check);
    if (name == "integrability") {
      const auto r = verify_integrability(d, o.quad_tol);
      const double doubling = std::abs(r.doubled_total - r.total) / r.total;
      const double analytic = std::abs(r.analytic - r.total) / r.analytic;
      const bool ok = doubling <= kStability && analytic <= kStability;
      j["integrability"] = {{"T", r.T},
                            {"inner", r.inner},
                            {"tail", r.tail},
                            {"total", r.total},
                            {"doubled_total", r.doubled_total},
                            {"analytic", r.analytic},
                            {"doubling_rel_change", doubling},
                            {"analytic_rel_error", analytic},
                            {"quad_tol", o.quad_tol},
                            {"tolerance", kStability},
                            {"ok", ok}};
      all_ok = all_ok && ok;
    } else if (name == "ratio") {
      Json levels = Json::array();
      for (int i = 1; i <= d.schedule().levels(); ++i) {
        const auto r = verify_ratio_bound(d, i);
        const bool ok =
            r.ok && r.phi_sandwich && r.theta_sandwich && r.phi_exact;
        levels.push_back({{"level", i},
                          {"tau", d.schedule().tau[i - 1]},
                          {"bound", r.bound},
                          {"sup_ratio", r.sup_ratio},
                          {"witness_t", r.witness_t},
                          {"grid_points", r.grid_points},
                          {"indices_checked", r.indices_checked},
                          {"phi_sandwich", r.phi_sandwich},
                          {"theta_sandwich", r.theta_sandwich},
                          {"phi_exact", r.phi_exact},
                          {"sandwich_slack", kSandwichSlack},
                          {"ok", ok}});
        all_ok = all_ok && ok;
      }
      j["ratio"] = levels;
    } else if (name == "flatness") {
      const auto r = flatness_diagnostic(d, o.m, o.c, o.t);
      j["flatness"] = {{"m", r.m},       {"c", r.c},
                       {"t", r.t},       {"ratios", r.ratios},
                       {"log_nu", r.log_nu},
                       {"above_one", r.above_one},
                       {"outside_box", r.outside_box},
                       {"decreasing", r.decreasing},
                       {"ok", r.decreasing}};
      all_ok = all_ok && r.decreasing;
    } else if (name == "g") {
      Json rows = Json::array();
      std::vector<double> g0, g1;
      for (double t : o.t) {
        const GValues g = g_values(d, t);
        g0.push_back(g.g0_minus_one);
        g1.push_back(g.g[1]);
        rows.push_back({{"t", t},
                        {"g0_minus_one", g.g0_minus_one},
                        {"g1", g.g[1]},
                        {"g2", g.g[2]},
                        {"g3", g.g[3]},
                        {"g1_identity", g1_identity(d, t)}});
      }
      const bool ok = strictly_decreasing(g0) && strictly_decreasing(g1);
      j["g"] = {{"values", rows}, {"ok", ok}};
      all_ok = all_ok && ok;
    } else {
      throw UsageError("unknown check '" + name +
                       "' (expected integrability, ratio, flatness, g)");
    }
  }
  j["ok"] = all_ok;
  emit(o.common, out, dump(j));
  return all_ok ? kExitOk : kExitCheckFailed;
}

struct FlowGrowthOptions {
  Common common;
  std::string params;
  std::vector<long> n;
};

int cmd_flow_growth(const FlowGrowthOptions& o, std::ostream& out) {
  const FlowPtr fm = build_flow(load_delta(o.params));
  const DeltaSchedule& s = fm->delta().schedule();
  const TargetSequence u = TargetSequence::parse(s.u_description);
  std::vector<long> ns = o.n;
  if (ns.empty()) ns = s.tau;
  std::ostringstream csv;
  csv << "n,gamma_n,u_n,ratio\n";
  bool ok = true;
  for (long n : ns) {
    if (n < 0) throw UsageError("--n entries must be >= 0");
    const double g = flow_growth(*fm, n);
    const double un = u(static_cast<double>(n));
    csv << n << ',' << full_precision(g) << ',' << full_precision(un) << ','
        << full_precision(g / un) << '\n';
    if (std::find(s.tau.begin(), s.tau.end(), n) != s.tau.end() && g > un) {
      ok = false;
    }
  }
  emit(o.common, out, csv.str());
  return ok ? kExitOk : kExitCheckFailed;
}

struct BallOptions {
  Common common;
  std::string map;
  int dim = 2;
  long n_max = 200;
};

int cmd_ball(const BallOptions& o, std::ostream& out) {
  const DiffeoPtr f = parse_map(o.map);
  const RadialMap g = build_radial(
      std::make_shared<SupportedMap>(f, kAnnulusInner, kAnnulusOuter), o.dim);
  const auto recs = radial_growth_sequence(g, o.n_max, o.common.grid());
  std::ostringstream csv;
  csv << "n,gamma_h,gamma_g\n";
  bool ok = true;
  for (const auto& r : recs) {
    csv << r.n << ',' << full_precision(r.gamma_h) << ','
        << full_precision(r.gamma_g) << '\n';
    ok = ok && r.ok();
  }
  emit(o.common, out, csv.str());
  return ok ? kExitOk : kExitCheckFailed;
}

struct FitOptions {
  Common common;
  std::string map;
  std::string input;
  std::vector<long> window{1000, 10000};
  std::vector<double> expect;
};

int cmd_fit(const FitOptions& o, std::ostream& out) {
  if (o.window.size() != 2) throw UsageError("--window takes lo,hi");
  if (!o.expect.empty() && o.expect.size() != 2) {
    throw UsageError("--expect takes lo,hi");
  }
  if (o.map.empty() == o.input.empty()) {
    throw UsageError("fit needs exactly one of --map and --input");
  }
  FitReport r;
  if (!o.map.empty()) {
    const DiffeoPtr f = parse_map(o.map);
    r = fit_exponent(growth_sequence(*f, o.window[1], o.common.grid()),
                     o.window[0], o.window[1]);
  } else {
    const auto rows = read_csv(o.input);
    if (rows.empty()) throw UsageError(o.input + ": empty");
    std::size_t n_col = 0, g_col = 1;
    std::size_t first = 0;
    if (!is_number(rows[0][0])) {
      const auto& head = rows[0];
      const auto nit = std::find(head.begin(), head.end(), "n");
      const auto git = std::find(head.begin(), head.end(), "gamma_n");
      if (nit == head.end() || git == head.end()) {
        throw UsageError(o.input + ": header needs n and gamma_n columns");
      }
      n_col = static_cast<std::size_t>(nit - head.begin());
      g_col = static_cast<std::size_t>(git - head.begin());
      first = 1;
    }
    std::vector<long> n;
    std::vector<double> g;
    for (std::size_t i = first; i < rows.size(); ++i) {
      if (rows[i].size() <= std::max(n_col, g_col)) {
        throw UsageError(o.input + ": short row");
      }
      n.push_back(parse_long(rows[i][n_col], o.input));
      g.push_back(parse_double(rows[i][g_col], o.input));
    }
    r = fit_exponent(n, g, o.window[0], o.window[1]);
  }
  Json j;
  j["n_lo"] = r.n_lo;
  j["n_hi"] = r.n_hi;
  j["points"] = r.points;
  j["slope"] = r.slope;
  j["intercept"] = r.intercept;
  j["max_residual"] = r.max_residual;
  bool ok = true;
  if (!o.expect.empty()) {
    ok = r.slope >= o.expect[0] && r.slope <= o.expect[1];
    j["expect"] = o.expect;
    j["within"] = ok;
  }
  emit(o.common, out, dump(j));
  return ok ? kExitOk : kExitCheckFailed;
}

std::string config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return "";
}

}  // namespace

// --- public helpers -----------------------------------------------------------

DiffeoPtr parse_map(const std::string& spec) {
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string family = s.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon != std::string::npos) {
    for (const std::string& kv : split(s.substr(colon + 1), ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("bad parameter '" + kv + "' in map spec '" + spec +
                         "'");
      }
      params[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    std::string v = it->second;
    params.erase(it);
    return v;
  };
  auto finish = [&](DiffeoPtr p) {
    if (!params.empty()) {
      throw UsageError("unknown parameter '" + params.begin()->first +
                       "' for map family " + family);
    }
    return p;
  };
  try {
    if (family == "identity") return finish(std::make_shared<IdentityMap>());
    if (family == "mobius") {
      const auto lambda = take("lambda");
      if (!lambda) throw UsageError("mobius needs lambda=<float>");
      return finish(
          std::make_shared<MobiusMap>(parse_double(*lambda, "lambda")));
    }
    if (family == "poly") {
      const auto p = take("p");
      if (!p) throw UsageError("poly needs p=<int>");
      const auto c = take("c");
      const long order = parse_long(*p, "p");
      if (order < 1 || order > 64) throw UsageError("poly needs 1 <= p <= 64");
      return finish(std::make_shared<PolyPerturbationMap>(
          static_cast<int>(order), c ? parse_double(*c, "c") : 0.1));
    }
    if (family == "flatflow") {
      const auto file = take("file");
      if (!file) throw UsageError("flatflow needs file=<path>");
      finish(nullptr);
      return build_flow(load_delta(*file));
    }
  } catch (const PreconditionError& e) {
    throw UsageError(std::string("invalid map spec '") + spec + "': " + e.what());
  }
  throw UsageError("unknown map spec '" + spec + "'; " + kMapHelp);
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::string> merge_config(
    std::vector<std::string> args,
    const std::map<std::string, std::string>& config) {
  const std::vector<std::string> given = args;
  for (const auto& [key, value] : config) {
    if (key == "config") continue;
    const std::string flag = "--" + key;
    const bool present = std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (present) continue;
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

std::string delta_document(const DeltaFunction& d, int cap) {
  const DeltaSchedule& s = d.schedule();
  Json j;
  j["u"] = s.u_description;
  j["levels"] = s.levels();
  j["tail_eps"] = d.tail_eps();
  j["cap"] = cap;
  j["schedule"] = {{"tau", s.tau},
                   {"u_tau", s.u_tau},
                   {"mu", s.mu},
                   {"log_mu_abs", s.log_mu_abs}};
  j["truncation"] = {{"K", d.bounds()},
                     {"tail_bound", d.tail_bound()},
                     {"terms", d.terms().size()}};
  j["base"] = {{"kappa", kBridge.kappa},
               {"blend_start", kBridge.blend_start},
               {"blend_end", kBridge.blend_end}};
  return dump(j);
}

DeltaFunction load_delta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  Json j;
  try {
    j = Json::parse(in);
    const Json& base = j.at("base");
    if (base.at("kappa").get<double>() != kBridge.kappa ||
        base.at("blend_start").get<double>() != kBridge.blend_start ||
        base.at("blend_end").get<double>() != kBridge.blend_end) {
      throw UsageError(path + ": base function parameters differ from the "
                              "built-in bridge");
    }
    DeltaSchedule s = schedule_from_values(
        j.at("u").get<std::string>(),
        j.at("schedule").at("tau").get<std::vector<long>>(),
        j.at("schedule").at("u_tau").get<std::vector<double>>());
    return DeltaFunction(std::move(s), j.at("tail_eps").get<double>(),
                         j.value("cap", kDefaultIndexCap));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

int run(const std::vector<std::string>& raw_args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"growthlab: growth sequences of interval diffeomorphisms",
               "growthlab"};
  app.require_subcommand(1);
  app.footer(kMapHelp);

  MapOptions growth_o, gap_o;
  GammaOptions gamma_o;
  ClassifyOptions classify_o;
  DenjoyOptions denjoy_o;
  DeltaBuildOptions build_o;
  DeltaVerifyOptions verify_o;
  FlowGrowthOptions flow_o;
  BallOptions ball_o;
  FitOptions fit_o;

  auto* growth = app.add_subcommand("growth", "CSV n,a_fwd,a_bwd,gamma_n");
  add_common(growth, growth_o.common, true);
  growth->add_option("--map", growth_o.map, "map spec")->required();
  growth->add_option("--n-max", growth_o.n_max, "largest n")
      ->check(CLI::PositiveNumber);

  auto* gamma = app.add_subcommand("gamma", "exponential growth rate");
  add_common(gamma, gamma_o.common, true);
  gamma->add_option("--map", gamma_o.map, "map spec")->required();
  gamma->add_option("--n-probe", gamma_o.n_probe, "probe iterate")
      ->check(CLI::Range(2L, 1L << 30));
  gamma->add_option("--tolerance", gamma_o.tolerance, "consistency tolerance");

  auto* gap = app.add_subcommand("gap-check", "gap theorem certificate (JSON)");
  add_common(gap, gap_o.common, true);
  gap->add_option("--map", gap_o.map, "map spec")->required();
  gap->add_option("--n-max", gap_o.n_max, "largest n")
      ->check(CLI::Range(3L, 1L << 30));

  auto* classify = app.add_subcommand("classify", "growth lemma verdict (JSON)");
  add_common(classify, classify_o.common, false);
  classify->add_option("--seq", classify_o.seq, "CSV rows n,a_n from n=0")
      ->required();
  classify->add_option("--c-const", classify_o.c_const, "C > 0")->required();
  classify->add_option("--tolerance", classify_o.tolerance, "comparison slack");

  auto* denjoy = app.add_subcommand("denjoy", "random Denjoy distortion cases");
  add_common(denjoy, denjoy_o.common, false);
  denjoy->add_option("--map", denjoy_o.map, "map spec")->required();
  denjoy->add_option("--cases", denjoy_o.cases, "number of cases")
      ->check(CLI::PositiveNumber);
  denjoy->add_option("--n-max", denjoy_o.n_max, "largest iterate")
      ->check(CLI::PositiveNumber);
  denjoy->add_option("--samples", denjoy_o.samples, "points per interval")
      ->check(CLI::Range(2, 1 << 20));

  auto* delta = app.add_subcommand("delta", "Delta construction");
  delta->require_subcommand(1);
  auto* build = delta->add_subcommand("build", "write Delta parameters (JSON)");
  add_common(build, build_o.common, false);
  build->add_option("--u", build_o.u, "linear | power:p=<float>");
  build->add_option("--levels", build_o.levels, "levels I")
      ->check(CLI::Range(0, 64));
  build->add_option("--tail-eps", build_o.tail_eps, "truncation tolerance")
      ->check(CLI::PositiveNumber);
  build->add_option("--cap", build_o.cap, "largest |k_i|")
      ->check(CLI::PositiveNumber);
  build->add_option("--tau-floor", build_o.tau_floor, "smallest tau")
      ->check(CLI::PositiveNumber);
  auto* verify = delta->add_subcommand("verify", "verify Delta (JSON)");
  add_common(verify, verify_o.common, false);
  verify->add_option("--params", verify_o.params, "delta JSON")->required();
  verify->add_option("--checks", verify_o.checks,
                     "integrability,ratio,flatness,g");
  verify->add_option("--m", verify_o.m, "flatness derivative order")
      ->check(CLI::Range(1, kMaxDerivativeOrder));
  verify->add_option("--c", verify_o.c, "flatness exponent in [0;1)");
  verify->add_option("--t", verify_o.t, "probe points")->delimiter(',');
  verify->add_option("--quad-tol", verify_o.quad_tol, "quadrature tolerance")
      ->check(CLI::PositiveNumber);

  auto* flat = app.add_subcommand("flat-flow", "flow map of Delta");
  flat->require_subcommand(1);
  auto* flat_growth = flat->add_subcommand("growth", "CSV n,gamma_n,u_n,ratio");
  add_common(flat_growth, flow_o.common, false);
  flat_growth->add_option("--params", flow_o.params, "delta JSON")->required();
  flat_growth->add_option("--n", flow_o.n, "iterates (default: tau)")
      ->delimiter(',');

  auto* ball = app.add_subcommand("ball", "radial extension, CSV n,gamma_h,gamma_g");
  add_common(ball, ball_o.common, true);
  ball->add_option("--map", ball_o.map, "map spec, placed on [1/3;2/3]")
      ->required();
  ball->add_option("--dim", ball_o.dim, "ball dimension")
      ->check(CLI::PositiveNumber);
  ball->add_option("--n-max", ball_o.n_max, "largest n")
      ->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "log-log growth exponent (JSON)");
  add_common(fit, fit_o.common, true);
  fit->add_option("--map", fit_o.map, "map spec");
  fit->add_option("--input", fit_o.input, "CSV with n and gamma_n columns");
  fit->add_option("--window", fit_o.window, "n_lo,n_hi")->delimiter(',');
  fit->add_option("--expect", fit_o.expect, "slope range lo,hi")
      ->delimiter(',');

  try {
    std::vector<std::string> args = raw_args;
    const std::string cfg = config_path(args);
    if (!cfg.empty()) args = merge_config(std::move(args), read_config(cfg));
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    if (growth->parsed()) return cmd_growth(growth_o, out);
    if (gamma->parsed()) return cmd_gamma(gamma_o, out);
    if (gap->parsed()) return cmd_gap_check(gap_o, out);
    if (classify->parsed()) return cmd_classify(classify_o, out);
    if (denjoy->parsed()) return cmd_denjoy(denjoy_o, out);
    if (build->parsed()) return cmd_delta_build(build_o, out);
    if (verify->parsed()) return cmd_delta_verify(verify_o, out);
    if (flat_growth->parsed()) return cmd_flow_growth(flow_o, out);
    if (ball->parsed()) return cmd_ball(ball_o, out);
    if (fit->parsed()) return cmd_fit(fit_o, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << kMapHelp << '\n';
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace growthlab::cli
