// Batch front-end for the weighted Riesz potential library. All commands read
// a JSON config (plus a few flag overrides), write machine-readable output,
// and are deterministic for identical inputs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "riesz/exponents.hpp"
#include "riesz/operator.hpp"
#include "riesz/oracle_mc.hpp"
#include "riesz/profile.hpp"
#include "riesz/sweep.hpp"

using nlohmann::json;

namespace {

struct RunConfig {
  riesz::RieszParams params;
  riesz::QuadratureConfig quad;
  json profile_spec;    // builtin name string or pieces array
  json profile_g_spec;  // second profile for bilinear
  std::optional<double> p;
  std::vector<double> p_values;
  double t = 2.0;
  std::vector<double> eps_grid;
  long long n_samples = 1000000;
  uint64_t seed = 1;
  int max_iter = 20;
  int threads = 1;
  std::vector<double> x_norms;
};

const std::set<std::string> kTopKeys = {
    "d",        "alpha",     "beta",     "lambda", "quadrature", "profile", "profile_g",
    "p",        "p_values",  "t",        "eps_grid", "n_samples", "seed",  "max_iter",
    "threads",  "x_norms"};
const std::set<std::string> kQuadKeys = {"rel_tol", "r_min", "r_max", "points_per_decade",
                                         "singular_split_width"};

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw riesz::ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw riesz::ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw riesz::ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kTopKeys.count(it.key()))
      throw riesz::ConfigError("unknown config field: " + it.key());
  RunConfig c;
  try {
    c.params = riesz::validate_params(j.at("d").get<int>(), j.at("alpha").get<double>(),
                                      j.at("beta").get<double>(), j.at("lambda").get<double>());
    if (j.contains("quadrature")) {
      const json& q = j["quadrature"];
      for (auto it = q.begin(); it != q.end(); ++it)
        if (!kQuadKeys.count(it.key()))
          throw riesz::ConfigError("unknown quadrature field: " + it.key());
      if (q.contains("rel_tol")) c.quad.rel_tol = q["rel_tol"].get<double>();
      if (q.contains("r_min")) c.quad.r_min = q["r_min"].get<double>();
      if (q.contains("r_max")) c.quad.r_max = q["r_max"].get<double>();
      if (q.contains("points_per_decade"))
        c.quad.points_per_decade = q["points_per_decade"].get<int>();
      if (q.contains("singular_split_width"))
        c.quad.singular_split_width = q["singular_split_width"].get<double>();
      if (!(c.quad.r_min < c.quad.r_max) || !(c.quad.rel_tol > 0.0) ||
          c.quad.points_per_decade < 4)
        throw riesz::ConfigError("bad quadrature settings");
    }
    if (j.contains("profile")) c.profile_spec = j["profile"];
    if (j.contains("profile_g")) c.profile_g_spec = j["profile_g"];
    if (j.contains("p")) c.p = j["p"].get<double>();
    if (j.contains("p_values")) c.p_values = j["p_values"].get<std::vector<double>>();
    if (j.contains("t")) c.t = j["t"].get<double>();
    if (j.contains("eps_grid")) c.eps_grid = j["eps_grid"].get<std::vector<double>>();
    if (j.contains("n_samples")) c.n_samples = j["n_samples"].get<long long>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<int>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("x_norms")) c.x_norms = j["x_norms"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw riesz::ConfigError(std::string("config field error: ") + e.what());
  }
  if (c.eps_grid.empty())
    for (int k = 2; k <= 9; ++k) c.eps_grid.push_back(std::pow(2.0, -k));
  return c;
}

riesz::RadialProfile resolve_profile(const json& spec, const riesz::RieszParams& pr,
                                     const std::string& fallback = "h") {
  json s = spec.is_null() ? json(fallback) : spec;
  if (s.is_string()) {
    std::string name = s.get<std::string>();
    if (name == "f0") return riesz::make_f0(pr);
    if (name == "g0") return riesz::make_g0(pr);
    if (name == "h") return riesz::make_h(pr);
    throw riesz::ConfigError("unknown builtin profile: " + name);
  }
  return riesz::profile_from_json(s);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw riesz::ConfigError("cannot open output: " + out_path);
  out << text;
}

std::string fd(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return riesz::format_double(v);
}

json chart_json(const riesz::ExponentChart& ch) {
  json j{{"d", ch.params.d},
         {"alpha", ch.params.alpha},
         {"beta", ch.params.beta},
         {"lambda", ch.params.lambda},
         {"p_minus", ch.p_minus},
         {"p_plus", ch.p_plus},
         {"q_minus", ch.q_minus},
         {"kappa", ch.kappa}};
  if (std::isinf(ch.q_plus))
    j["q_plus"] = "inf";
  else
    j["q_plus"] = ch.q_plus;
  return j;
}

int cmd_info(const RunConfig& c, bool as_json, const std::string& out_path) {
  riesz::ExponentChart ch = riesz::exponent_chart(c.params);
  if (as_json) {
    json j = chart_json(ch);
    json table = json::array();
    for (double p : c.p_values) {
      riesz::GPoint gp = riesz::conjugate_q(ch, p);
      table.push_back({{"p", gp.p}, {"q", gp.q}, {"q_dual", gp.q_dual}});
    }
    j["q_of_p"] = table;
    emit(j.dump(2) + "\n", out_path);
    return 0;
  }
  std::string s;
  s += "d=" + std::to_string(ch.params.d) + "\n";
  s += "alpha=" + fd(ch.params.alpha) + "\n";
  s += "beta=" + fd(ch.params.beta) + "\n";
  s += "lambda=" + fd(ch.params.lambda) + "\n";
  s += "p_minus=" + fd(ch.p_minus) + "\n";
  s += "p_plus=" + fd(ch.p_plus) + "\n";
  s += "q_minus=" + fd(ch.q_minus) + "\n";
  s += "q_plus=" + fd(ch.q_plus) + "\n";
  s += "kappa=" + fd(ch.kappa) + "\n";
  for (double p : c.p_values) {
    riesz::GPoint gp = riesz::conjugate_q(ch, p);
    s += "q(" + fd(p) + ")=" + fd(gp.q) + "\n";
  }
  emit(s, out_path);
  return 0;
}

int cmd_norm(const RunConfig& c, bool as_json, const std::string& out_path) {
  if (!c.p) throw riesz::ConfigError("norm: config field 'p' required");
  riesz::RadialProfile f = resolve_profile(c.profile_spec, c.params);
  double v;
  bool pure = true;
  for (const auto& pc : f.pieces)
    if (pc.log_power > 0) pure = false;
  if (pure) {
    auto cl = riesz::lp_norm_closed(f, *c.p, c.params);
    if (!cl) throw riesz::DivergentNormError("norm: divergent");
    v = *cl;
  } else {
    v = riesz::lp_norm_quad(f, *c.p, c.params, c.quad);
  }
  if (as_json) {
    json j{{"p", *c.p}, {"profile", f.label}, {"norm", v}};
    emit(j.dump(2) + "\n", out_path);
  } else {
    emit("norm=" + fd(v) + "\n", out_path);
  }
  return 0;
}

json asym_json(const riesz::AsymptoticForm& a) {
  if (a.zero()) return json{{"zero", true}};
  return json{{"power", a.power},   {"log_power", a.log_exp}, {"log_shift", a.shift},
              {"direction", a.dir}, {"log_amp", a.log_amp}};
}

int cmd_potential(const RunConfig& c, bool as_json, const std::string& out_path) {
  riesz::RadialProfile f = resolve_profile(c.profile_spec, c.params);
  riesz::SampledPotential u = riesz::apply(c.params, f, c.quad);
  if (as_json) {
    json j{{"profile", f.label},
           {"head", asym_json(u.head)},
           {"tail", asym_json(u.tail)},
           {"radii", u.radii},
           {"values", u.values}};
    emit(j.dump(2) + "\n", out_path);
    return 0;
  }
  std::string csv = "r,u\n";
  for (size_t i = 0; i < u.radii.size(); ++i)
    csv += fd(u.radii[i]) + "," + fd(u.values[i]) + "\n";
  emit(csv, out_path);
  json side{{"head", asym_json(u.head)}, {"tail", asym_json(u.tail)}};
  if (!out_path.empty()) {
    std::ofstream sf(out_path + ".json", std::ios::binary);
    sf << side.dump(2) << "\n";
  } else {
    std::cout << side.dump(2) << "\n";
  }
  return 0;
}

int cmd_bilinear(const RunConfig& c, bool as_json, const std::string& out_path) {
  riesz::RadialProfile f = resolve_profile(c.profile_spec, c.params, "g0");
  riesz::RadialProfile g = resolve_profile(c.profile_g_spec, c.params, "g0");
  double v = riesz::bilinear(c.params, f, g, c.quad);
  if (as_json) {
    json j{{"f", f.label}, {"g", g.label}, {"value", v}};
    emit(j.dump(2) + "\n", out_path);
  } else {
    emit("bilinear=" + fd(v) + "\n", out_path);
  }
  return 0;
}

int cmd_sweep(const RunConfig& c, bool as_json, const std::string& out_path) {
  riesz::RadialProfile f = resolve_profile(c.profile_spec, c.params);
  auto rows = riesz::sweep(c.params, f, c.eps_grid, c.quad);
  if (as_json) {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"p", r.p},
                     {"q", r.q},
                     {"norm_f", r.norm_f},
                     {"norm_u", r.norm_u},
                     {"ratio", r.ratio},
                     {"compensated", r.compensated}});
    emit(arr.dump(2) + "\n", out_path);
  } else {
    emit(riesz::sweep_csv(rows), out_path);
  }
  return 0;
}

int cmd_fit(const RunConfig& c, bool as_json, const std::string& out_path) {
  riesz::RadialProfile f = resolve_profile(c.profile_spec, c.params);
  riesz::ExponentChart ch = riesz::exponent_chart(c.params);
  auto rows = riesz::sweep(c.params, f, c.eps_grid, c.quad);
  auto lo = riesz::fit_endpoint_exponent(rows, riesz::Endpoint::lower, ch);
  auto hi = riesz::fit_endpoint_exponent(rows, riesz::Endpoint::upper, ch);
  bool pass_lo = std::abs(lo.slope + ch.kappa) <= 0.1;
  bool pass_hi = std::abs(hi.slope + ch.kappa) <= 0.1;
  if (as_json) {
    json j{{"target_slope", -ch.kappa},
           {"lower", {{"slope", lo.slope}, {"pass", pass_lo}, {"points", lo.points_used}}},
           {"upper", {{"slope", hi.slope}, {"pass", pass_hi}, {"points", hi.points_used}}}};
    emit(j.dump(2) + "\n", out_path);
  } else {
    std::string s;
    s += "target_slope=" + fd(-ch.kappa) + "\n";
    s += "lower: slope=" + fd(lo.slope) + " " + (pass_lo ? "PASS" : "FAIL") + "\n";
    s += "upper: slope=" + fd(hi.slope) + " " + (pass_hi ? "PASS" : "FAIL") + "\n";
    emit(s, out_path);
  }
  return (pass_lo && pass_hi) ? 0 : 1;
}

int cmd_estimate(const RunConfig& c, bool as_json, const std::string& out_path) {
  if (!c.p) throw riesz::ConfigError("estimate: config field 'p' required");
  riesz::RadialProfile f = resolve_profile(c.profile_spec, c.params);
  auto res = riesz::power_method_estimate(c.params, *c.p, f, c.max_iter, c.quad);
  if (as_json) {
    json j{{"p", *c.p}, {"v_lower", res.v_lower}, {"iterate_ratios", res.iterate_ratios}};
    emit(j.dump(2) + "\n", out_path);
  } else {
    std::string s = "v_lower=" + fd(res.v_lower) + "\n";
    for (size_t i = 0; i < res.iterate_ratios.size(); ++i)
      s += "ratio[" + std::to_string(i) + "]=" + fd(res.iterate_ratios[i]) + "\n";
    emit(s, out_path);
  }
  return 0;
}

int cmd_oracle_check(const RunConfig& c, bool as_json, const std::string& out_path) {
  riesz::RadialProfile f = resolve_profile(c.profile_spec, c.params, "g0");
  std::vector<double> xs = c.x_norms;
  if (xs.empty()) xs = {0.05, 0.3, 1.5, 8.0, 40.0};
  riesz::SampledPotential u = riesz::apply(c.params, f, c.quad);
  double max_z = 0.0;
  json probes = json::array();
  std::string text;
  for (double r : xs) {
    auto mc = riesz::potential_at_point_mc(c.params, f, r, c.n_samples, c.seed, c.threads);
    double uq = u.value_at(r);
    double z = (mc.std_err > 0.0) ? std::abs(uq - mc.value) / mc.std_err : 0.0;
    max_z = std::max(max_z, z);
    probes.push_back(
        {{"r", r}, {"quad", uq}, {"mc", mc.value}, {"std_err", mc.std_err}, {"z", z}});
    text += "r=" + fd(r) + " quad=" + fd(uq) + " mc=" + fd(mc.value) +
            " std_err=" + fd(mc.std_err) + " z=" + fd(z) + "\n";
  }
  bool pass = max_z <= 3.0;
  if (as_json) {
    json j{{"probes", probes}, {"max_z", max_z}, {"pass", pass}};
    emit(j.dump(2) + "\n", out_path);
  } else {
    text += "max_z=" + fd(max_z) + " " + (pass ? "PASS" : "FAIL") + "\n";
    emit(text, out_path);
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Riesz potential toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_path;
  bool as_json = false;
  int threads_flag = 0;
  uint64_t seed_flag = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON config path")->required();
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_flag("--json", as_json, "structured JSON output");
  app.add_option("--threads", threads_flag, "worker thread count");
  app.add_option("--seed", seed_flag, "RNG seed override")->each([&](const std::string&) {
    seed_set = true;
  });

  auto* info = app.add_subcommand("info", "exponent chart and q(p) table");
  auto* norm = app.add_subcommand("norm", "L_p norm of a profile");
  auto* potential = app.add_subcommand("potential", "apply the operator, write r,u CSV");
  auto* bilin = app.add_subcommand("bilinear", "bilinear functional B(f,g)");
  auto* sweep = app.add_subcommand("sweep", "ratio sweep over the eps grid");
  auto* fit = app.add_subcommand("fit", "endpoint slope fits against -kappa");
  auto* estimate = app.add_subcommand("estimate", "power-method lower bound for V(p)");
  auto* oracle = app.add_subcommand("oracle-check", "quadrature vs Monte Carlo z-scores");
  // allow global flags to appear after the subcommand name
  for (auto* sub : {info, norm, potential, bilin, sweep, fit, estimate, oracle})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (threads_flag > 0) cfg.threads = threads_flag;
    if (seed_set) cfg.seed = seed_flag;
    if (info->parsed()) return cmd_info(cfg, as_json, out_path);
    if (norm->parsed()) return cmd_norm(cfg, as_json, out_path);
    if (potential->parsed()) return cmd_potential(cfg, as_json, out_path);
    if (bilin->parsed()) return cmd_bilinear(cfg, as_json, out_path);
    if (sweep->parsed()) return cmd_sweep(cfg, as_json, out_path);
    if (fit->parsed()) return cmd_fit(cfg, as_json, out_path);
    if (estimate->parsed()) return cmd_estimate(cfg, as_json, out_path);
    if (oracle->parsed()) return cmd_oracle_check(cfg, as_json, out_path);
    return 2;
  } catch (const riesz::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const riesz::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const riesz::SignError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const riesz::SubcriticalityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const riesz::OutOfRangeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const riesz::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 1;
  }
}
