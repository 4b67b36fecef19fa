// brlab command-line runner: exposes every pipeline as a subcommand and
// emits CSV/JSON artifacts with the resolved configuration embedded.
//
// Exit codes: 0 success, 1 usage error, 2 solver failure.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "brlab/errors.hpp"
#include "brlab/io.hpp"
#include "brlab/layers.hpp"
#include "brlab/model.hpp"
#include "brlab/riemann.hpp"
#include "brlab/selfsim.hpp"
#include "brlab/wavefan.hpp"

namespace {

using namespace brlab;

struct UsageError {
  std::string msg;
};

struct Args {
  std::string model = "p_system";
  std::string params_file;
  std::string params_inline;
  double gamma = -1.0;  // > 0 means present; shorthand for params.gamma
  std::vector<double> u0, ub, ubar, seed;
  int family = 0;
  double strength = 0.0;
  std::string eps_spec;
  double tol = -1.0;  // < 0: per-command default
  std::string out_dir = ".";
  std::string provider = "envelope";
  int jobs = 1;
  double Xi = -1.0;
  double Z = 20.0;
  MeshPolicy mesh;  // flags overwrite individual fields
  std::string action;
};

Vector to_vec(const std::vector<double>& v) {
  Vector x(static_cast<int>(v.size()));
  for (int i = 0; i < x.size(); ++i) x[i] = v[i];
  return x;
}

nlohmann::json jvec(const Vector& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

nlohmann::json mesh_json(const MeshPolicy& p) {
  return {{"base_nodes", p.base_nodes},
          {"first_cell_factor", p.first_cell_factor},
          {"growth", p.growth},
          {"refine_fraction", p.refine_fraction},
          {"max_refine_rounds", p.max_refine_rounds}};
}

std::string str(const Vector& x) {
  std::string s = "(";
  for (int i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x[i]);
    s += buf;
  }
  return s + ")";
}

double parse_double(const std::string& s, const char* flag) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(x))
    throw UsageError{std::string(flag) + ": '" + s + "' is not a finite number"};
  return x;
}

// --eps accepts "0.05", "0.1,0.05,0.025", or a ladder "start:floor:xratio".
std::vector<double> parse_eps(const std::string& spec) {
  std::vector<double> eps;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::string tok;
    std::stringstream ss(spec);
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() != 3 || parts[2].empty() || parts[2][0] != 'x')
      throw UsageError{"--eps ladder must be start:floor:xratio, e.g. 1e-1:1e-3:x0.5"};
    const double start = parse_double(parts[0], "--eps start");
    const double floor = parse_double(parts[1], "--eps floor");
    const double ratio = parse_double(parts[2].substr(1), "--eps ratio");
    if (start <= 0 || floor <= 0 || floor > start || ratio <= 0 || ratio >= 1)
      throw UsageError{"--eps ladder needs 0 < floor <= start and ratio in (0,1)"};
    for (double e = start; e >= floor * (1.0 - 1e-12); e *= ratio) eps.push_back(e);
  } else {
    std::string tok;
    std::stringstream ss(spec);
    while (std::getline(ss, tok, ',')) eps.push_back(parse_double(tok, "--eps"));
    for (double e : eps)
      if (e <= 0) throw UsageError{"--eps values must be positive"};
  }
  if (eps.empty()) throw UsageError{"--eps resolved to an empty ladder"};
  return eps;
}

HyperbolicModel resolve_model(const Args& a, nlohmann::json& cfg) {
  if (!a.params_file.empty()) {
    cfg["params_file"] = a.params_file;
    return model_from_json_file(a.params_file);
  }
  nlohmann::json params = nlohmann::json::object();
  if (!a.params_inline.empty()) {
    try {
      params = nlohmann::json::parse(a.params_inline);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError{std::string("--params is not valid JSON: ") + e.what()};
    }
  }
  if (a.gamma > 0) params["gamma"] = a.gamma;
  cfg["model"] = a.model;
  cfg["params"] = params;
  return builtin_model(a.model, params);
}

std::string out_path(const Args& a, const std::string& name) {
  std::filesystem::create_directories(a.out_dir);
  return (std::filesystem::path(a.out_dir) / name).string();
}

CurveProvider provider_of(const Args& a) {
  return a.provider == "lax" ? CurveProvider::lax_oracle : CurveProvider::envelope_engine;
}

// Least-squares slope of log(y) vs log(x); NaN when under-determined.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::nan("");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

int run_models(const Args& a) {
  if (a.action == "list") {
    for (const char* name : {"linear", "p_system", "noncons_demo"}) {
      HyperbolicModel m = builtin_model(name);
      std::printf("%-13s n=%d k=%d gap_c=%.6g radius=%.6g flux=%s\n", m.name.c_str(),
                  m.n, m.k, m.gap_c, m.domain.radius, m.has_flux() ? "yes" : "no");
    }
    return 0;
  }
  nlohmann::json cfg{{"command", "models verify"}};
  HyperbolicModel m = resolve_model(a, cfg);
  ModelReport rep = verify_model(m);
  std::printf("model %s: n=%d k=%d worst_gap=%.9g certified gap_c=%.9g grid=%d\n",
              m.name.c_str(), m.n, rep.k, rep.worst_gap, m.gap_c, rep.grid_points);
  if (m.has_flux())
    std::printf("flux consistency: max |A - DF| = %.3g\n", rep.max_jacobian_mismatch);
  else
    std::printf("non-conservative: jacobian curl margin = %.3g\n",
                jacobian_curl_margin(m));
  return 0;
}

int run_layer(const Args& a) {
  nlohmann::json cfg{{"command", "layer"}};
  HyperbolicModel m = resolve_model(a, cfg);
  const Vector U_bar = a.ubar.empty() ? m.domain.center : to_vec(a.ubar);
  cfg["ubar"] = jvec(U_bar);
  cfg["out_dir"] = a.out_dir;
  if (!a.seed.empty() && !a.ub.empty())
    throw UsageError{"layer takes --seed or --ub, not both"};

  LayerOptions lo;
  lo.s_max_factor = 0.6;  // chart cap used by the Riemann engine, not the tight default
  LayerTrajectory traj;
  if (!a.seed.empty()) {
    cfg["seed"] = a.seed;
    traj = layer_from_seed(m, U_bar, to_vec(a.seed), lo);
  } else if (!a.ub.empty()) {
    const double tol = a.tol > 0 ? a.tol : 1e-6;
    cfg["ub"] = a.ub;
    cfg["tol"] = tol;
    MembershipResult mem = membership(m, U_bar, to_vec(a.ub), tol, lo);
    std::printf("membership: %s  residual=%.3g  iterations=%d  S=%s\n",
                mem.in_manifold ? "in manifold" : "NOT in manifold", mem.residual,
                mem.iterations, str(mem.S).c_str());
    if (!mem.in_manifold) return 0;  // an answer, not an error; nothing to trace
    cfg["recovered_S"] = jvec(mem.S);
    traj = layer_from_seed(m, U_bar, mem.S, lo);
  } else {
    throw UsageError{"layer requires --seed (chart coordinates) or --ub (membership query)"};
  }

  const std::string path = out_path(a, "layer.csv");
  write_layer_csv(path, traj, cfg);
  std::printf("layer: %zu nodes on [0, %.6g], boundary value %s\n", traj.zeta.size(),
              traj.horizon, str(traj.boundary_value()).c_str());
  try {
    DecayReport dr = decay_report(traj, m.gap_c);
    std::printf("decay: fitted_rate=%.6g (gap_c=%.6g)  weighted_sup_tail=%.3g\n",
                dr.fitted_rate, m.gap_c, dr.weighted_sup_tail);
  } catch (const LabError&) {
    std::printf("decay: n/a (tail too short)\n");
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int run_wavefan(const Args& a) {
  nlohmann::json cfg{{"command", "wavefan"}};
  HyperbolicModel m = resolve_model(a, cfg);
  const Vector U_plus = a.u0.empty() ? m.domain.center : to_vec(a.u0);
  FanOptions fo;
  fo.s_max = 0.45 * m.domain.radius;  // scenario-scale cap, as in the Riemann engine
  if (a.tol > 0) fo.tol = a.tol;
  cfg["u0"] = jvec(U_plus);
  cfg["family"] = a.family;
  cfg["strength"] = a.strength;
  cfg["tol"] = fo.tol;
  cfg["out_dir"] = a.out_dir;

  WaveFanCurve curve =
      fan_curve(m, leading_order_closure(m, a.family, U_plus), a.family, a.strength,
                U_plus, fo);
  const std::string path = out_path(a, "curve.csv");
  write_curve_csv(path, curve, cfg);
  std::printf("wave-fan curve: family %d, strength %.9g, %d sweeps, residual %.3g\n",
              curve.family, curve.strength, curve.iterations, curve.residual);
  std::printf("endpoint: %s\n", str(curve.endpoint()).c_str());
  for (const FanPiece& p : classify(curve)) {
    if (p.type == PieceType::shock)
      std::printf("  shock        tau [%.9g, %.9g]  speed %.9g\n", p.tau_lo, p.tau_hi,
                  p.speed_lo);
    else
      std::printf("  rarefaction  tau [%.9g, %.9g]  speed [%.9g, %.9g]\n", p.tau_lo,
                  p.tau_hi, p.speed_lo, p.speed_hi);
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int run_viscous(const Args& a) {
  nlohmann::json cfg{{"command", "viscous"}};
  HyperbolicModel m = resolve_model(a, cfg);
  const Vector U_b = to_vec(a.ub);
  const Vector U_right = a.u0.empty() ? m.domain.center : to_vec(a.u0);
  const std::vector<double> eps = parse_eps(a.eps_spec);
  const double Xi = a.Xi > 0 ? a.Xi : 1.25 * std::max(max_wave_speed(m), 0.8);
  MeshPolicy policy = a.mesh;
  if (a.tol > 0) policy.newton_tol = a.tol;
  cfg["ub"] = jvec(U_b);
  cfg["u0"] = jvec(U_right);
  cfg["eps"] = eps;
  cfg["Xi"] = Xi;
  cfg["newton_tol"] = policy.newton_tol;
  cfg["mesh"] = mesh_json(policy);
  cfg["out_dir"] = a.out_dir;

  LadderResult ladder = continuation_ladder(m, U_b, U_right, Xi, eps, policy);
  for (size_t j = 0; j < ladder.profiles.size(); ++j) {
    nlohmann::json rung_cfg = cfg;
    rung_cfg["rung"] = j;
    rung_cfg["epsilon"] = ladder.profiles[j].epsilon;
    char name[32];
    std::snprintf(name, sizeof name, "profile_%zu.csv", j);
    write_profile_csv(out_path(a, name), ladder.profiles[j], rung_cfg);
    std::printf("rung %zu: eps=%.9g nodes=%zu residual=%.3g newton=%d\n", j,
                ladder.profiles[j].epsilon, ladder.profiles[j].xi.size(),
                ladder.profiles[j].residual_norm, ladder.profiles[j].newton_iterations);
  }
  const std::string manifest = out_path(a, "ladder.json");
  write_ladder_manifest(manifest, ladder, cfg);
  std::printf("wrote %s (%zu of %zu rungs)\n", manifest.c_str(),
              ladder.profiles.size(), eps.size());
  if (!ladder.complete()) {
    std::fprintf(stderr, "error: rung %d failed: %s\n", ladder.failed_rung,
                 ladder.failure_message.c_str());
    return 2;
  }
  return 0;
}

int run_solve(const Args& a) {
  nlohmann::json cfg{{"command", "solve"}};
  HyperbolicModel m = resolve_model(a, cfg);
  const Vector U_0 = a.u0.empty() ? m.domain.center : to_vec(a.u0);
  const Vector U_b = to_vec(a.ub);
  RiemannOptions ro;
  ro.provider = provider_of(a);
  if (a.tol > 0) ro.tol = a.tol;
  cfg["u0"] = jvec(U_0);
  cfg["ub"] = jvec(U_b);
  cfg["provider"] = a.provider;
  cfg["tol"] = ro.tol;
  cfg["out_dir"] = a.out_dir;

  FanSolution fan = solve_boundary_riemann(m, U_0, U_b, ro);
  const std::string path = out_path(a, "fan.csv");
  write_fan_csv(path, fan, cfg);
  std::printf("boundary Riemann solution (%s provider, %d Newton steps, residual %.3g)\n",
              a.provider.c_str(), fan.newton_iterations, fan.residual);
  std::printf("trace U_bar: %s\n", str(fan.trace_U_bar).c_str());
  std::printf("layer S: %s\n", str(fan.S).c_str());
  std::printf("wave strengths: %s\n", str(fan.strengths).c_str());
  std::printf("pieces: %zu\n", fan.pieces.size());
  for (const OrderedPiece& op : fan.pieces) {
    const FanPiece& p = op.piece;
    std::printf("  family %d %-11s speed [%.9g, %.9g]\n", fan.waves[op.wave].family,
                p.type == PieceType::shock ? "shock" : "rarefaction", p.speed_lo,
                p.speed_hi);
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int run_compare(const Args& a) {
  nlohmann::json cfg{{"command", "compare"}};
  HyperbolicModel m = resolve_model(a, cfg);
  const Vector U_0 = a.u0.empty() ? m.domain.center : to_vec(a.u0);
  const Vector U_b = to_vec(a.ub);
  const std::vector<double> eps = parse_eps(a.eps_spec);
  CompareOptions co;
  co.riemann.provider = provider_of(a);
  co.mesh = a.mesh;
  if (a.tol > 0) co.riemann.tol = a.tol;
  if (a.Xi > 0) co.Xi = a.Xi;
  cfg["u0"] = jvec(U_0);
  cfg["ub"] = jvec(U_b);
  cfg["eps"] = eps;
  cfg["Z"] = a.Z;
  cfg["provider"] = a.provider;
  cfg["mesh"] = mesh_json(co.mesh);
  cfg["out_dir"] = a.out_dir;

  ComparisonReport rep = compare_limits(m, U_0, U_b, eps, a.Z, co);
  const std::string path = out_path(a, "convergence.csv");
  write_convergence_csv(path, rep, cfg);

  std::printf("%-14s %-14s %-14s %-14s\n", "epsilon", "l1_fan_dist", "sup_inner_dist",
              "weighted_tail");
  std::vector<double> es, l1s;
  for (const ComparisonRow& r : rep.rows) {
    std::printf("%-14.6g %-14.6g %-14.6g %-14.6g\n", r.epsilon, r.l1_fan_dist,
                r.sup_inner_dist, r.weighted_tail);
    es.push_back(r.epsilon);
    l1s.push_back(r.l1_fan_dist);
  }

  // Informational thresholds; solver failures already exited via LabError.
  bool sup_mono = true, tail_mono = true;
  for (size_t j = 1; j < rep.rows.size(); ++j) {
    sup_mono &= rep.rows[j].sup_inner_dist <=
                rep.rows[j - 1].sup_inner_dist * (1 + 1e-9) + 1e-15;
    // the weighted tail bottoms out at inner-grid interpolation noise
    // (~1e-8 .. 1e-7); jitter below 1e-6 is "converged", not an increase
    tail_mono &= rep.rows[j].weighted_tail <=
                 rep.rows[j - 1].weighted_tail * (1 + 1e-3) + 1e-6;
  }
  const double slope = loglog_slope(es, l1s);
  std::printf("sup_inner_dist non-increasing: %s\n", sup_mono ? "PASS" : "FAIL");
  std::printf("weighted_tail non-increasing: %s\n", tail_mono ? "PASS" : "FAIL");
  if (std::isnan(slope))
    std::printf("l1_fan_dist slope >= 0.8: n/a (need >= 2 rungs)\n");
  else
    std::printf("l1_fan_dist slope >= 0.8: %s (slope %.3f)\n",
                slope >= 0.8 ? "PASS" : "FAIL", slope);
  std::printf("wrote %s\n", path.c_str());
  return 0;  // thresholds are informational
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"brlab: boundary layers, wave-fan curves, and boundary Riemann solutions"};
  app.require_subcommand(1);
  Args a;

  auto model_flags = [&](CLI::App* c) {
    c->add_option("--model", a.model, "builtin model: linear | p_system | noncons_demo")
        ->check(CLI::IsMember({"linear", "p_system", "noncons_demo"}));
    c->add_option("--params-file", a.params_file, "model configuration JSON file");
    c->add_option("--params", a.params_inline, "inline JSON parameter object");
    c->add_option("--gamma", a.gamma, "adiabatic exponent (shorthand for params.gamma)");
  };
  auto out_flags = [&](CLI::App* c) {
    c->add_option("--out-dir", a.out_dir, "artifact directory (default '.')");
    c->add_option("--tol", a.tol, "solver tolerance override");
    c->add_option("--jobs", a.jobs, "reserved; scenarios run sequentially")
        ->check(CLI::Range(1, 64));
  };
  auto mesh_flags = [&](CLI::App* c) {
    c->add_option("--mesh-base-nodes", a.mesh.base_nodes, "initial mesh size")
        ->check(CLI::Range(16, 1000000));
    c->add_option("--mesh-first-cell", a.mesh.first_cell_factor,
                  "first cell = factor * eps");
    c->add_option("--mesh-growth", a.mesh.growth,
                  "geometric cell growth; <= 1 means uniform");
    c->add_option("--mesh-refine-fraction", a.mesh.refine_fraction,
                  "fraction of cells marked per refinement round");
    c->add_option("--mesh-refine-rounds", a.mesh.max_refine_rounds,
                  "max adaptive refinement rounds");
  };

  CLI::App* models = app.add_subcommand("models", "list the zoo or verify a model");
  models->add_option("action", a.action, "list | verify")
      ->required()
      ->check(CLI::IsMember({"list", "verify"}));
  model_flags(models);

  CLI::App* layer = app.add_subcommand("layer", "trace a boundary layer; writes layer.csv");
  model_flags(layer);
  out_flags(layer);
  layer->add_option("--ubar", a.ubar, "equilibrium state (default: domain center)")
      ->delimiter(',');
  layer->add_option("--seed", a.seed, "stable-chart coordinates S (k values)")
      ->delimiter(',');
  layer->add_option("--ub", a.ub, "boundary state for a membership query")
      ->delimiter(',');

  CLI::App* wavefan =
      app.add_subcommand("wavefan", "build one wave-fan curve; writes curve.csv");
  model_flags(wavefan);
  out_flags(wavefan);
  wavefan->add_option("--u0", a.u0, "base state U+ (default: domain center)")
      ->delimiter(',');
  wavefan->add_option("--family", a.family, "characteristic family (1-based)")->required();
  wavefan->add_option("--strength", a.strength, "signed wave strength")->required();

  CLI::App* viscous = app.add_subcommand(
      "viscous", "continuation ladder of self-similar viscous profiles");
  model_flags(viscous);
  out_flags(viscous);
  viscous->add_option("--ub", a.ub, "boundary state at xi=0")->delimiter(',')->required();
  viscous->add_option("--u0", a.u0, "right state (default: domain center)")
      ->delimiter(',');
  viscous->add_option("--eps", a.eps_spec, "ladder: start:floor:xratio, list, or value")
      ->required();
  viscous->add_option("--Xi", a.Xi, "right end of the xi window (default: auto)");
  mesh_flags(viscous);

  CLI::App* solve =
      app.add_subcommand("solve", "solve the boundary Riemann problem; writes fan.csv");
  model_flags(solve);
  out_flags(solve);
  solve->add_option("--u0", a.u0, "initial datum (default: domain center)")
      ->delimiter(',');
  solve->add_option("--ub", a.ub, "boundary datum")->delimiter(',')->required();
  solve->add_option("--provider", a.provider, "wave-curve provider: envelope | lax")
      ->check(CLI::IsMember({"envelope", "lax"}));

  CLI::App* compare = app.add_subcommand(
      "compare", "viscous ladder vs assembled fan; writes convergence.csv");
  model_flags(compare);
  out_flags(compare);
  compare->add_option("--u0", a.u0, "initial datum (default: domain center)")
      ->delimiter(',');
  compare->add_option("--ub", a.ub, "boundary datum")->delimiter(',')->required();
  compare->add_option("--eps", a.eps_spec, "ladder: start:floor:xratio, list, or value")
      ->required();
  compare->add_option("--Z", a.Z, "inner window [0, Z] in layer variables (default 20)");
  compare->add_option("--Xi", a.Xi, "right end of the xi window (default: auto)");
  compare->add_option("--provider", a.provider, "wave-curve provider: envelope | lax")
      ->check(CLI::IsMember({"envelope", "lax"}));
  mesh_flags(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (models->parsed()) return run_models(a);
    if (layer->parsed()) return run_layer(a);
    if (wavefan->parsed()) return run_wavefan(a);
    if (viscous->parsed()) return run_viscous(a);
    if (solve->parsed()) return run_solve(a);
    if (compare->parsed()) return run_compare(a);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.msg.c_str());
    return 1;
  } catch (const LabError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
