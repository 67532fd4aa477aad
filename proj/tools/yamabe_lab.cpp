#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "yamabe/io.hpp"
#include "yamabe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace yf;
using json = nlohmann::json;

namespace {

constexpr int kPass = 0, kError = 1, kViolations = 2;

struct Globals {
  std::string config, out = ".";
  std::uint64_t seed = 20261017;
};

struct ParamArgs {
  int n = 5;
  double gamma = 1.0, A = 1.0;
};

void add_param_args(CLI::App* app, ParamArgs& a) {
  app->add_option("--n", a.n, "dimension")->check(CLI::Range(3, 64));
  app->add_option("--gamma", a.gamma, "tail exponent gamma > 0");
  app->add_option("--A", a.A, "tip constant A > 0");
}

json config_json(const Globals& g) { return g.config.empty() ? json::object() : read_json(g.config); }

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

int cmd_soliton(const Globals& g, const ParamArgs& a, std::vector<double> range, double tol) {
  const auto p = make_params(a.n, a.gamma, a.A, 1.0);
  SolitonOptions o;
  o.xi_min = range.at(0);
  o.xi_max = range.at(1);
  o.tol = tol;
  const auto s = solve_soliton(p, o);
  double res = 0;
  for (double x = -8.0; x <= std::min(40.0, s.xi_max); x += 0.005) res = std::max(res, std::abs(soliton_ode_residual(s, x)));
  write_profile_csv(out_path(g, "soliton.csv"), {Coord::inner_xi, TimeKind::tau, 0.0, s.xi, s.w});
  const double R0 = soliton_curvature_max(s);
  const json j = {{"params", params_json(p)},
                  {"kappa_residual", s.kappa_residual},
                  {"shift", s.shift},
                  {"b0", s.b0_eff},
                  {"b1", s.b1_eff},
                  {"tail", {{"a", s.a}, {"b", s.b}, {"d", s.d}, {"c5", s.c5}}},
                  {"max_ode_residual", res},
                  {"R_origin", R0},
                  {"R_origin_target", 2.0 * p.gamma * p.A},
                  {"R_origin_rmnorm", R0 / std::sqrt(p.n * (p.n - 1.0))}};
  write_json(out_path(g, "soliton.json"), j);
  std::cout << j.dump(2) << "\n";
  return std::abs(s.kappa_residual) <= 1e-6 && res <= 1e-8 ? kPass : kViolations;
}

int cmd_build_outer(const Globals& g, const ParamArgs& a) {
  const auto p = make_params(a.n, a.gamma, a.A, 1.0);
  const auto w1 = build_w1(p), w2 = build_w2(p);
  std::vector<double> eta, v1, v2;
  for (std::size_t i = 0; i < w2.x().size(); ++i) {
    const double d = p.A * std::exp(w2.x()[i]);
    if (d < w1.d_min() || d > w1.d_max()) continue;
    eta.push_back(p.A + d);
    v1.push_back(w1.eval_off(d).w);
    v2.push_back(w2.values()[i]);
  }
  char meta[256];
  std::snprintf(meta, sizeof meta, "n=%d gamma=%.17g A=%.17g tol=%.3g", p.n, p.gamma, p.A, w2.tol());
  write_csv(out_path(g, "outer_tables.csv"), {"eta", "w1", "w2"}, {eta, v1, v2}, {meta});
  json corr = json::array();
  for (double theta : {p.theta_plus, p.theta_minus}) {
    const auto o = build_outer(p, theta);
    json cs = json::array();
    for (const auto& c : o.corrections) cs.push_back({{"k", c.k}, {"l", c.l}, {"c", c.c}});
    corr.push_back({{"theta", theta},
                    {"N", o.N},
                    {"far_field", {{"b", o.far.b}, {"C", o.far.C}, {"a", o.far.a}, {"a_fit", o.far.a_fit}}},
                    {"corrections", cs}});
  }
  write_json(out_path(g, "outer.json"), {{"params", params_json(p)}, {"outer", corr}});
  return kPass;
}

struct BarrierArgs {
  ParamArgs p;
  double xi0 = 5, xi1 = 10, eps = 1e-3, tau0 = 1, tau1 = 11, span = 8;
  bool auto_tune = false;
};

void add_barrier_args(CLI::App* app, BarrierArgs& b) {
  add_param_args(app, b.p);
  app->add_option("--xi0", b.xi0);
  app->add_option("--xi1", b.xi1);
  app->add_option("--eps", b.eps);
  app->add_option("--tau0", b.tau0);
  app->add_option("--tau1", b.tau1);
  app->add_option("--span", b.span, "tau window of the certification");
  app->add_flag("--auto-tune", b.auto_tune, "search (xi0, xi1, eps, tau0, tau1)");
}

struct Certified {
  FlowParams params;
  CompositeBarrier barrier;
  CertReport report;
  std::optional<TuneResult> tuning;
};

Certified certify(const BarrierArgs& b) {
  ParamOverrides ov;
  ov.xi0 = b.xi0;
  ov.xi1 = b.xi1;
  ov.eps = b.eps;
  ov.tau0 = b.tau0;
  auto p = make_params(b.p.n, b.p.gamma, b.p.A, 1.0, ov);
  const auto kit = build_kit(p);
  Certified c;
  if (b.auto_tune) {
    TuneOptions o;
    o.span = b.span;
    c.tuning = auto_tune(p, kit.outer_plus, kit.outer_minus, kit.soliton, o);
    c.barrier = c.tuning->barrier;
    c.report = c.tuning->cert;
    c.params = c.barrier.params;
    return c;
  }
  c.params = p;
  c.barrier = assemble_barrier(p, kit.outer_plus, kit.outer_minus, kit.soliton, b.tau1, b.tau1 + b.span);
  c.report = check_certificate(c.barrier, default_cert_grids(c.barrier, b.span));
  for (const auto& s : outer_scans(*kit.outer_plus, *kit.outer_minus, p.xi0, p.tau0, b.span)) {
    c.report.scans.push_back(s);
    if (!s.ok()) c.report.scans_ok = false;
  }
  return c;
}

json cert_summary(const CertReport& r) {
  return {{"ok", r.ok()},
          {"ordering_ok", r.ordering_ok},
          {"continuity_ok", r.continuity_ok},
          {"jumps_ok", r.jumps_ok},
          {"scans_ok", r.scans_ok},
          {"order_margin", r.order_margin},
          {"jump_plus_min", r.jump_plus_min},
          {"jump_minus_min", r.jump_minus_min},
          {"continuity_max", r.continuity_max},
          {"C_gap_min", r.C_gap_min}};
}

int cmd_assemble(const Globals& g, const BarrierArgs& b) {
  const auto c = certify(b);
  write_csv(out_path(g, "barrier_C.csv"), {"tau", "C1", "C2"}, {c.barrier.tau_grid, c.barrier.C1, c.barrier.C2},
            {"tau1=" + std::to_string(c.barrier.tau1)});
  json j = {{"params", params_json(c.params)}, {"tau1", c.barrier.tau1}, {"cert", cert_summary(c.report)}};
  j["scans"] = json::array();
  for (const auto& s : c.report.scans) j["scans"].push_back(scan_json(s));
  if (c.tuning) {
    json att = json::array();
    for (const auto& a : c.tuning->attempts)
      att.push_back({{"xi1", a.xi1}, {"eps", a.eps}, {"tau1", a.tau1}, {"ok", a.ok}, {"failed", a.failed}});
    j["tuning"] = {{"found", c.tuning->found}, {"attempts", att}};
  }
  write_json(out_path(g, "barrier.json"), j);
  std::cout << j["cert"].dump(2) << "\n";
  return c.report.ok() ? kPass : kViolations;
}

int cmd_verify(const Globals& g, const BarrierArgs& b) {
  const auto c = certify(b);
  json scans = json::array();
  bool clean = c.report.ok();
  for (const auto& s : c.report.scans) {
    scans.push_back({{"operator", s.op},
                     {"region", s.region},
                     {"samples", s.samples},
                     {"violations", s.violations.size()},
                     {"worst_margin", s.worst_margin},
                     {"band_fraction", s.band_fraction}});
  }
  // Seeded spot checks of the correction-table ODE identity.
  std::mt19937_64 rng(g.seed);
  const auto& o = *c.barrier.outer_plus;
  std::uniform_real_distribution<double> ux(std::log(o.w1tab->d_min()) + 1.0, std::log(o.w1tab->d_max()) - 1.0);
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const double d = std::exp(ux(rng));
    for (const auto* t : {o.w1tab.get(), o.w2tab.get()}) {
      const double f = t->which() == 1 ? f1_off(d, c.params) : f2_off(d, c.params);
      worst = std::max(worst, std::abs(t->ode_residual_at(d)) / std::max(std::abs(f), 1e-300));
    }
  }
  const bool spot_ok = worst <= 1e-6;
  clean = clean && spot_ok;
  const json j = {{"params", params_json(c.params)},
                  {"tau1", c.barrier.tau1},
                  {"seed", g.seed},
                  {"cert", cert_summary(c.report)},
                  {"scans", scans},
                  {"table_spot_check", {{"samples", 400}, {"worst_relative", worst}, {"ok", spot_ok}}}};
  write_json(out_path(g, "verify.json"), j);
  std::cout << j.dump(2) << "\n";
  return clean ? kPass : kViolations;
}

int cmd_run(const Globals& g) {
  const json cj = config_json(g);
  const auto cfg = parse_run_config(cj);
  const auto kit = build_kit(cfg.params);
  const auto a = execute_run(cfg, kit);
  fs::create_directories(fs::path(g.out) / "snapshots");
  json files = json::array();
  for (std::size_t k = 0; k < a.run.snaps.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/snap_%04zu.csv", k);
    write_profile_csv(out_path(g, name),
                      {Coord::inner_xi, TimeKind::tau, a.run.snaps[k].time, a.run.grid, a.run.snaps[k].w});
    files.push_back(name);
  }
  const json used = run_config_json(a.config);
  json m = {{"config", used},
            {"config_sha256", sha256_hex(used.dump())},
            {"tau1", a.barrier.tau1},
            {"ok", a.run.ok},
            {"abort_reason", a.run.abort_reason},
            {"positivity", a.positivity},
            {"stats",
             {{"accepted", a.run.stats.accepted},
              {"rejected", a.run.stats.rejected},
              {"max_newton", a.run.stats.max_newton},
              {"dt_min_used", a.run.stats.dt_min_used},
              {"dt_max_used", a.run.stats.dt_max_used}}},
            {"sandwich_worst", a.sandwich_worst},
            {"snapshots", files}};
  if (a.shifts) m["shifts"] = {{"xi_a", a.shifts->xi_a}, {"xi_b", a.shifts->xi_b}, {"tight_ordered", a.shifts->tight_ordered()}};
  write_json(out_path(g, "run_manifest.json"), m);
  std::cout << "run " << (a.run.ok ? "completed" : "aborted: " + a.run.abort_reason) << ", "
            << a.run.snaps.size() << " snapshots, worst sandwich " << a.sandwich_worst << "\n";
  if (!a.run.ok) return kError;
  return a.sandwich_worst <= cfg.sandwich_tol ? kPass : kViolations;
}

int cmd_fit(const Globals& g) {
  const json m = read_json(out_path(g, "run_manifest.json"));
  const auto cfg = parse_run_config(m.at("config"));
  const FlowParams& p = cfg.params;
  RunResult r;
  r.mode = Mode::rescaled;
  for (const auto& f : m.at("snapshots")) {
    const auto prof = read_profile_csv(out_path(g, f.get<std::string>()));
    if (r.grid.empty()) r.grid = prof.grid;
    r.snaps.push_back({prof.time, prof.values});
  }
  auto series = curvature_series(r, p);
  series.fit = fit_blowup(series);
  const auto sol = solve_soliton(p);
  std::vector<double> tau, t, sup, r0, arg, lnr, dist, shift;
  json dj = json::array();
  for (std::size_t k = 0; k < r.snaps.size(); ++k) {
    const auto& row = series.rows[k];
    tau.push_back(row.tau);
    t.push_back(row.t);
    sup.push_back(row.supR);
    r0.push_back(row.R0);
    arg.push_back(row.argmax_xi);
    lnr.push_back(row.lnR);
    const auto d = soliton_distance(r.grid, r.snaps[k].w, sol);
    dist.push_back(d.error);
    shift.push_back(d.shift);
  }
  write_csv(out_path(g, "blowup.csv"), {"tau", "t", "supR_scaled", "R0_scaled", "argmax_xi", "lnR", "soliton_dist", "soliton_shift"},
            {tau, t, sup, r0, arg, lnr, dist, shift});
  const auto& f = *series.fit;
  const double target_p = 1.0 + p.gamma, target_c = 2.0 * p.gamma * p.A;
  const bool ok = std::abs(f.p - target_p) <= 0.05 * target_p && std::abs(f.c - target_c) <= 0.1 * target_c &&
                  dist.back() <= 1e-2 && non_increasing(dist, dist.size() / 5);
  const json j = {{"p", f.p},
                  {"p_se", f.p_se},
                  {"c_scalar", f.c},
                  {"c_rmnorm", f.c_rm},
                  {"lnc_se", f.lnc_se},
                  {"targets", {{"p", target_p}, {"c_scalar", target_c}, {"c_rmnorm", target_c / std::sqrt(p.n * (p.n - 1.0))}}},
                  {"window", {f.window.tau_lo, f.window.tau_hi}},
                  {"window_rows", f.rows},
                  {"monotone", f.monotone},
                  {"soliton_distance_final", dist.back()},
                  {"soliton_distance_non_increasing", non_increasing(dist, dist.size() / 5)},
                  {"ok", ok}};
  write_json(out_path(g, "fit.json"), j);
  std::cout << j.dump(2) << "\n";
  return ok ? kPass : kViolations;
}

int cmd_report(const Globals& g) {
  json j = {{"schema_version", 1}};
  json missing = json::array(), manifest = json::array();
  for (const auto& [key, file] : std::vector<std::pair<std::string, std::string>>{
           {"soliton", "soliton.json"}, {"outer", "outer.json"}, {"barrier", "barrier.json"},
           {"verify", "verify.json"}, {"run", "run_manifest.json"}, {"fit", "fit.json"}}) {
    const auto path = out_path(g, file);
    if (!fs::exists(path)) {
      missing.push_back(key);
      continue;
    }
    j[key] = read_json(path);
    manifest.push_back({{"file", file}, {"sha256", sha256_file(path)}});
  }
  for (const auto& file : {"soliton.csv", "outer_tables.csv", "barrier_C.csv", "blowup.csv"})
    if (fs::exists(out_path(g, file))) manifest.push_back({{"file", file}, {"sha256", sha256_file(out_path(g, file))}});
  j["missing"] = missing;
  j["manifest"] = manifest;
  j["curvature_sup_scope"] = "computational domain only; the far tail is not certified";
  write_json(out_path(g, "report.json"), j);
  std::cout << "report.json written; missing sections: " << missing.dump() << "\n";
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type II Yamabe flow singularity lab"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "seed for randomized spot checks");

  ParamArgs sp;
  std::vector<double> range{-10.0, 40.0};
  double tol = 1e-12;
  auto* sol = app.add_subcommand("soliton", "solve and normalize the steady soliton");
  add_param_args(sol, sp);
  sol->add_option("--xi-range", range, "xi_min xi_max")->expected(2);
  sol->add_option("--tol", tol, "integrator tolerance");

  auto* bar = app.add_subcommand("barriers", "outer tables and composite barriers");
  bar->require_subcommand(1);
  ParamArgs op;
  auto* bo = bar->add_subcommand("build-outer", "tabulate w1, w2 and the far-field constants");
  add_param_args(bo, op);
  BarrierArgs ba;
  auto* bas = bar->add_subcommand("assemble", "assemble and certify the composite barriers");
  add_barrier_args(bas, ba);

  BarrierArgs va;
  auto* ver = app.add_subcommand("verify", "sign scans of the barrier operators");
  add_barrier_args(ver, va);

  app.add_subcommand("run", "integrate the rescaled flow from a JSON config");
  app.add_subcommand("fit", "blow-up fit and soliton distances for a finished run in --out");
  app.add_subcommand("report", "bundle the artifacts in --out with content hashes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kError;
  }
  try {
    const auto& name = app.get_subcommands().front()->get_name();
    if (name == "soliton") return cmd_soliton(g, sp, range, tol);
    if (name == "barriers") return bo->parsed() ? cmd_build_outer(g, op) : cmd_assemble(g, ba);
    if (name == "verify") return cmd_verify(g, va);
    if (name == "run") return cmd_run(g);
    if (name == "fit") return cmd_fit(g);
    if (name == "report") return cmd_report(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
