#include "yamabe/pipeline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "yamabe/io.hpp"

namespace yf {

BarrierKit build_kit(const FlowParams& p) {
  BarrierKit k;
  k.params = p;
  auto w1 = std::make_shared<const CorrectionTable>(build_w1(p));
  auto w2 = std::make_shared<const CorrectionTable>(build_w2(p));
  k.outer_plus = std::make_shared<const OuterAnsatz>(build_outer(p, p.theta_plus, w1, w2));
  k.outer_minus = std::make_shared<const OuterAnsatz>(build_outer(p, p.theta_minus, w1, w2));
  k.soliton = std::make_shared<const SolitonProfile>(solve_soliton(p));
  return k;
}

namespace {

template <class T>
void get(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig c;
  int n = 5;
  double gamma = 1.0, A = 1.0, T = 1.0;
  ParamOverrides ov;
  ov.eps = 1e-3;
  ov.xi0 = 5.0;
  ov.xi1 = 10.0;
  ov.tau0 = 1.0;
  if (j.contains("params")) {
    const auto& q = j.at("params");
    get(q, "n", n);
    get(q, "gamma", gamma);
    get(q, "A", A);
    get(q, "T", T);
    for (auto [key, slot] : {std::pair{"theta_plus", &ov.theta_plus}, {"theta_minus", &ov.theta_minus},
                             {"eps", &ov.eps}, {"xi0", &ov.xi0}, {"xi1", &ov.xi1}, {"tau0", &ov.tau0}})
      if (q.contains(key)) *slot = q.at(key).get<double>();
  }
  c.params = make_params(n, gamma, A, T, ov);
  if (j.contains("barrier")) {
    get(j.at("barrier"), "tau1", c.tau1);
    get(j.at("barrier"), "auto_tune", c.auto_tune);
  }
  if (j.contains("initial_data")) {
    const auto s = j.at("initial_data").get<std::string>();
    if (s == "from-barrier-midpoint")
      c.init = InitialData::barrier_midpoint;
    else if (s == "from-condition-ii")
      c.init = InitialData::condition_ii;
    else if (s == "custom-file")
      c.init = InitialData::custom_file;
    else
      throw std::invalid_argument("unknown initial_data: " + s);
  }
  if (j.contains("condition_ii")) {
    const auto& q = j.at("condition_ii");
    get(q, "xi_c", c.cii.xi_c);
    get(q, "xi_s0", c.cii.xi_s0);
    get(q, "c_t", c.cii.c_t);
    get(q, "width", c.cii.width);
  }
  get(j, "custom_file", c.custom_file);
  if (j.contains("grid")) {
    get(j.at("grid"), "xi_min", c.xi_min);
    get(j.at("grid"), "xi_max", c.xi_max);
    get(j.at("grid"), "h", c.h);
  }
  if (j.contains("dt")) {
    const auto& q = j.at("dt");
    get(q, "dt0", c.control.dt0);
    get(q, "dt_min", c.control.dt_min);
    get(q, "dt_max", c.control.dt_max);
    get(q, "grow_after", c.control.grow_after);
    get(q, "cfl", c.control.cfl);
  }
  get(j, "tau_start", c.tau_start);
  get(j, "tau_span", c.tau_span);
  get(j, "cadence", c.control.cadence);
  get(j, "sandwich_tol", c.sandwich_tol);
  validate_run_config(c);
  return c;
}

nlohmann::json run_config_json(const RunConfig& c) {
  const char* init = c.init == InitialData::barrier_midpoint ? "from-barrier-midpoint"
                     : c.init == InitialData::condition_ii    ? "from-condition-ii"
                                                              : "custom-file";
  return {{"params", params_json(c.params)},
          {"barrier", {{"tau1", c.tau1}, {"auto_tune", c.auto_tune}}},
          {"initial_data", init},
          {"condition_ii", {{"xi_c", c.cii.xi_c}, {"xi_s0", c.cii.xi_s0}, {"c_t", c.cii.c_t}, {"width", c.cii.width}}},
          {"custom_file", c.custom_file},
          {"grid", {{"xi_min", c.xi_min}, {"xi_max", c.xi_max}, {"h", c.h}}},
          {"dt",
           {{"dt0", c.control.dt0},
            {"dt_min", c.control.dt_min},
            {"dt_max", c.control.dt_max},
            {"grow_after", c.control.grow_after},
            {"cfl", c.control.cfl}}},
          {"tau_start", c.tau_start},
          {"tau_span", c.tau_span},
          {"cadence", c.control.cadence},
          {"sandwich_tol", c.sandwich_tol}};
}

void validate_run_config(const RunConfig& c) {
  validate(c.params);
  if (!(c.tau_span > 0.0)) throw std::invalid_argument("run config: tau_end must exceed tau_start");
  if (!(c.xi_min <= -6.0)) throw std::invalid_argument("run config: grid must start at xi_min <= -6");
  if (!(c.xi_max >= 4.0 * c.params.xi1)) throw std::invalid_argument("run config: grid must reach xi_max >= 4 xi1");
  if (!(c.h > 0.0)) throw std::invalid_argument("run config: h must be positive");
  if (c.init == InitialData::custom_file && c.custom_file.empty())
    throw std::invalid_argument("run config: custom-file data needs custom_file");
}

RunArtifacts execute_run(const RunConfig& cfg, const BarrierKit& kit) {
  validate_run_config(cfg);
  RunArtifacts out;
  out.config = cfg;
  FlowParams p = cfg.params;
  double tau1 = cfg.tau1;
  if (cfg.auto_tune) {
    out.tuning = auto_tune(p, kit.outer_plus, kit.outer_minus, kit.soliton);
    if (!out.tuning->found) throw std::runtime_error("auto-tune found no certified barrier");
    p.eps = out.tuning->eps;
    p.xi0 = out.tuning->xi0;
    p.xi1 = out.tuning->xi1;
    p.tau0 = out.tuning->tau0;
    tau1 = out.tuning->tau1;
  }
  const double tau_start = cfg.tau_start >= 0 ? cfg.tau_start : tau1;
  if (tau_start < tau1) throw std::invalid_argument("run config: tau_start precedes barrier validity");
  const double tau_end = tau_start + cfg.tau_span;
  out.config.tau_start = tau_start;
  out.barrier = assemble_barrier(p, kit.outer_plus, kit.outer_minus, kit.soliton, tau1, tau_end);

  FlowState s;
  bool corridor = false;
  switch (cfg.init) {
    case InitialData::barrier_midpoint:
      s = init_from_barrier_mid(out.barrier, tau_start, cfg.xi_min, cfg.xi_max, cfg.h);
      corridor = true;
      break;
    case InitialData::condition_ii: {
      ConditionII c = cfg.cii;
      p.T = std::exp(-tau_start);
      c.params = p;
      c.tau_start = tau_start;
      out.config.cii = c;
      s = init_condition_ii(c, cfg.xi_min, cfg.xi_max, cfg.h);
      break;
    }
    case InitialData::custom_file: {
      const Profile prof = read_profile_csv(cfg.custom_file);
      if (prof.coord != Coord::inner_xi || prof.time_kind != TimeKind::tau)
        throw std::invalid_argument("custom data must be an xi profile at a tau time");
      s = make_state(Mode::rescaled, cfg.xi_min, cfg.xi_max, cfg.h, tau_start);
      s.w = sample(prof, s.grid);
      s.left.kind = BoundaryCond::Kind::series;
      s.left.slope = 2.0;
      s.fit_lo = -4.0;
      s.fit_hi = 0.0;
      s.right = outer_tail_bc(p, cfg.xi_max);
      break;
    }
  }
  out.config.params = p;
  if (cfg.init != InitialData::barrier_midpoint) out.shifts = fit_shifts(s.grid, s.w, tau_start, out.barrier);

  RunControl rc = cfg.control;
  rc.t_end = tau_end;
  const auto user = rc.on_step;
  rc.on_step = [&](const FlowState& st, std::string& why) {
    for (double v : st.w)
      if (!(v > 0.0)) {
        out.positivity = false;
        why = "positivity lost";
        return false;
      }
    if (corridor && !boundary_in_corridor(out.barrier, st.grid.back(), st.time, st.w.back())) {
      why = "right boundary left the outer corridor at tau " + std::to_string(st.time);
      return false;
    }
    return user ? user(st, why) : true;
  };
  out.run = run(std::move(s), p, rc);

  out.sandwich_worst = -std::numeric_limits<double>::infinity();
  for (const auto& sn : out.run.snaps) {
    const double v = out.shifts ? shifted_sandwich_check(out.run.grid, sn.w, sn.time, out.barrier, out.shifts->ordered())
                                : sandwich_check(out.run.grid, sn.w, sn.time, out.barrier);
    out.sandwich_by_snapshot.push_back(v);
    out.sandwich_worst = std::max(out.sandwich_worst, v);
  }
  out.blowup = curvature_series(out.run, p);
  try {
    out.blowup.fit = fit_blowup(out.blowup);
  } catch (const std::invalid_argument&) {
    // too few rows in the window; the report lists the fit as missing
  }
  for (const auto& sn : out.run.snaps)
    out.distances.emplace_back(sn.time, soliton_distance(out.run.grid, sn.w, *kit.soliton));
  return out;
}

}  // namespace yf
