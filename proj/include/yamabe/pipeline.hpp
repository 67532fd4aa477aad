#pragma once

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "yamabe/diagnostics.hpp"

namespace yf {

/// Outer ansatz pair and soliton for one parameter set.
struct BarrierKit {
  FlowParams params;
  std::shared_ptr<const OuterAnsatz> outer_plus, outer_minus;
  std::shared_ptr<const SolitonProfile> soliton;
};

BarrierKit build_kit(const FlowParams& p);

enum class InitialData { barrier_midpoint, condition_ii, custom_file };

struct RunConfig {
  FlowParams params;
  bool auto_tune = false;
  double tau1 = 11.0;  // barrier validity start when not auto-tuned
  InitialData init = InitialData::barrier_midpoint;
  double tau_start = -1;  // defaults to tau1
  double tau_span = 6.0;
  ConditionII cii;  // params and tau_start are filled in from the run
  std::string custom_file;
  double xi_min = -8.0, xi_max = 40.0, h = 0.01;
  RunControl control;  // t_end is filled in from tau_start + tau_span
  double sandwich_tol = 1e-3;
};

/// Keys: params {n, gamma, A, T, theta_plus, theta_minus, eps, xi0, xi1, tau0}, barrier {tau1, auto_tune},
/// initial_data, condition_ii {xi_c, xi_s0, c_t, width}, custom_file, grid {xi_min, xi_max, h},
/// dt {dt0, dt_min, dt_max, grow_after, cfl}, tau_start, tau_span, cadence, sandwich_tol. All optional.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json run_config_json(const RunConfig& c);
/// Throws std::invalid_argument: tau span, grid coverage xi_min <= -6 and xi_max >= 4 xi1.
void validate_run_config(const RunConfig& c);

struct RunArtifacts {
  RunConfig config;
  CompositeBarrier barrier;
  std::optional<TuneResult> tuning;
  RunResult run;
  std::optional<Shifts> shifts;  // condition-ii and custom data
  double sandwich_worst = 0;     // against the barrier pair, or the shifted pair
  std::vector<double> sandwich_by_snapshot;
  bool positivity = true;
  BlowupSeries blowup;
  std::vector<std::pair<double, SolitonDistance>> distances;
};

/// Builds the barrier, initial data and runs; the right boundary is checked against the outer corridor
/// after every step in barrier-midpoint runs.
RunArtifacts execute_run(const RunConfig& c, const BarrierKit& kit);

}  // namespace yf
