#pragma once

#include <functional>
#include <string>
#include <vector>

#include "yamabe/barrier.hpp"
#include "yamabe/coords.hpp"

namespace yf {

enum class Mode { cylindrical, rescaled };

/// robin_log fixes (ln w)_x = slope. series extrapolates w = e^{slope x}(b0 + b1 e^{slope x}) from the two
/// nodes nearest the boundary, exact for both terms of the smooth-origin expansion.
struct BoundaryCond {
  enum class Kind { robin_log, series, dirichlet };
  Kind kind = Kind::robin_log;
  double slope = 0.0;                   // (ln w)_x at the boundary; 0 is Neumann
  std::function<double(double)> value;  // Dirichlet data as a function of time
};

struct StepStats {
  long accepted = 0, rejected = 0;
  int newton_iters = 0;  // last accepted step
  int max_newton = 0;
  double dt = 0;
  double max_residual = 0;
  double dt_min_used = 0, dt_max_used = 0;
};

/// w(s,t) in cylindrical mode, wbar(xi,tau) in rescaled mode, on a uniform grid.
struct FlowState {
  Mode mode = Mode::rescaled;
  double time = 0;
  double h = 0;
  std::vector<double> grid;
  std::vector<double> w;
  BoundaryCond left, right;
  StepStats stats;
  /// Difference weights are exact on e^{2x} for x <= fit_lo and plain central for x >= fit_hi,
  /// with a cosine blend of the fitted rate in between. The defaults disable fitting.
  double fit_lo = -1e300, fit_hi = -1e300;
};

FlowState make_state(Mode mode, double x0, double x1, double h, double time);

struct StepOutcome {
  bool ok = false;
  std::string reason;
  int iters = 0;
  double update = 0;
  std::size_t worst_node = 0;
};

/// One backward-Euler step by damped Newton on w. On failure the state is left untouched.
StepOutcome step(FlowState& s, double dt, const FlowParams& p, Exec exec = Exec::parallel);

/// Stationary part of the rescaled equation, (n-1)Q[w] - (n-1)(n-2) + gamma A w_xi, at interior nodes.
std::vector<double> stationary_bracket(const FlowState& s, const FlowParams& p);

struct Snapshot {
  double time;
  std::vector<double> w;
};

struct RunControl {
  double t_end = 0;
  double dt0 = 1e-4, dt_min = 1e-6, dt_max = 5e-3;
  int grow_after = 20;
  double cadence = 0.1;
  double cfl = 0.1;  // rescaled mode: relative change per step bound
  Exec exec = Exec::parallel;
  /// Called after every accepted step; returning false aborts with the message.
  std::function<bool(const FlowState&, std::string&)> on_step;
};

struct RunResult {
  Mode mode = Mode::rescaled;
  std::vector<double> grid;
  std::vector<Snapshot> snaps;
  StepStats stats;
  bool ok = false;
  std::string abort_reason;
};

RunResult run(FlowState s, const FlowParams& p, const RunControl& c);

/// Rescaled Dirichlet data from the exact cylinder-dominated tail
/// w(s,t) = (n-1)(n-2)[(T-t) - (s/A)^{-1/gamma} + c_t (s/A)^{-1/gamma-1}] at xi = xi_r.
BoundaryCond outer_tail_bc(const FlowParams& p, double xi_r, double c_t = 0.0);
/// Same tail in cylindrical mode at fixed s_r, with T - t as the time argument's complement.
BoundaryCond cylinder_tail_bc(const FlowParams& p, double s_r, double c_t = 0.0);

/// Geometric mean of the two composites at tau_start; series slope 2 on the left, outer tail on the right.
FlowState init_from_barrier_mid(const CompositeBarrier& b, double tau_start, double xi_min, double xi_max,
                                double h);

/// Admissible-class initial data on the cylinder, with T = e^{-tau_start}.
/// w0(s) = (n-1)(n-2)[T - (sigma/A)^{-1/gamma} + c_t (sigma/A)^{-1/gamma-1}] chi(s),
/// sigma a softplus cap at s_tip + xi_c and chi(s) = logistic(2(s - s_tip - xi_s0)).
struct ConditionII {
  FlowParams params;
  double tau_start = 0;
  double xi_c = 2.0, xi_s0 = 0.0, c_t = 0.0, width = 1.0;
  double s_tip() const;
  /// Rescaled data at tau_start, evaluated in offset form.
  double wbar(double xi) const;
  /// Cylindrical data for s > 0 (direct evaluation, loses relative precision near the tip).
  double w(double s) const;
};

/// Throws std::invalid_argument when the data leaves the admissible class on the sampled grid.
void validate_condition_ii(const ConditionII& c, const std::vector<double>& xi);

FlowState init_condition_ii(const ConditionII& c, double xi_min, double xi_max, double h);

/// Max over nodes of the barrier-relative violation; negative means strictly inside.
double sandwich_check(const std::vector<double>& xi, const std::vector<double>& w, double tau,
                      const CompositeBarrier& b);

/// e^{gamma tau} w^-(eta) <= value <= e^{gamma tau} w^+(eta) at xi.
bool boundary_in_corridor(const CompositeBarrier& b, double xi, double tau, double value);

}  // namespace yf
