#pragma once

#include <functional>
#include <string>
#include <vector>

#include "yamabe/coords.hpp"
#include "yamabe/outer.hpp"

namespace yf {

/// Pointwise value with first/second space derivative and time derivative.
struct Jet {
  double w, w1, w2, wt;
};

/// Operator value plus the tolerance band used for sign classification.
struct OpValue {
  double value = 0;
  double band = 0;
};

enum class Operator { B_outer, I_inner, Cyl };
enum class Deriv { analytic, fd };

struct OperatorSample {
  Operator op;
  double x = 0, time = 0;
  OpValue v;
  Deriv used = Deriv::analytic;
  double step = 0;     // FD step, 0 for analytic samples
  double err_est = 0;  // Richardson estimate, FD samples only
};

std::string operator_name(Operator op);

/// w_tau - (n-1)e^{-2 gamma tau}(w''/w + (n-6)/4 (w'/w)^2) - (gamma eta w' + w - (n-1)(n-2)).
OpValue B_operator(const Jet& j, double eta, double tau, const FlowParams& p);
/// Same operator on an outer barrier candidate; transport is assembled term by term.
OpValue B_residual_off(const OuterAnsatz& o, double d, double tau);
OpValue B_residual(const OuterAnsatz& o, double eta, double tau);

/// e^{-gamma tau}(w_tau - (1+gamma)w) - (n-1)(w''/w + (n-6)/4 (w'/w)^2) + (n-1)(n-2) - gamma A w'.
/// extra_band widens the band, e.g. by the ODE residual of a tabulated profile.
OpValue I_operator(const Jet& j, double tau, const FlowParams& p, double extra_band = 0.0);

/// (m/(n-1)) (w^{(n+2)/4})_t - (w^{(n-2)/4})_ss + ((n-2)/2)^2 w^{(n-2)/4}.
/// Fourth-order in space, second-order in time; err from a step-doubling Richardson estimate.
OperatorSample cyl_residual(const std::function<double(double, double)>& w, double s, double t,
                            const FlowParams& p, double hs = 1e-2, double ht = 1e-4);

struct Violation {
  double x, time, value, band;
};

struct ScanReport {
  std::string op, region;
  int expected_sign = 1;
  std::size_t samples = 0, passed = 0, within_band = 0;
  std::vector<Violation> violations;
  double worst_margin = 0;  // min over samples of sign * value
  double band_fraction = 0;
  bool ok() const { return violations.empty(); }
};

/// Classifies f on xs x taus. Within-band samples are inconclusive, not failing.
/// stop_early ends the scan at the first violation (used by the tuner).
ScanReport sign_scan(const std::string& op, const std::string& region, const std::vector<double>& xs,
                     const std::vector<double>& taus, const std::function<OpValue(double, double)>& f,
                     int expected_sign, Exec exec = Exec::parallel, bool stop_early = false);

/// lo + (hi-lo) * (e^{a k/(N-1)} - 1)/(e^a - 1): clustered towards lo.
std::vector<double> clustered_grid(double lo, double hi, int N, double a = 3.0);
std::vector<double> geometric_grid(double lo, double hi, int N);
std::vector<double> uniform_grid(double lo, double hi, int N);

}  // namespace yf
