#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "yamabe/barrier.hpp"
#include "yamabe/flow.hpp"
#include "yamabe/residual.hpp"
#include "yamabe/soliton.hpp"

namespace yf {

/// Curvature values are rescaled: supR = (T-t)^{1+gamma} sup R, R0 likewise at the first node.
struct BlowupRow {
  double tau = 0, t = 0, supR = 0, R0 = 0, argmax_xi = 0;
  double lnR = 0;  // ln of the unscaled sup R, (1+gamma) tau + ln supR
};

struct FitWindow {
  double tau_lo = 0, tau_hi = 0;
};

/// ln(sup R) = p tau + ln c, i.e. sup R = c (T-t)^{-p}.
struct BlowupFit {
  double p = 0, c = 0, c_rm = 0;  // c_rm = c / sqrt(n(n-1))
  double p_se = 0, lnc_se = 0;
  FitWindow window;
  std::size_t rows = 0;
  double residual = 0;  // rms of the log fit
  bool monotone = true;  // sup R non-decreasing in the window
};

struct BlowupSeries {
  int n = 5;
  std::vector<BlowupRow> rows;
  std::optional<BlowupFit> fit;
};

BlowupRow curvature_row(const std::vector<double>& xi, const std::vector<double>& w, double tau,
                        const FlowParams& p, Exec exec = Exec::parallel);
BlowupSeries curvature_series(const RunResult& run, const FlowParams& p, Exec exec = Exec::parallel);

/// Last 1.5 decades of T - t, with the first 20% of those rows dropped.
FitWindow default_window(const BlowupSeries& s);
/// Throws std::invalid_argument with fewer than 8 rows in the window.
BlowupFit fit_blowup(const BlowupSeries& s, const FitWindow& w);
BlowupFit fit_blowup(const BlowupSeries& s);
/// Rows following supR = c (T-t)^{-p} exactly.
BlowupSeries synthetic_series(double p, double c, double tau_lo, double tau_hi, int rows, double gamma = 1.0,
                              double T = 1.0);

struct SolitonDistance {
  double shift = 0, error = 0;
  bool unimodal = true;  // coarse pre-scan has a single valley
};

/// min over c of max over the window of |w(xi) - w0(xi + c)|.
SolitonDistance soliton_distance(const std::vector<double>& xi, const std::vector<double>& w,
                                 const SolitonProfile& sol, double lo = -5.0, double hi = 10.0);

/// Non-increasing after the first `skip` entries, allowing each value to exceed the running minimum by `jitter`.
bool non_increasing(const std::vector<double>& v, std::size_t skip, double jitter = 0.05);

struct Shifts {
  double xi_a = 0, xi_b = 0;
  /// Admissible shifts form [xi_a, inf) and (-inf, xi_b], so an ordered admissible pair always exists.
  bool tight_ordered() const { return xi_a > xi_b; }
  /// (xi_a, xi_b) when already ordered, else (xi_b + gap, xi_b).
  Shifts ordered(double gap = 1e-6) const;
};

/// Smallest xi_a with w-(xi - gamma A xi_a) <= data and largest xi_b with data <= w+(xi - gamma A xi_b),
/// at tau = -ln T on the data nodes. Throws std::runtime_error when either side has no admissible shift.
Shifts fit_shifts(const std::vector<double>& xi, const std::vector<double>& data, double tau,
                  const CompositeBarrier& b, double search = 40.0, double step = 0.25);

/// sandwich_check against the translated pair: w-(xi - gamma A xi_a) below, w+(xi - gamma A xi_b) above.
double shifted_sandwich_check(const std::vector<double>& xi, const std::vector<double>& w, double tau,
                              const CompositeBarrier& b, const Shifts& s);

/// Report sections; absent entries are listed under "missing".
struct ReportInputs {
  std::optional<FlowParams> params;
  std::optional<TuneResult> tuning;
  std::vector<ScanReport> scans;
  std::optional<BlowupSeries> blowup;
  std::vector<std::pair<double, SolitonDistance>> distances;
  std::optional<Shifts> shifts;
  std::optional<RunResult> run;
  std::vector<std::string> files;  // hashed into the manifest
};

nlohmann::json params_json(const FlowParams& p);
nlohmann::json scan_json(const ScanReport& s, std::size_t max_violations = 20);
nlohmann::json report(const ReportInputs& in);

}  // namespace yf
