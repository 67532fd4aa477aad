#pragma once

#include <memory>
#include <string>
#include <vector>

#include "yamabe/outer.hpp"
#include "yamabe/residual.hpp"
#include "yamabe/soliton.hpp"

namespace yf {

enum class Side { plus, minus };

/// (1 +- eps)^{-1} w0(xi + C): plus is the supersolution side.
double inner_pm(const SolitonProfile& s, double xi, Side side, double C, double eps);

struct GlueValue {
  double C = 0, Cprime = 0;
  double residual = 0;  // w0(xi1 + C) - (1 +- eps) e^{gamma tau} w^{+-}
};

/// Shift C(tau) solving w0(xi1 + C) = (1 +- eps) e^{gamma tau} w^{+-}(A + xi1 e^{-gamma tau}, tau), with C'.
GlueValue solve_glue(const SolitonProfile& s, const OuterAnsatz& o, double tau, Side side, double eps,
                     double xi1);

struct CompositeBarrier {
  FlowParams params;  // eps, xi0, xi1, tau0 of the build
  std::shared_ptr<const OuterAnsatz> outer_plus, outer_minus;
  std::shared_ptr<const SolitonProfile> soliton;
  double tau1 = 0;  // validity start
  std::vector<double> tau_grid, C1, C2;
  double C_slope_max = 0;  // max |FD slope| of C1, C2 over the table
  double shift = 0;        // shifted view: arguments are xi - gamma A shift
  bool swapped = false;    // sides exchanged (negative control)
};

struct CompositeEval {
  double w = 0, w_xi = 0, w_xixi = 0, w_tau = 0;
  bool inner = false;
  GlueValue glue;
};

/// Tables C1, C2 on a geometric grid of tau - tau1 in [0, tau_end - tau1].
CompositeBarrier assemble_barrier(const FlowParams& p, std::shared_ptr<const OuterAnsatz> outer_plus,
                                  std::shared_ptr<const OuterAnsatz> outer_minus,
                                  std::shared_ptr<const SolitonProfile> soliton, double tau1, double tau_end,
                                  int tau_nodes = 64);

CompositeEval composite_eval(const CompositeBarrier& b, double xi, double tau, Side side);
double composite(const CompositeBarrier& b, double xi, double tau, Side side);
/// Values on a whole grid, sharing one glue solve.
std::vector<double> composite_on(const CompositeBarrier& b, const std::vector<double>& xi, double tau,
                                 Side side);
/// One-sided xi-derivatives at xi1: (inner, outer).
std::pair<double, double> composite_jump(const CompositeBarrier& b, double tau, Side side);

CompositeBarrier shifted(const CompositeBarrier& b, double shift);

struct CertReport {
  bool ordering_ok = false, continuity_ok = false, scans_ok = false, jumps_ok = false;
  double order_margin = 0;     // min (w+ - w-)/w+
  double positivity_min = 0;   // min w-
  double continuity_max = 0;   // max relative jump of the value at xi1
  double jump_plus_min = 0;    // min (left - right) derivative of w+
  double jump_minus_min = 0;   // min (right - left) derivative of w-
  double C_gap_min = 0;        // min C1 - C2
  std::vector<ScanReport> scans;  // I on w+-, B on the outer pieces
  bool ok() const { return ordering_ok && continuity_ok && scans_ok && jumps_ok; }
};

struct CertGrids {
  std::vector<double> xi;        // ordering grid
  std::vector<double> tau;       // common tau grid
  std::vector<double> xi_inner;  // I scan
  int eta_nodes = 120;           // B scan from A + xi1 e^{-gamma tau} to eta_hi
  double eta_hi = 1e3;           // in units of A
};

CertGrids default_cert_grids(const CompositeBarrier& b, double span = 8.0);

CertReport check_certificate(const CompositeBarrier& b, const CertGrids& g, Exec exec = Exec::parallel,
                          bool stop_early = false);
/// Same checks with the roles of the two sides exchanged (negative control).
CertReport check_certificate_swapped(const CompositeBarrier& b, const CertGrids& g);

/// Outer-only scan: B[w+] >= 0 and B[w-] <= 0 for eta in [A + xi0 e^{-gamma tau}, eta_hi A], tau in [tau0, tau0+span].
std::vector<ScanReport> outer_scans(const OuterAnsatz& plus, const OuterAnsatz& minus, double xi0, double tau0,
                                    double span = 8.0, int eta_nodes = 120, int tau_nodes = 33,
                                    double eta_hi = 1e3, Exec exec = Exec::parallel, bool stop_early = false);

struct TuneOptions {
  std::vector<double> xi0_list{5, 10, 20, 40};
  std::vector<double> eps_list{0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4, 2e-4, 1e-4};
  std::vector<int> xi1_factors{2, 4, 8};
  double tau0_step = 1.0, tau0_max = 40.0;
  double tau1_step = 1.0, tau1_span = 40.0;
  double span = 8.0;  // scan window in tau
};

struct TuneAttempt {
  double xi0, xi1, eps, tau0, tau1;
  bool ok;
  std::string failed;  // first failing item
};

struct TuneResult {
  bool found = false;
  double xi0 = 0, xi1 = 0, eps = 0, tau0 = 0, tau1 = 0;
  std::vector<ScanReport> outer;  // outer-only scans at (xi0, tau0)
  CertReport cert;            // final check (or the last attempt when nothing passed)
  std::vector<TuneAttempt> attempts;
  CompositeBarrier barrier;
};

/// Search order: xi0 (raising tau0), then xi1, then eps decreasing, raising tau1.
TuneResult auto_tune(const FlowParams& p, std::shared_ptr<const OuterAnsatz> outer_plus,
                     std::shared_ptr<const OuterAnsatz> outer_minus,
                     std::shared_ptr<const SolitonProfile> soliton, const TuneOptions& opt = {});

}  // namespace yf
