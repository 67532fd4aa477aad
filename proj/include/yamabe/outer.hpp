#pragma once

#include <boost/math/interpolators/quintic_hermite.hpp>
#include <memory>
#include <vector>

#include "yamabe/coords.hpp"

namespace yf {

// Zero-order outer profile and its derivatives. The *_off variants take d = eta - A,
// which keeps full relative precision in the matching zone eta -> A.
double what0(double eta, const FlowParams& p);
double what0_d1(double eta, const FlowParams& p);
double what0_d2(double eta, const FlowParams& p);
double what0_off(double d, const FlowParams& p);
double what0_d1_off(double d, const FlowParams& p);
double what0_d2_off(double d, const FlowParams& p);

double f1(double eta, const FlowParams& p);
double f2(double eta, const FlowParams& p);
double f1_off(double d, const FlowParams& p);
double f2_off(double d, const FlowParams& p);
double f1_d1_off(double d, const FlowParams& p);
double f2_d1_off(double d, const FlowParams& p);

struct TableEval {
  double w, d1, d2;
};

/// Tabulated solution of gamma*eta*w' + (1+2gamma) w = f_i on (A, eta_max],
/// stored against x = ln((eta-A)/A). Values come from quadrature; derivatives
/// always from the ODE identity.
class CorrectionTable {
 public:
  CorrectionTable() = default;
  CorrectionTable(int which, const FlowParams& p, std::vector<double> x, std::vector<double> w,
                  double eta_max, double tol);

  int which() const { return which_; }
  double d_min() const { return d_min_; }
  double d_max() const { return d_max_; }
  double eta_max() const { return eta_max_; }
  double tol() const { return tol_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& values() const { return w_; }

  /// Throws std::out_of_range beyond the table (no extrapolation).
  TableEval eval_off(double d) const;
  TableEval eval(double eta) const { return eval_off(eta - p_.A); }
  /// gamma*eta*w' + (1+2gamma) w - f_i with w' taken from the interpolant.
  double ode_residual_at(double d) const;

 private:
  int which_ = 0;
  FlowParams p_;
  std::vector<double> x_, w_;
  double d_min_ = 0, d_max_ = 0, eta_max_ = 0, tol_ = 0;
  std::shared_ptr<boost::math::interpolators::quintic_hermite<std::vector<double>>> spline_;
  TableEval identity(double d, double w) const;
};

struct TableOptions {
  double eta_max_factor = 1e5;  // eta_max = factor * A
  double d_min_factor = 1e-14;  // smallest eta - A, in units of A
  double dx = 0.01;
  double tol = 1e-12;
};

CorrectionTable build_w2(const FlowParams& p, const TableOptions& opt = {});
CorrectionTable build_w1(const FlowParams& p, const TableOptions& opt = {});

struct Vkl {
  double v, d1, d2;
};

/// v_{k,l}(eta) = eta^{-2k-1/gamma} (ln eta)^l with derivatives; v_{k,-1} = 0.
Vkl vkl(int k, int l, double eta, double gamma);

struct CorrectionCoeff {
  int k, l;
  double c;
};

/// Far-field constants of h = w1 + theta w2: h ~ b v_{1,1} + C v_{1,0}, h' ~ ..., h'' ~ a v_{2,1} + Cpp v_{2,0}.
struct FarField {
  double b = 0, C = 0;          // h
  double bp = 0, Cp = 0;        // h' against eta^{-3-1/gamma} (ln eta, 1)
  double a = 0, Cpp = 0;        // h''
  double a_fit = 0;             // free two-term fit of h'' (consistency check on a)
  double rel_residual = 0;      // relative rms residual of the h'' fit
};

FarField far_field_constants(const FlowParams& p, const CorrectionTable& w1, const CorrectionTable& w2,
                             double theta);

/// Empty when gamma > 1/2. Otherwise c_{k,l} for k = 2..N, 0 <= l <= k, with c_{k,0} = 0.
std::vector<CorrectionCoeff> correction_coeffs(const FlowParams& p, const CorrectionTable& w1,
                                               const CorrectionTable& w2, double theta,
                                               FarField* info = nullptr);
std::vector<CorrectionCoeff> correction_coeffs(const FlowParams& p, double theta);
int correction_order(double gamma);

struct OuterAnsatz {
  FlowParams params;
  double theta = 0;
  double eta0 = 0;
  std::shared_ptr<const CorrectionTable> w1tab, w2tab;
  std::vector<CorrectionCoeff> corrections;
  int N = 0;
  FarField far;
};

OuterAnsatz build_outer(const FlowParams& p, double theta, const TableOptions& opt = {});
/// Reuses existing tables (they do not depend on theta).
OuterAnsatz build_outer(const FlowParams& p, double theta, std::shared_ptr<const CorrectionTable> w1,
                        std::shared_ptr<const CorrectionTable> w2);

/// Barrier-form outer value with analytic eta- and tau-derivatives.
/// transport = gamma*eta*w_eta + w - (n-1)(n-2), assembled term by term without cancellation.
struct OuterEval {
  double w, w_eta, w_eta2, w_tau, transport;
};

OuterEval what_pm_off(const OuterAnsatz& o, double d, double tau);
OuterEval what_pm(const OuterAnsatz& o, double eta, double tau);

}  // namespace yf
