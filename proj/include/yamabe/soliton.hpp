#pragma once

#include <boost/math/interpolators/quintic_hermite.hpp>
#include <memory>
#include <vector>

#include "yamabe/coords.hpp"

namespace yf {

struct SolitonOptions {
  double xi_min = -10.0;
  double xi_max = 40.0;
  double tol = 1e-12;   // integrator tolerance
  double b0 = 1.0;      // seed constant of the origin series before normalization
  double h = 0.01;      // table spacing
  double kappa_tol = 1e-9;
};

/// Steady soliton w0(xi), translation-normalized so that w0 = a xi + 0 + b/xi + O(xi^-3).
struct SolitonProfile {
  FlowParams params;
  double xi_min = 0, xi_max = 0;
  std::vector<double> xi, w, wp, wpp;
  double kappa_residual = 0;
  double shift = 0;  // total translation applied to the b0 seed
  // origin tail: w = e^{2xi} (b0_eff + b1_eff e^{2xi})
  double b0_eff = 0, b1_eff = 0;
  // far tail: w = a xi + b/xi + d/xi^3 + c5/xi^5; d is the derived value, d_fit/c2_fit are fitted
  double a = 0, b = 0, d = 0, c5 = 0;
  double c2_fit = 0, d_fit = 0;
  std::shared_ptr<boost::math::interpolators::quintic_hermite<std::vector<double>>> spline;

  double eval(double x) const;
  double eval_d1(double x) const;
  double eval_d2(double x) const;
  /// Unique xi with eval(xi) = v; throws std::domain_error for v <= 0.
  double invert(double v) const;
};

SolitonProfile solve_soliton(const FlowParams& p, const SolitonOptions& opt = {});

/// -(n-1)(w''/w + (n-6)/4 (w'/w)^2) + (n-1)(n-2) - gamma A w' evaluated from the interpolant.
double soliton_ode_residual(const SolitonProfile& s, double xi);

/// U^{1-m}(y) = w0(ln y) / y^2, with the origin limit b0_eff at y = 0.
std::vector<double> soliton_on_plane(const SolitonProfile& s, const std::vector<double>& y);

/// Scalar curvature of the planar soliton metric on a uniform y-grid [0, y_max].
CurvatureField soliton_plane_curvature(const SolitonProfile& s, double y_max = 1.0, int nodes = 2001,
                                       Exec exec = Exec::parallel);

/// R at the origin of the planar soliton metric.
double soliton_curvature_max(const SolitonProfile& s);

}  // namespace yf
