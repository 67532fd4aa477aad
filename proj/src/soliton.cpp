#include "yamabe/soliton.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace yf {

namespace {

using State = std::array<double, 2>;  // (phi, phi') with phi = ln w

struct SolitonRhs {
  double n, cA;  // cA = gamma A / (n-1)
  void operator()(const State& x, State& dx, double) const {
    dx[0] = x[1];
    dx[1] = (n - 2.0) - 0.25 * (n - 2.0) * x[1] * x[1] - cA * x[1] * std::exp(x[0]);
  }
};

struct Raw {
  std::vector<double> xi, phi, dphi;
};

Raw integrate(const FlowParams& p, const SolitonOptions& opt, double b0, double xi_start, int steps) {
  namespace ode = boost::numeric::odeint;
  const double g = p.gamma * p.A;
  const double b1 = -g * b0 * b0 / (p.n * (p.n - 1.0));
  const double X = std::exp(2.0 * xi_start);
  State s{2.0 * xi_start + std::log(b0 + b1 * X), (2.0 * b0 + 4.0 * b1 * X) / (b0 + b1 * X)};
  SolitonRhs rhs{static_cast<double>(p.n), g / (p.n - 1.0)};
  Raw r;
  r.xi.reserve(steps + 1);
  r.phi.reserve(steps + 1);
  r.dphi.reserve(steps + 1);
  auto obs = [&](const State& x, double) {
    r.phi.push_back(x[0]);
    r.dphi.push_back(x[1]);
  };
  auto stepper = ode::make_controlled(opt.tol, opt.tol, ode::runge_kutta_fehlberg78<State>());
  try {
    ode::integrate_n_steps(stepper, rhs, s, xi_start, opt.h, steps, obs);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("solve_soliton: integration failed: ") + e.what());
  }
  for (int i = 0; i <= steps; ++i) r.xi.push_back(xi_start + i * opt.h);
  for (double v : r.phi)
    if (!std::isfinite(v)) throw std::runtime_error("solve_soliton: integration blow-up");
  return r;
}

// Mean of w - a xi - b/xi - d/xi^3 over the fit window.
double fit_kappa(const Raw& r, double a, double b, double d, double lo, double hi) {
  double s = 0.0;
  int cnt = 0;
  for (std::size_t i = 0; i < r.xi.size(); ++i) {
    const double x = r.xi[i];
    if (x < lo || x > hi) continue;
    s += std::exp(r.phi[i]) - a * x - b / x - d / (x * x * x);
    ++cnt;
  }
  if (cnt < 2) throw std::runtime_error("solve_soliton: empty far-field window");
  return s / cnt;
}

}  // namespace

SolitonProfile solve_soliton(const FlowParams& p, const SolitonOptions& opt) {
  if (!(opt.xi_min <= -8.0)) throw std::invalid_argument("solve_soliton: xi_min must be <= -8");
  if (!(opt.xi_max >= 30.0)) throw std::invalid_argument("solve_soliton: xi_max must be >= 30");
  if (!(opt.tol > 0.0) || !(opt.h > 0.0) || !(opt.b0 > 0.0))
    throw std::invalid_argument("solve_soliton: tol, h, b0 must be positive");
  const double gA = p.gamma * p.A;
  SolitonProfile s;
  s.params = p;
  s.a = p.K() / gA;
  s.b = (p.n - 1.0) * p.theta_c() / gA;
  s.d = (p.n - 1.0) * s.b * (8.0 - p.n) / (3.0 * gA * s.a);

  const int lead = static_cast<int>(std::lround(10.0 / opt.h));
  const int body = static_cast<int>(std::lround((opt.xi_max - opt.xi_min) / opt.h));
  const double xi_start = opt.xi_min - lead * opt.h;
  const double lo = 0.5 * opt.xi_max, hi = opt.xi_max;

  double b0 = opt.b0;
  double shift = 0.0;
  Raw r;
  double kappa = 0.0;
  for (int it = 0; it < 8; ++it) {
    r = integrate(p, opt, b0, xi_start, lead + body);
    kappa = fit_kappa(r, s.a, s.b, s.d, lo, hi);
    if (std::abs(kappa) <= opt.kappa_tol) break;
    shift += kappa / s.a;
    b0 *= std::exp(-2.0 * kappa / s.a);
  }
  if (!(std::abs(kappa) <= opt.kappa_tol))
    throw std::runtime_error("solve_soliton: far-field constant did not normalize");
  s.kappa_residual = kappa;
  s.shift = shift;
  s.b0_eff = b0;
  s.b1_eff = -gA * b0 * b0 / (p.n * (p.n - 1.0));

  const SolitonRhs rhs{static_cast<double>(p.n), gA / (p.n - 1.0)};
  s.xi_min = opt.xi_min;
  s.xi_max = opt.xi_min + body * opt.h;
  for (int j = 0; j <= body; ++j) {
    const std::size_t i = lead + j;
    const double w = std::exp(r.phi[i]);
    State x{r.phi[i], r.dphi[i]}, dx{};
    rhs(x, dx, 0.0);
    s.xi.push_back(opt.xi_min + j * opt.h);
    s.w.push_back(w);
    s.wp.push_back(w * x[1]);
    s.wpp.push_back(w * (dx[1] + x[1] * x[1]));
    if (!(s.wp.back() > 0.0)) throw std::runtime_error("solve_soliton: profile not increasing (bad seed)");
  }

  // Far-field coefficients beyond the derived ones, reported only.
  {
    double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0, u55 = 0, u5 = 0;
    for (std::size_t j = 0; j < s.xi.size(); ++j) {
      const double x = s.xi[j];
      if (x < lo || x > hi) continue;
      const double res = s.w[j] - s.a * x - s.b / x;
      const double e2 = 1.0 / (x * x), e3 = e2 / x;
      s11 += e2 * e2;
      s12 += e2 * e3;
      s22 += e3 * e3;
      t1 += e2 * res;
      t2 += e3 * res;
      const double e5 = e3 * e2;
      u55 += e5 * e5;
      u5 += e5 * (res - s.d * e3);
    }
    const double det = s11 * s22 - s12 * s12;
    s.c2_fit = (t1 * s22 - t2 * s12) / det;
    s.d_fit = (s11 * t2 - s12 * t1) / det;
    s.c5 = u5 / u55;
  }

  auto xs = s.xi, ys = s.w, d1 = s.wp, d2 = s.wpp;
  s.spline = std::make_shared<boost::math::interpolators::quintic_hermite<std::vector<double>>>(
      std::move(xs), std::move(ys), std::move(d1), std::move(d2));
  return s;
}

double SolitonProfile::eval(double x) const {
  if (x < xi_min) {
    const double X = std::exp(2.0 * x);
    return X * (b0_eff + b1_eff * X);
  }
  if (x > xi_max) {
    const double i1 = 1.0 / x, i2 = i1 * i1;
    return a * x + i1 * (b + i2 * (d + i2 * c5));
  }
  return (*spline)(x);
}

double SolitonProfile::eval_d1(double x) const {
  if (x < xi_min) {
    const double X = std::exp(2.0 * x);
    return X * (2.0 * b0_eff + 4.0 * b1_eff * X);
  }
  if (x > xi_max) {
    const double i2 = 1.0 / (x * x);
    return a - i2 * (b + i2 * (3.0 * d + i2 * 5.0 * c5));
  }
  return spline->prime(x);
}

double SolitonProfile::eval_d2(double x) const {
  if (x < xi_min) {
    const double X = std::exp(2.0 * x);
    return X * (4.0 * b0_eff + 16.0 * b1_eff * X);
  }
  if (x > xi_max) {
    const double i1 = 1.0 / x, i2 = i1 * i1;
    return i1 * i2 * (2.0 * b + i2 * (12.0 * d + i2 * 30.0 * c5));
  }
  return spline->double_prime(x);
}

double SolitonProfile::invert(double v) const {
  if (!(v > 0.0)) throw std::domain_error("soliton invert: value must be positive");
  double lo, hi, x;
  if (v < w.front()) {
    // b1 X^2 + b0 X - v = 0, smaller root
    const double X = 2.0 * v / (b0_eff + std::sqrt(b0_eff * b0_eff + 4.0 * b1_eff * v));
    x = 0.5 * std::log(X);
    lo = x - 1.0;
    hi = xi_min;
  } else if (v > w.back()) {
    x = (v - b / (v / a)) / a;
    lo = xi_max;
    hi = std::max(2.0 * v / a, xi_max + 1.0);
  } else {
    const auto it = std::upper_bound(w.begin(), w.end(), v);
    const std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - w.begin(), 1), w.size() - 1);
    lo = xi[j - 1];
    hi = xi[j];
    x = lo + (hi - lo) * (v - w[j - 1]) / (w[j] - w[j - 1]);
  }
  for (int it = 0; it < 100; ++it) {
    const double f = eval(x) - v;
    if (f > 0.0) hi = std::min(hi, x);
    else lo = std::max(lo, x);
    double xn = x - f / eval_d1(x);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    const double dx = xn - x;
    x = xn;
    if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double soliton_ode_residual(const SolitonProfile& s, double xi) {
  const double n = s.params.n;
  const double w = s.eval(xi), w1 = s.eval_d1(xi), w2 = s.eval_d2(xi);
  const double q = w1 / w;
  return -(n - 1.0) * (w2 / w + s.params.theta_c() * q * q) + s.params.K() - s.params.gamma * s.params.A * w1;
}

std::vector<double> soliton_on_plane(const SolitonProfile& s, const std::vector<double>& y) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) throw std::invalid_argument("soliton_on_plane: negative radius");
    out[i] = y[i] == 0.0 ? s.b0_eff : s.eval(std::log(y[i])) / (y[i] * y[i]);
  }
  return out;
}

CurvatureField soliton_plane_curvature(const SolitonProfile& s, double y_max, int nodes, Exec exec) {
  if (nodes < 5 || !(y_max > 0.0)) throw std::invalid_argument("soliton_plane_curvature: bad grid");
  Profile u{Coord::radial_r, TimeKind::tau, 0.0, {}, {}};
  u.grid.resize(nodes);
  for (int i = 0; i < nodes; ++i) u.grid[i] = y_max * i / (nodes - 1.0);
  u.values = soliton_on_plane(s, u.grid);
  const double q = 1.0 / (1.0 - s.params.m);
  for (double& v : u.values) v = std::pow(v, q);
  return scalar_curvature(u, s.params, exec);
}

double soliton_curvature_max(const SolitonProfile& s) {
  const double Rh = soliton_plane_curvature(s, 1.0, 1001).R[0];
  const double Rh2 = soliton_plane_curvature(s, 1.0, 2001).R[0];
  return (4.0 * Rh2 - Rh) / 3.0;
}

}  // namespace yf
