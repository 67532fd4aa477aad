#include "yamabe/outer.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace yf {

namespace {

struct Zeta {
  double z;    // (eta/A)^{-1/gamma}
  double omz;  // 1 - z, computed without cancellation
};

Zeta zeta(double d, const FlowParams& p) {
  if (!(d > 0.0)) throw std::domain_error("outer profile: eta must exceed A");
  const double lg = std::log1p(d / p.A) / p.gamma;
  return {std::exp(-lg), -std::expm1(-lg)};
}

}  // namespace

double what0_off(double d, const FlowParams& p) { return p.K() * zeta(d, p).omz; }

double what0_d1_off(double d, const FlowParams& p) {
  const double eta = p.A + d;
  return p.K() * zeta(d, p).z / (p.gamma * eta);
}

double what0_d2_off(double d, const FlowParams& p) {
  const double eta = p.A + d;
  return -p.K() * zeta(d, p).z * (1.0 + p.gamma) / (p.gamma * p.gamma * eta * eta);
}

double what0(double eta, const FlowParams& p) { return what0_off(eta - p.A, p); }
double what0_d1(double eta, const FlowParams& p) { return what0_d1_off(eta - p.A, p); }
double what0_d2(double eta, const FlowParams& p) { return what0_d2_off(eta - p.A, p); }

double f1_off(double d, const FlowParams& p) {
  const auto [z, omz] = zeta(d, p);
  const double eta = p.A + d;
  const double g = p.gamma;
  return (p.n - 1.0) * (1.0 + g) / (g * g) * z / (eta * eta * omz);
}

double f2_off(double d, const FlowParams& p) {
  const auto [z, omz] = zeta(d, p);
  const double eta = p.A + d;
  const double g = p.gamma;
  const double r = z / omz;
  return -(p.n - 1.0) / (g * g) * r * r / (eta * eta);
}

double f1_d1_off(double d, const FlowParams& p) {
  const auto [z, omz] = zeta(d, p);
  const double eta = p.A + d;
  const double g = p.gamma;
  const double c1 = (p.n - 1.0) * (1.0 + g) / (g * g);
  return c1 / (eta * eta * eta) * (-z / (g * omz * omz) - 2.0 * z / omz);
}

double f2_d1_off(double d, const FlowParams& p) {
  const auto [z, omz] = zeta(d, p);
  const double eta = p.A + d;
  const double g = p.gamma;
  const double c2 = (p.n - 1.0) / (g * g);
  const double r = z / omz;
  const double rp = -z / (g * omz * omz);  // eta * d(r)/d(eta)
  return -c2 / (eta * eta * eta) * (2.0 * r * rp - 2.0 * r * r);
}

double f1(double eta, const FlowParams& p) { return f1_off(eta - p.A, p); }
double f2(double eta, const FlowParams& p) { return f2_off(eta - p.A, p); }

namespace {

double f_off(int which, double d, const FlowParams& p) { return which == 1 ? f1_off(d, p) : f2_off(d, p); }
double fp_off(int which, double d, const FlowParams& p) {
  return which == 1 ? f1_d1_off(d, p) : f2_d1_off(d, p);
}

}  // namespace

TableEval CorrectionTable::identity(double d, double w) const {
  const double eta = p_.A + d;
  const double g = p_.gamma;
  const double d1 = (f_off(which_, d, p_) - (1.0 + 2.0 * g) * w) / (g * eta);
  const double d2 = (fp_off(which_, d, p_) - (1.0 + 3.0 * g) * d1) / (g * eta);
  return {w, d1, d2};
}

CorrectionTable::CorrectionTable(int which, const FlowParams& p, std::vector<double> x,
                                 std::vector<double> w, double eta_max, double tol)
    : which_(which), p_(p), x_(std::move(x)), w_(std::move(w)), eta_max_(eta_max), tol_(tol) {
  const std::size_t N = x_.size();
  std::vector<double> xs = x_, ys = w_, dy(N), d2y(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double d = p_.A * std::exp(x_[i]);
    const auto e = identity(d, w_[i]);
    dy[i] = d * e.d1;
    d2y[i] = d * d * e.d2 + d * e.d1;
  }
  d_min_ = p_.A * std::exp(x_.front());
  d_max_ = p_.A * std::exp(x_.back());
  spline_ = std::make_shared<boost::math::interpolators::quintic_hermite<std::vector<double>>>(
      std::move(xs), std::move(ys), std::move(dy), std::move(d2y));
}

TableEval CorrectionTable::eval_off(double d) const {
  if (!(d >= d_min_ && d <= d_max_)) throw std::out_of_range("outer table: eta outside tabulated range");
  const double x = std::clamp(std::log(d / p_.A), x_.front(), x_.back());
  return identity(d, (*spline_)(x));
}

double CorrectionTable::ode_residual_at(double d) const {
  if (!(d >= d_min_ && d <= d_max_)) throw std::out_of_range("outer table: eta outside tabulated range");
  const double x = std::clamp(std::log(d / p_.A), x_.front(), x_.back());
  const double eta = p_.A + d;
  const double w = (*spline_)(x);
  const double wp = spline_->prime(x) / d;
  return p_.gamma * eta * wp + (1.0 + 2.0 * p_.gamma) * w - f_off(which_, d, p_);
}

namespace {

struct Grid {
  std::vector<double> x;
  std::size_t anchor = 0;  // index of x = 0 (eta = 2A)
};

Grid table_grid(const TableOptions& opt) {
  if (!(opt.eta_max_factor > 2.0)) throw std::invalid_argument("outer table: eta_max must exceed 2A");
  const long jlo = static_cast<long>(std::floor(std::log(opt.d_min_factor) / opt.dx));
  const long jhi = static_cast<long>(std::floor(std::log(opt.eta_max_factor - 1.0) / opt.dx));
  Grid g;
  for (long j = jlo; j <= jhi; ++j) g.x.push_back(j * opt.dx);
  g.anchor = static_cast<std::size_t>(-jlo);
  return g;
}

// Integral of (f_i/gamma) eta^{1+1/gamma} over one x-cell, with eta = A(1 + e^x).
double cell_integral(int which, const FlowParams& p, double xa, double xb, double tol) {
  auto g = [&](double x) {
    const double d = p.A * std::exp(x);
    const double eta = p.A + d;
    return f_off(which, d, p) / p.gamma * std::pow(eta, 1.0 + 1.0 / p.gamma) * d;
  };
  // Boost's recursive error estimate accumulates the roundoff floor, so deepen only on demand.
  const double goal = std::max(tol, 1e3 * std::numeric_limits<double>::epsilon());
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  for (unsigned depth = 0; depth <= 10; ++depth) {
    double err = 0.0, L1 = 0.0;
    const double val = GK::integrate(g, xa, xb, depth, goal, &err, &L1);
    if (err <= goal * L1) return val;
  }
  throw std::runtime_error("outer table: quadrature did not converge");
}

}  // namespace

CorrectionTable build_w2(const FlowParams& p, const TableOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("build_w2: tol must be positive");
  const Grid g = table_grid(opt);
  const std::size_t N = g.x.size();
  std::vector<double> cells(N - 1);
  for (std::size_t j = 0; j + 1 < N; ++j) cells[j] = cell_integral(2, p, g.x[j], g.x[j + 1], opt.tol);
  // Exact remainder beyond the last node: -(n-1) A^{1/gamma} / gamma^2 * z / (1 - z).
  const double dlast = p.A * std::exp(g.x.back());
  const auto zl = zeta(dlast, p);
  double I = -(p.n - 1.0) * std::pow(p.A, 1.0 / p.gamma) / (p.gamma * p.gamma) * zl.z / zl.omz;
  std::vector<double> w(N);
  const double e = -2.0 - 1.0 / p.gamma;
  for (std::size_t j = N; j-- > 0;) {
    if (j + 1 < N) I += cells[j];
    const double eta = p.A * (1.0 + std::exp(g.x[j]));
    w[j] = -std::pow(eta, e) * I;
  }
  return CorrectionTable(2, p, g.x, std::move(w), p.A + dlast, opt.tol);
}

CorrectionTable build_w1(const FlowParams& p, const TableOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("build_w1: tol must be positive");
  const Grid g = table_grid(opt);
  const std::size_t N = g.x.size();
  std::vector<double> J(N, 0.0);
  for (std::size_t j = g.anchor + 1; j < N; ++j) J[j] = J[j - 1] + cell_integral(1, p, g.x[j - 1], g.x[j], opt.tol);
  for (std::size_t j = g.anchor; j-- > 0;) J[j] = J[j + 1] - cell_integral(1, p, g.x[j], g.x[j + 1], opt.tol);
  std::vector<double> w(N);
  const double e = -2.0 - 1.0 / p.gamma;
  for (std::size_t j = 0; j < N; ++j) w[j] = std::pow(p.A * (1.0 + std::exp(g.x[j])), e) * J[j];
  const double dlast = p.A * std::exp(g.x.back());
  return CorrectionTable(1, p, g.x, std::move(w), p.A + dlast, opt.tol);
}

Vkl vkl(int k, int l, double eta, double gamma) {
  if (k < 1 || l < -1 || l > k) throw std::out_of_range("vkl: index out of range");
  if (!(eta > 0.0)) throw std::domain_error("vkl: eta must be positive");
  if (l == -1) return {0.0, 0.0, 0.0};
  const double p = -2.0 * k - 1.0 / gamma;
  const double L = std::log(eta);
  auto Lp = [&](int j) { return j < 0 ? 0.0 : std::pow(L, j); };
  const double e0 = std::pow(eta, p);
  const double v = e0 * Lp(l);
  const double d1 = e0 / eta * (p * Lp(l) + l * Lp(l - 1));
  const double d2 = e0 / (eta * eta) * (p * (p - 1.0) * Lp(l) + (2.0 * p - 1.0) * l * Lp(l - 1) + l * (l - 1.0) * Lp(l - 2));
  return {v, d1, d2};
}

namespace {

struct LineFit {
  double slope, icept, rms_res, rms_y;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  double rr = 0, ry = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - slope * x[i] - icept;
    rr += r * r;
    ry += y[i] * y[i];
  }
  return {slope, icept, std::sqrt(rr / n), std::sqrt(ry / n)};
}

}  // namespace

FarField far_field_constants(const FlowParams& p, const CorrectionTable& w1, const CorrectionTable& w2,
                             double theta) {
  const int M = 200;
  const double lo = 1e2 * p.A, hi = 1e4 * p.A;
  if (hi > w1.eta_max() || hi > w2.eta_max())
    throw std::runtime_error("far-field fit: tables must reach 1e4 A (increase eta_max)");
  std::vector<double> L(M), y0(M), y1(M), y2(M);
  const double q = 1.0 / p.gamma;
  for (int i = 0; i < M; ++i) {
    const double eta = lo * std::pow(hi / lo, i / (M - 1.0));
    const auto a = w1.eval(eta);
    const auto b = w2.eval(eta);
    L[i] = std::log(eta);
    y0[i] = (a.w + theta * b.w) * std::pow(eta, 2.0 + q);
    y1[i] = (a.d1 + theta * b.d1) * std::pow(eta, 3.0 + q);
    y2[i] = (a.d2 + theta * b.d2) * std::pow(eta, 4.0 + q);
  }
  FarField ff;
  const auto h0 = fit_line(L, y0);
  ff.b = h0.slope;
  ff.C = h0.icept;
  const auto h1 = fit_line(L, y1);
  ff.bp = h1.slope;
  ff.Cp = h1.icept;
  const auto h2 = fit_line(L, y2);
  ff.a_fit = h2.slope;
  const double g = p.gamma;
  ff.a = (p.n - 1.0) * std::pow(p.A, q) * (1.0 + g) * (1.0 + 2.0 * g) * (1.0 + 3.0 * g) / std::pow(g, 5);
  double s = 0.0;
  for (int i = 0; i < M; ++i) s += y2[i] - ff.a * L[i];
  ff.Cpp = s / M;
  double rr = 0.0, ry = 0.0;
  for (int i = 0; i < M; ++i) {
    const double r = y2[i] - ff.a * L[i] - ff.Cpp;
    rr += r * r;
    ry += y2[i] * y2[i];
  }
  ff.rel_residual = std::sqrt(rr / ry);
  return ff;
}

int correction_order(double gamma) {
  if (gamma > 0.5) return 0;
  return static_cast<int>(std::floor(1.0 / (2.0 * gamma))) + 1;
}

std::vector<CorrectionCoeff> correction_coeffs(const FlowParams& p, const CorrectionTable& w1,
                                               const CorrectionTable& w2, double theta, FarField* info) {
  const int N = correction_order(p.gamma);
  if (N == 0) return {};
  const FarField ff = far_field_constants(p, w1, w2, theta);
  if (info) *info = ff;
  if (ff.rel_residual > 1e-3)
    throw std::runtime_error("correction_coeffs: far-field fit residual too large (insufficient eta_max)");
  const double g = p.gamma;
  const double nm2 = p.n - 2.0;
  // prev[l] holds c_{k-1,l}; level 2 is driven by h'' = a v_{2,1} + Cpp v_{2,0}.
  std::vector<double> prev(3, 0.0);
  prev[2] = -ff.a / (2.0 * g * nm2);
  prev[1] = -ff.Cpp / (g * nm2);
  std::vector<CorrectionCoeff> out;
  for (int l = 0; l <= 2; ++l) out.push_back({2, l, prev[l]});
  for (int k = 3; k <= N; ++k) {
    const double pk = -2.0 * (k - 1) - 1.0 / g;
    std::vector<double> cur(k + 1, 0.0);
    auto c_prev = [&](int j) { return j < static_cast<int>(prev.size()) ? prev[j] : 0.0; };
    for (int i = 0; i <= k - 1; ++i) {
      const double rhs = pk * (pk - 1.0) * c_prev(i) + (2.0 * pk - 1.0) * (i + 1) * c_prev(i + 1) +
                         (i + 2.0) * (i + 1.0) * c_prev(i + 2);
      cur[i + 1] = -rhs / (nm2 * g * (i + 1));
    }
    for (int l = 0; l <= k; ++l) out.push_back({k, l, cur[l]});
    prev = std::move(cur);
  }
  return out;
}

std::vector<CorrectionCoeff> correction_coeffs(const FlowParams& p, double theta) {
  if (correction_order(p.gamma) == 0) return {};
  const auto w1 = build_w1(p);
  const auto w2 = build_w2(p);
  return correction_coeffs(p, w1, w2, theta);
}

OuterAnsatz build_outer(const FlowParams& p, double theta, std::shared_ptr<const CorrectionTable> w1,
                        std::shared_ptr<const CorrectionTable> w2) {
  OuterAnsatz o;
  o.params = p;
  o.theta = theta;
  o.eta0 = 2.0 * p.A;
  o.w1tab = std::move(w1);
  o.w2tab = std::move(w2);
  o.N = correction_order(p.gamma);
  o.far = far_field_constants(p, *o.w1tab, *o.w2tab, theta);
  o.corrections = correction_coeffs(p, *o.w1tab, *o.w2tab, theta);
  return o;
}

OuterAnsatz build_outer(const FlowParams& p, double theta, const TableOptions& opt) {
  auto w1 = std::make_shared<const CorrectionTable>(build_w1(p, opt));
  auto w2 = std::make_shared<const CorrectionTable>(build_w2(p, opt));
  return build_outer(p, theta, std::move(w1), std::move(w2));
}

OuterEval what_pm_off(const OuterAnsatz& o, double d, double tau) {
  const FlowParams& p = o.params;
  const double g = p.gamma;
  const double eta = p.A + d;
  const double e1 = std::exp(-2.0 * g * tau);
  const auto a = o.w1tab->eval_off(d);
  const auto b = o.w2tab->eval_off(d);
  const double h = a.w + o.theta * b.w;
  const double h1 = a.d1 + o.theta * b.d1;
  const double h2 = a.d2 + o.theta * b.d2;
  OuterEval r;
  r.w = what0_off(d, p) + e1 * h;
  r.w_eta = what0_d1_off(d, p) + e1 * h1;
  r.w_eta2 = what0_d2_off(d, p) + e1 * h2;
  r.w_tau = -2.0 * g * e1 * h;
  r.transport = e1 * (g * eta * h1 + h);
  for (const auto& c : o.corrections) {
    if (c.c == 0.0) continue;
    const double ek = std::exp(-2.0 * c.k * g * tau);
    const auto v = vkl(c.k, c.l, eta, g);
    r.w += ek * c.c * v.v;
    r.w_eta += ek * c.c * v.d1;
    r.w_eta2 += ek * c.c * v.d2;
    r.w_tau += -2.0 * c.k * g * ek * c.c * v.v;
    r.transport += ek * c.c * (g * eta * v.d1 + v.v);
  }
  return r;
}

OuterEval what_pm(const OuterAnsatz& o, double eta, double tau) { return what_pm_off(o, eta - o.params.A, tau); }

}  // namespace yf
