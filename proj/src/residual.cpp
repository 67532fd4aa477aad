#include "yamabe/residual.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace yf {

namespace {

constexpr double kBand = 64.0 * std::numeric_limits<double>::epsilon();

}  // namespace

std::string operator_name(Operator op) {
  switch (op) {
    case Operator::B_outer: return "B";
    case Operator::I_inner: return "I";
    case Operator::Cyl: return "Cyl";
  }
  return "?";
}

OpValue B_operator(const Jet& j, double eta, double tau, const FlowParams& p) {
  if (!(j.w > 0.0)) throw std::domain_error("B_operator: non-positive profile value");
  const double e = std::exp(-2.0 * p.gamma * tau);
  const double q1 = j.w1 / j.w;
  const double d2 = (p.n - 1.0) * e * j.w2 / j.w;
  const double d1 = (p.n - 1.0) * e * p.theta_c() * q1 * q1;
  const double tr = p.gamma * eta * j.w1 + j.w - p.K();
  const double v = j.wt - d2 - d1 - tr;
  const double scale = std::abs(j.wt) + std::abs(d2) + std::abs(d1) + std::abs(p.gamma * eta * j.w1) +
                       std::abs(j.w) + p.K();
  return {v, kBand * scale};
}

OpValue B_residual_off(const OuterAnsatz& o, double d, double tau) {
  const FlowParams& p = o.params;
  const auto r = what_pm_off(o, d, tau);
  if (!(r.w > 0.0)) throw std::domain_error("B_residual: non-positive profile value");
  const double e = std::exp(-2.0 * p.gamma * tau);
  const double q1 = r.w_eta / r.w;
  const double d2 = (p.n - 1.0) * e * r.w_eta2 / r.w;
  const double d1 = (p.n - 1.0) * e * p.theta_c() * q1 * q1;
  const double v = r.w_tau - d2 - d1 - r.transport;
  const double scale = std::abs(r.w_tau) + std::abs(d2) + std::abs(d1) + std::abs(r.transport);
  return {v, kBand * scale};
}

OpValue B_residual(const OuterAnsatz& o, double eta, double tau) {
  return B_residual_off(o, eta - o.params.A, tau);
}

OpValue I_operator(const Jet& j, double tau, const FlowParams& p, double extra_band) {
  if (!(j.w > 0.0)) throw std::domain_error("I_operator: non-positive profile value");
  const double e = std::exp(-p.gamma * tau);
  const double q1 = j.w1 / j.w;
  const double t1 = e * j.wt, t2 = e * (1.0 + p.gamma) * j.w;
  const double d2 = (p.n - 1.0) * j.w2 / j.w;
  const double d1 = (p.n - 1.0) * p.theta_c() * q1 * q1;
  const double tr = p.gamma * p.A * j.w1;
  const double v = t1 - t2 - d2 - d1 + p.K() - tr;
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(d2) + std::abs(d1) + p.K() + std::abs(tr);
  return {v, kBand * scale + extra_band};
}

OperatorSample cyl_residual(const std::function<double(double, double)>& w, double s, double t,
                            const FlowParams& p, double hs, double ht) {
  const double n = p.n;
  const double ev = (n - 2.0) / 4.0, eu = (n + 2.0) / 4.0;
  auto eval = [&](double h, double k) {
    auto v = [&](double x) { return std::pow(w(x, t), ev); };
    const double w0 = w(s, t);
    if (!(w0 > 0.0)) throw std::domain_error("cyl_residual: non-positive profile value");
    const double vss = (-v(s + 2 * h) + 16 * v(s + h) - 30 * v(s) + 16 * v(s - h) - v(s - 2 * h)) / (12 * h * h);
    const double ut = (std::pow(w(s, t + k), eu) - std::pow(w(s, t - k), eu)) / (2 * k);
    return p.m / (n - 1.0) * ut - vss + 0.25 * (n - 2.0) * (n - 2.0) * std::pow(w0, ev);
  };
  OperatorSample o;
  o.op = Operator::Cyl;
  o.x = s;
  o.time = t;
  o.used = Deriv::fd;
  o.step = hs;
  const double r1 = eval(hs, ht);
  const double r2 = eval(2 * hs, 2 * ht);
  o.v.value = r1;
  o.err_est = std::abs(r2 - r1) / 3.0;
  o.v.band = o.err_est;
  return o;
}

ScanReport sign_scan(const std::string& op, const std::string& region, const std::vector<double>& xs,
                     const std::vector<double>& taus, const std::function<OpValue(double, double)>& f,
                     int expected_sign, Exec exec, bool stop_early) {
  ScanReport rep;
  rep.op = op;
  rep.region = region;
  rep.expected_sign = expected_sign;
  const long NX = static_cast<long>(xs.size()), NT = static_cast<long>(taus.size());
  const long N = NX * NT;
  std::vector<OpValue> vals(N);
  // 0 pass, 1 band, 2 violation, 3 not evaluated
  std::vector<char> cls(N, 3);
  auto classify = [&](long k) {
    const double x = xs[k % NX], tau = taus[k / NX];
    vals[k] = f(x, tau);
    const double sv = expected_sign * vals[k].value;
    cls[k] = std::abs(vals[k].value) <= vals[k].band ? 1 : (sv > 0.0 ? 0 : 2);
  };
  if (stop_early || exec == Exec::serial) {
    for (long k = 0; k < N; ++k) {
      classify(k);
      if (stop_early && cls[k] == 2) break;
    }
  } else {
#pragma omp parallel for schedule(dynamic, 64)
    for (long k = 0; k < N; ++k) classify(k);
  }
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (long k = 0; k < N; ++k) {
    if (cls[k] == 3) continue;
    ++rep.samples;
    rep.worst_margin = std::min(rep.worst_margin, expected_sign * vals[k].value);
    if (cls[k] == 0) ++rep.passed;
    else if (cls[k] == 1) ++rep.within_band;
    else rep.violations.push_back({xs[k % NX], taus[k / NX], vals[k].value, vals[k].band});
  }
  rep.band_fraction = rep.samples ? static_cast<double>(rep.within_band) / rep.samples : 0.0;
  return rep;
}

std::vector<double> clustered_grid(double lo, double hi, int N, double a) {
  std::vector<double> g(N);
  for (int k = 0; k < N; ++k) g[k] = lo + (hi - lo) * std::expm1(a * k / (N - 1.0)) / std::expm1(a);
  g.back() = hi;
  return g;
}

std::vector<double> geometric_grid(double lo, double hi, int N) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("geometric_grid: need 0 < lo < hi");
  std::vector<double> g(N);
  for (int k = 0; k < N; ++k) g[k] = lo * std::pow(hi / lo, k / (N - 1.0));
  g.back() = hi;
  return g;
}

std::vector<double> uniform_grid(double lo, double hi, int N) {
  std::vector<double> g(N);
  for (int k = 0; k < N; ++k) g[k] = lo + (hi - lo) * k / (N - 1.0);
  g.back() = hi;
  return g;
}

}  // namespace yf
