#include "yamabe/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "yamabe/fd.hpp"

namespace yf {

FlowState make_state(Mode mode, double x0, double x1, double h, double time) {
  if (!(x1 > x0) || !(h > 0.0)) throw std::invalid_argument("make_state: bad grid");
  const long N = std::lround((x1 - x0) / h) + 1;
  if (N < 5) throw std::invalid_argument("make_state: fewer than 5 nodes");
  FlowState s;
  s.mode = mode;
  s.time = time;
  s.h = (x1 - x0) / (N - 1.0);
  s.grid.resize(N);
  for (long i = 0; i < N; ++i) s.grid[i] = x0 + i * s.h;
  s.grid.back() = x1;
  s.w.assign(N, 1.0);
  return s;
}

namespace {

struct Coeffs {
  double c0;  // linear growth: 1+gamma (rescaled) or 0
  double E;   // stiff factor e^{gamma tau} or 1
  double c1;  // transport gamma A or 0
};

Coeffs coeffs(Mode mode, double time, const FlowParams& p) {
  if (mode == Mode::cylindrical) return {0.0, 1.0, 0.0};
  return {1.0 + p.gamma, std::exp(p.gamma * time), p.gamma * p.A};
}

// Ghost value as c_near W_near + c_far W_far, near being the boundary node itself.
struct Ghost {
  double c_near, c_far;
};

// dir = -1 on the left (ghost at x0 - h), +1 on the right.
Ghost ghost(const BoundaryCond& bc, double h, int dir) {
  const double e = std::exp(dir * bc.slope * h);
  if (bc.kind == BoundaryCond::Kind::series) return {e * (1.0 + e), -e * e * e};
  return {0.0, e * e};
}

// F_i and its three partials with respect to W_{i-1}, W_i, W_{i+1}.
struct Local {
  double F, dl, dc, dr;
};

// Difference weights exact on e^{sigma x}; sigma -> 0 gives 1/h^2 and 1/(2h).
struct Weights {
  double ih2, i2h;
};

Weights weights(double h, double sigma) {
  if (sigma * h < 1e-6) return {1.0 / (h * h), 0.5 / h};
  const double sh = std::sinh(0.5 * sigma * h);
  return {sigma * sigma / (4.0 * sh * sh), sigma / (2.0 * std::sinh(sigma * h))};
}

std::vector<Weights> node_weights(const FlowState& s) {
  std::vector<Weights> out(s.grid.size());
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double x = s.grid[i];
    double sigma = 0.0;
    if (x <= s.fit_lo)
      sigma = 2.0;
    else if (x < s.fit_hi)
      sigma = 1.0 + std::cos(M_PI * (x - s.fit_lo) / (s.fit_hi - s.fit_lo));
    out[i] = weights(s.h, sigma);
  }
  return out;
}

inline Local local(double wl, double wc, double wr, const Weights& wt, const Coeffs& c, const FlowParams& p) {
  const double n1 = p.n - 1.0, th = p.theta_c();
  const double ih2 = wt.ih2, i2h = wt.i2h;
  const double D2 = (wr - 2.0 * wc + wl) * ih2;
  const double D1 = (wr - wl) * i2h;
  const double q = D1 / wc;
  const double Q = D2 / wc + th * q * q;
  Local o;
  o.F = c.c0 * wc + c.E * (n1 * Q - p.K() + c.c1 * D1);
  const double dQc = -2.0 * ih2 / wc - D2 / (wc * wc) - 2.0 * th * q * q / wc;
  const double dQr = ih2 / wc + 2.0 * th * q * i2h / wc;
  const double dQl = ih2 / wc - 2.0 * th * q * i2h / wc;
  o.dc = c.c0 + c.E * n1 * dQc;
  o.dr = c.E * (n1 * dQr + c.c1 * i2h);
  o.dl = c.E * (n1 * dQl - c.c1 * i2h);
  return o;
}

}  // namespace

std::vector<double> stationary_bracket(const FlowState& s, const FlowParams& p) {
  const std::size_t N = s.w.size();
  std::vector<double> out(N, 0.0);
  const Coeffs c{0.0, 1.0, p.gamma * p.A};
  const auto wt = node_weights(s);
  for (std::size_t i = 1; i + 1 < N; ++i) out[i] = local(s.w[i - 1], s.w[i], s.w[i + 1], wt[i], c, p).F;
  return out;
}

StepOutcome step(FlowState& s, double dt, const FlowParams& p, Exec exec) {
  const long N = static_cast<long>(s.w.size());
  const double t1 = s.time + dt;
  const Coeffs c = coeffs(s.mode, t1, p);
  const bool par = exec == Exec::parallel;
  const bool dl = s.left.kind == BoundaryCond::Kind::dirichlet;
  const bool dr = s.right.kind == BoundaryCond::Kind::dirichlet;
  std::vector<double> W = s.w;
  if (dl) W[0] = s.left.value(t1);
  if (dr) W[N - 1] = s.right.value(t1);
  std::vector<double> a(N), b(N), cc(N), g(N);
  StepOutcome out;
  const auto wt = node_weights(s);
  const Ghost gl = ghost(s.left, s.h, -1);
  const Ghost gr = ghost(s.right, s.h, 1);
  for (int it = 1; it <= 40; ++it) {
#pragma omp parallel for schedule(static) if (par)
    for (long i = 0; i < N; ++i) {
      if ((i == 0 && dl) || (i == N - 1 && dr)) {
        a[i] = cc[i] = 0.0;
        b[i] = 1.0;
        g[i] = 0.0;
        continue;
      }
      const double wl = i == 0 ? gl.c_near * W[0] + gl.c_far * W[1] : W[i - 1];
      const double wr = i == N - 1 ? gr.c_near * W[N - 1] + gr.c_far * W[N - 2] : W[i + 1];
      const Local L = local(wl, W[i], wr, wt[i], c, p);
      g[i] = -(W[i] - s.w[i] - dt * L.F);
      a[i] = -dt * L.dl;
      b[i] = 1.0 - dt * L.dc;
      cc[i] = -dt * L.dr;
      if (i == 0) {
        b[i] += a[i] * gl.c_near;
        cc[i] += a[i] * gl.c_far;
        a[i] = 0.0;
      }
      if (i == N - 1) {
        b[i] += cc[i] * gr.c_near;
        a[i] += cc[i] * gr.c_far;
        cc[i] = 0.0;
      }
    }
    if (!solve_tridiagonal(a, b, cc, g)) {
      out.reason = "singular or non-finite Newton system";
      return out;
    }
    double lam = 1.0;
    std::vector<double> Wn(N);
    for (int k = 0; k < 30; ++k) {
      bool pos = true;
      for (long i = 0; i < N; ++i) {
        Wn[i] = W[i] + lam * g[i];
        if (!(Wn[i] > 0.0)) pos = false;
      }
      if (pos) break;
      lam *= 0.5;
    }
    double upd = 0.0;
    std::size_t worst = 0;
    for (long i = 0; i < N; ++i) {
      const double r = std::abs(Wn[i] - W[i]) / std::abs(Wn[i]);
      if (!(r <= upd)) {
        upd = r;
        worst = i;
      }
    }
    W.swap(Wn);
    out.iters = it;
    out.update = upd;
    out.worst_node = worst;
    if (!std::isfinite(upd)) {
      out.reason = "non-finite Newton update";
      return out;
    }
    if (upd <= 1e-10 && lam == 1.0) {
      for (double v : W)
        if (!(v > 0.0)) {
          out.reason = "positivity lost";
          return out;
        }
      s.w.swap(W);
      s.time = t1;
      out.ok = true;
      return out;
    }
  }
  out.reason = "Newton did not converge";
  return out;
}

RunResult run(FlowState s, const FlowParams& p, const RunControl& c) {
  if (!(c.t_end > s.time)) throw std::invalid_argument("run: t_end must exceed the start time");
  RunResult r;
  r.mode = s.mode;
  r.grid = s.grid;
  r.snaps.push_back({s.time, s.w});
  const double t0 = s.time;
  long next = 1;
  double dt = c.dt0;
  int streak = 0;
  s.stats.dt_min_used = std::numeric_limits<double>::infinity();
  while (s.time < c.t_end - 1e-12) {
    double lim = c.dt_max;
    if (s.mode == Mode::rescaled && c.cfl > 0.0) {
      const auto br = stationary_bracket(s, p);
      const double e = std::exp(-p.gamma * s.time);
      for (std::size_t i = 1; i + 1 < br.size(); ++i)
        if (br[i] != 0.0) lim = std::min(lim, c.cfl * e * s.w[i] / std::abs(br[i]));
    }
    double d = std::clamp(std::min(dt, lim), c.dt_min, c.dt_max);
    const double t_snap = std::min(t0 + next * c.cadence, c.t_end);
    bool hit = false;
    if (s.time + d >= t_snap - 1e-12) {
      d = t_snap - s.time;
      hit = true;
    }
    const auto o = step(s, d, p, c.exec);
    if (!o.ok) {
      ++s.stats.rejected;
      streak = 0;
      if (d <= c.dt_min * (1.0 + 1e-12)) {
        r.abort_reason = "dt underflow at time " + std::to_string(s.time) + ": " + o.reason + " (worst node " +
                         std::to_string(o.worst_node) + ")";
        r.stats = s.stats;
        return r;
      }
      dt = std::max(0.5 * d, c.dt_min);
      continue;
    }
    ++s.stats.accepted;
    s.stats.newton_iters = o.iters;
    s.stats.max_newton = std::max(s.stats.max_newton, o.iters);
    s.stats.dt = d;
    s.stats.dt_min_used = std::min(s.stats.dt_min_used, d);
    s.stats.dt_max_used = std::max(s.stats.dt_max_used, d);
    if (!hit) dt = d;
    if (++streak >= c.grow_after) {
      dt = std::min(2.0 * dt, c.dt_max);
      streak = 0;
    }
    if (c.on_step) {
      std::string why;
      if (!c.on_step(s, why)) {
        r.abort_reason = why;
        r.stats = s.stats;
        r.snaps.push_back({s.time, s.w});
        return r;
      }
    }
    if (hit) {
      r.snaps.push_back({s.time, s.w});
      ++next;
    }
  }
  r.stats = s.stats;
  r.ok = true;
  return r;
}

BoundaryCond outer_tail_bc(const FlowParams& p, double xi_r, double c_t) {
  BoundaryCond bc;
  bc.kind = BoundaryCond::Kind::dirichlet;
  bc.value = [p, xi_r, c_t](double tau) {
    const double x = xi_r * std::exp(-p.gamma * tau) / p.A;
    const double lg = std::log1p(x) / p.gamma;
    return std::exp(p.gamma * tau) * p.K() * -std::expm1(-lg) + p.K() * c_t * std::exp(-(1.0 + p.gamma) * lg);
  };
  return bc;
}

BoundaryCond cylinder_tail_bc(const FlowParams& p, double s_r, double c_t) {
  BoundaryCond bc;
  bc.kind = BoundaryCond::Kind::dirichlet;
  bc.value = [p, s_r, c_t](double t) {
    const double z = std::pow(s_r / p.A, -1.0 / p.gamma);
    return p.K() * ((p.T - t) - z + c_t * z * std::pow(s_r / p.A, -1.0));
  };
  return bc;
}

FlowState init_from_barrier_mid(const CompositeBarrier& b, double tau_start, double xi_min, double xi_max,
                                double h) {
  FlowState s = make_state(Mode::rescaled, xi_min, xi_max, h, tau_start);
  const auto wp = composite_on(b, s.grid, tau_start, Side::plus);
  const auto wm = composite_on(b, s.grid, tau_start, Side::minus);
  for (std::size_t i = 0; i < s.w.size(); ++i) s.w[i] = std::sqrt(wp[i] * wm[i]);
  s.left.kind = BoundaryCond::Kind::series;
  s.left.slope = 2.0;
  s.fit_lo = -4.0;
  s.fit_hi = 0.0;
  s.right = outer_tail_bc(b.params, xi_max);
  return s;
}

double ConditionII::s_tip() const { return params.A * std::exp(params.gamma * tau_start); }

namespace {

double softplus(double x, double w) { return x > 0.0 ? x + w * std::log1p(std::exp(-x / w)) : w * std::log1p(std::exp(x / w)); }

double logistic(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

double ConditionII::wbar(double xi) const {
  const FlowParams& p = params;
  const double x = xi_c + softplus(xi - xi_c, width);  // sigma - s_tip
  const double lg = std::log1p(x / s_tip()) / p.gamma;
  const double bracket = std::exp(p.gamma * tau_start) * p.K() * -std::expm1(-lg) +
                         p.K() * c_t * std::exp(-(1.0 + p.gamma) * lg);
  return bracket * logistic(2.0 * (xi - xi_s0));
}

double ConditionII::w(double s) const {
  const FlowParams& p = params;
  const double T = std::exp(-tau_start);
  const double sig = s_tip() + xi_c + softplus(s - s_tip() - xi_c, width);
  const double z = std::pow(sig / p.A, -1.0 / p.gamma);
  return p.K() * (T - z + c_t * z * p.A / sig) * logistic(2.0 * (s - s_tip() - xi_s0));
}

void validate_condition_ii(const ConditionII& c, const std::vector<double>& xi) {
  const FlowParams& p = c.params;
  if (!(c.xi_c > 0.0)) throw std::invalid_argument("condition ii: smoothing scale must be positive");
  // i) holds iff c_t A < sigma everywhere, and sigma >= s_tip + xi_c.
  if (!(c.c_t * p.A < c.s_tip() + c.xi_c)) throw std::invalid_argument("condition i violated: tail constant too large");
  const double ceil = p.K() * std::exp(p.gamma * c.tau_start);  // (n-1)(n-2) T e^{(1+gamma) tau}
  for (double x : xi) {
    const double v = c.wbar(x);
    if (!(v > 0.0)) throw std::invalid_argument("condition ii data: non-positive value");
    if (!(v < ceil)) throw std::invalid_argument("condition i violated at xi = " + std::to_string(x));
  }
}

FlowState init_condition_ii(const ConditionII& c, double xi_min, double xi_max, double h) {
  FlowState s = make_state(Mode::rescaled, xi_min, xi_max, h, c.tau_start);
  validate_condition_ii(c, s.grid);
  for (std::size_t i = 0; i < s.w.size(); ++i) s.w[i] = c.wbar(s.grid[i]);
  s.left.kind = BoundaryCond::Kind::series;
  s.left.slope = 2.0;
  s.fit_lo = -4.0;
  s.fit_hi = 0.0;
  s.right = outer_tail_bc(c.params, xi_max, c.c_t);
  return s;
}

double sandwich_check(const std::vector<double>& xi, const std::vector<double>& w, double tau,
                      const CompositeBarrier& b) {
  const auto wp = composite_on(b, xi, tau, Side::plus);
  const auto wm = composite_on(b, xi, tau, Side::minus);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xi.size(); ++i)
    worst = std::max({worst, (w[i] - wp[i]) / wp[i], (wm[i] - w[i]) / wm[i]});
  return worst;
}

bool boundary_in_corridor(const CompositeBarrier& b, double xi, double tau, double value) {
  const double E = std::exp(b.params.gamma * tau);
  const double d = xi / E;
  const double hi = E * what_pm_off(*b.outer_plus, d, tau).w;
  const double lo = E * what_pm_off(*b.outer_minus, d, tau).w;
  return lo <= value && value <= hi;
}

}  // namespace yf
