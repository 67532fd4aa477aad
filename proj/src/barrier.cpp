#include "yamabe/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace yf {

namespace {

double lam(Side side, double eps) { return side == Side::plus ? 1.0 + eps : 1.0 - eps; }

Side other(Side s) { return s == Side::plus ? Side::minus : Side::plus; }

// Side actually evaluated, after an optional exchange.
Side resolve(const CompositeBarrier& b, Side side) { return b.swapped ? other(side) : side; }

const OuterAnsatz& outer_of(const CompositeBarrier& b, Side s) {
  return s == Side::plus ? *b.outer_plus : *b.outer_minus;
}

}  // namespace

double inner_pm(const SolitonProfile& s, double xi, Side side, double C, double eps) {
  return s.eval(xi + C) / lam(side, eps);
}

GlueValue solve_glue(const SolitonProfile& s, const OuterAnsatz& o, double tau, Side side, double eps,
                     double xi1) {
  const double g = o.params.gamma;
  const double E = std::exp(g * tau);
  const auto r = what_pm_off(o, xi1 / E, tau);
  const double l = lam(side, eps);
  const double G = l * E * r.w;
  if (!(G > 0.0)) throw std::domain_error("solve_glue: non-positive right-hand side (tau below validity)");
  GlueValue out;
  const double x = s.invert(G);
  out.C = x - xi1;
  const double dG = l * (g * E * r.w + E * r.w_tau - g * xi1 * r.w_eta);
  out.Cprime = dG / s.eval_d1(x);
  out.residual = s.eval(x) - G;
  return out;
}

CompositeBarrier assemble_barrier(const FlowParams& p, std::shared_ptr<const OuterAnsatz> outer_plus,
                                  std::shared_ptr<const OuterAnsatz> outer_minus,
                                  std::shared_ptr<const SolitonProfile> soliton, double tau1, double tau_end,
                                  int tau_nodes) {
  if (!(tau_end > tau1)) throw std::invalid_argument("assemble_barrier: need tau_end > tau1");
  CompositeBarrier b;
  b.params = p;
  b.outer_plus = std::move(outer_plus);
  b.outer_minus = std::move(outer_minus);
  b.soliton = std::move(soliton);
  b.tau1 = tau1;
  b.tau_grid = clustered_grid(tau1, tau_end, tau_nodes);
  for (double t : b.tau_grid) {
    b.C1.push_back(solve_glue(*b.soliton, *b.outer_plus, t, Side::plus, p.eps, p.xi1).C);
    b.C2.push_back(solve_glue(*b.soliton, *b.outer_minus, t, Side::minus, p.eps, p.xi1).C);
  }
  for (std::size_t i = 1; i < b.tau_grid.size(); ++i) {
    const double dt = b.tau_grid[i] - b.tau_grid[i - 1];
    b.C_slope_max = std::max({b.C_slope_max, std::abs(b.C1[i] - b.C1[i - 1]) / dt,
                              std::abs(b.C2[i] - b.C2[i - 1]) / dt});
  }
  return b;
}

namespace {

CompositeEval eval_with(const CompositeBarrier& b, double xi, double tau, Side s, const GlueValue& gl) {
  const FlowParams& p = b.params;
  const double x = xi - p.gamma * p.A * b.shift;
  CompositeEval e;
  e.glue = gl;
  if (x <= p.xi1) {
    const double l = lam(s, p.eps);
    const auto& sol = *b.soliton;
    e.inner = true;
    e.w = sol.eval(x + gl.C) / l;
    e.w_xi = sol.eval_d1(x + gl.C) / l;
    e.w_xixi = sol.eval_d2(x + gl.C) / l;
    e.w_tau = gl.Cprime * e.w_xi;
  } else {
    const double E = std::exp(p.gamma * tau);
    const auto r = what_pm_off(outer_of(b, s), x / E, tau);
    e.w = E * r.w;
    e.w_xi = r.w_eta;
    e.w_xixi = r.w_eta2 / E;
    e.w_tau = p.gamma * E * r.w + E * r.w_tau - p.gamma * x * r.w_eta;
  }
  return e;
}

GlueValue glue_for(const CompositeBarrier& b, double tau, Side s) {
  return solve_glue(*b.soliton, outer_of(b, s), tau, s, b.params.eps, b.params.xi1);
}

}  // namespace

CompositeEval composite_eval(const CompositeBarrier& b, double xi, double tau, Side side) {
  const Side s = resolve(b, side);
  return eval_with(b, xi, tau, s, glue_for(b, tau, s));
}

double composite(const CompositeBarrier& b, double xi, double tau, Side side) {
  return composite_eval(b, xi, tau, side).w;
}

std::vector<double> composite_on(const CompositeBarrier& b, const std::vector<double>& xi, double tau,
                                 Side side) {
  const Side s = resolve(b, side);
  const auto gl = glue_for(b, tau, s);
  std::vector<double> out(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) out[i] = eval_with(b, xi[i], tau, s, gl).w;
  return out;
}

std::pair<double, double> composite_jump(const CompositeBarrier& b, double tau, Side side) {
  const Side s = resolve(b, side);
  const FlowParams& p = b.params;
  const auto gl = glue_for(b, tau, s);
  const double left = b.soliton->eval_d1(p.xi1 + gl.C) / lam(s, p.eps);
  const double right = what_pm_off(outer_of(b, s), p.xi1 * std::exp(-p.gamma * tau), tau).w_eta;
  return {left, right};
}

CompositeBarrier shifted(const CompositeBarrier& b, double shift) {
  CompositeBarrier c = b;
  c.shift += shift;
  return c;
}

CertGrids default_cert_grids(const CompositeBarrier& b, double span) {
  const double xi1 = b.params.xi1;
  CertGrids g;
  g.xi = uniform_grid(-10.0, 4.0 * xi1, 281);
  g.xi.push_back(xi1);
  std::sort(g.xi.begin(), g.xi.end());
  g.tau = clustered_grid(b.tau1, b.tau1 + span, 33);
  g.xi_inner = uniform_grid(-10.0, xi1, 161);
  return g;
}

namespace {

// B scan on eta in [A + x0 e^{-gamma tau}, eta_hi A]; x is a log-fraction in [0, 1] mapped back to eta in the report.
ScanReport outer_scan(const OuterAnsatz& o, double x0, const std::vector<double>& taus, int eta_nodes,
                      double eta_hi, int sign, const std::string& region, Exec exec, bool stop_early) {
  const FlowParams& p = o.params;
  auto dmap = [&](double u, double tau) {
    const double lo = x0 * std::exp(-p.gamma * tau), hi = (eta_hi - 1.0) * p.A;
    return lo * std::pow(hi / lo, u);
  };
  auto f = [&](double u, double tau) { return B_residual_off(o, dmap(u, tau), tau); };
  auto rep = sign_scan("B", region, uniform_grid(0.0, 1.0, eta_nodes), taus, f, sign, exec, stop_early);
  for (auto& v : rep.violations) v.x = p.A + dmap(v.x, v.time);
  return rep;
}

std::string fmt(const char* f, double a, double b, double c, double d) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

}  // namespace

std::vector<ScanReport> outer_scans(const OuterAnsatz& plus, const OuterAnsatz& minus, double xi0, double tau0,
                                    double span, int eta_nodes, int tau_nodes, double eta_hi, Exec exec,
                                    bool stop_early) {
  const auto taus = clustered_grid(tau0, tau0 + span, tau_nodes);
  const std::string region =
      fmt("eta in [A + %g e^{-gamma tau}, %g A], tau in [%g, %g]", xi0, eta_hi, tau0, tau0 + span);
  std::vector<ScanReport> out;
  out.push_back(outer_scan(plus, xi0, taus, eta_nodes, eta_hi, +1, "w+ " + region, exec, stop_early));
  if (stop_early && !out.back().ok()) return out;
  out.push_back(outer_scan(minus, xi0, taus, eta_nodes, eta_hi, -1, "w- " + region, exec, stop_early));
  return out;
}

CertReport check_certificate(const CompositeBarrier& b, const CertGrids& g, Exec exec, bool stop_early) {
  const FlowParams& p = b.params;
  CertReport r;
  const std::size_t NT = g.tau.size();
  const Side sp = resolve(b, Side::plus), sm = resolve(b, Side::minus);
  std::vector<GlueValue> gp(NT), gm(NT);
  for (std::size_t k = 0; k < NT; ++k) {
    gp[k] = glue_for(b, g.tau[k], sp);
    gm[k] = glue_for(b, g.tau[k], sm);
  }

  // (iv) one-sided derivatives at xi1
  r.jump_plus_min = r.jump_minus_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < NT; ++k) {
    const double d = p.xi1 * std::exp(-p.gamma * g.tau[k]);
    const double lp = b.soliton->eval_d1(p.xi1 + gp[k].C) / lam(sp, p.eps);
    const double rp = what_pm_off(outer_of(b, sp), d, g.tau[k]).w_eta;
    const double lm = b.soliton->eval_d1(p.xi1 + gm[k].C) / lam(sm, p.eps);
    const double rm = what_pm_off(outer_of(b, sm), d, g.tau[k]).w_eta;
    r.jump_plus_min = std::min(r.jump_plus_min, lp - rp);
    r.jump_minus_min = std::min(r.jump_minus_min, rm - lm);
  }
  r.jumps_ok = r.jump_plus_min > 0.0 && r.jump_minus_min > 0.0;
  if (stop_early && !r.jumps_ok) return r;

  // (ii) continuity at xi1
  r.C_gap_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < NT; ++k) {
    for (auto [s, gl] : {std::pair{sp, gp[k]}, std::pair{sm, gm[k]}}) {
      const double in = b.soliton->eval(p.xi1 + gl.C) / lam(s, p.eps);
      const double out =
          std::exp(p.gamma * g.tau[k]) * what_pm_off(outer_of(b, s), p.xi1 * std::exp(-p.gamma * g.tau[k]), g.tau[k]).w;
      r.continuity_max = std::max(r.continuity_max, std::abs(in - out) / std::abs(out));
    }
    r.C_gap_min = std::min(r.C_gap_min, gp[k].C - gm[k].C);
  }
  r.continuity_ok = r.continuity_max <= 1e-10;
  if (stop_early && !r.continuity_ok) return r;

  // (i) ordering and positivity
  r.order_margin = r.positivity_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < NT; ++k) {
    for (double xi : g.xi) {
      const double wp = eval_with(b, xi, g.tau[k], sp, gp[k]).w;
      const double wm = eval_with(b, xi, g.tau[k], sm, gm[k]).w;
      r.order_margin = std::min(r.order_margin, (wp - wm) / wp);
      r.positivity_min = std::min(r.positivity_min, wm);
    }
  }
  r.ordering_ok = r.order_margin > 0.0 && r.positivity_min > 0.0;
  if (stop_early && !r.ordering_ok) return r;

  // (iii) I on the inner pieces, B on the outer pieces
  auto idx = [&](double tau) {
    return static_cast<std::size_t>(std::lower_bound(g.tau.begin(), g.tau.end(), tau) - g.tau.begin());
  };
  const std::string ireg = fmt("xi in [%g, %g], tau in [%g, %g]", g.xi_inner.front(), g.xi_inner.back(),
                               g.tau.front(), g.tau.back());
  r.scans_ok = true;
  for (auto [s, sign, gv, name] : {std::tuple{sp, 1, &gp, "w+ "}, std::tuple{sm, -1, &gm, "w- "}}) {
    auto f = [&, s = s, gv = gv](double xi, double tau) {
      const auto& gl = (*gv)[idx(tau)];
      const auto e = eval_with(b, std::min(xi, p.xi1 + p.gamma * p.A * b.shift), tau, s, gl);
      const double res = soliton_ode_residual(*b.soliton, xi - p.gamma * p.A * b.shift + gl.C);
      return I_operator({e.w, e.w_xi, e.w_xixi, e.w_tau}, tau, p, 2.0 * std::abs(res));
    };
    r.scans.push_back(sign_scan("I", name + ireg, g.xi_inner, g.tau, f, sign, exec, stop_early));
    r.scans_ok = r.scans_ok && r.scans.back().ok();
    if (stop_early && !r.scans_ok) return r;
  }
  const std::string breg = fmt("eta in [A + %g e^{-gamma tau}, %g A], tau in [%g, %g]", p.xi1, g.eta_hi,
                               g.tau.front(), g.tau.back());
  r.scans.push_back(outer_scan(outer_of(b, sp), p.xi1, g.tau, g.eta_nodes, g.eta_hi, +1, "w+ " + breg, exec,
                               stop_early));
  r.scans_ok = r.scans_ok && r.scans.back().ok();
  if (stop_early && !r.scans_ok) return r;
  r.scans.push_back(outer_scan(outer_of(b, sm), p.xi1, g.tau, g.eta_nodes, g.eta_hi, -1, "w- " + breg, exec,
                               stop_early));
  r.scans_ok = r.scans_ok && r.scans.back().ok();
  return r;
}

CertReport check_certificate_swapped(const CompositeBarrier& b, const CertGrids& g) {
  CompositeBarrier c = b;
  c.swapped = !c.swapped;
  return check_certificate(c, g);
}

namespace {

// Largest tau keeping xi e^{-gamma tau} inside the outer tables.
double tau_cap(const OuterAnsatz& o, double xi) {
  const double dmin = o.w1tab->d_min();
  return std::log(xi / dmin) / o.params.gamma - 1.0;
}

int stage(const CertReport& r) {
  if (!r.jumps_ok) return 0;
  if (!r.continuity_ok) return 1;
  if (!r.ordering_ok) return 2;
  if (!r.scans_ok) return 3;
  return 4;
}

const char* stage_name(int s) {
  static const char* names[] = {"(iv) jumps", "(ii) continuity", "(i) ordering", "(iii) sign scans", "none"};
  return names[s];
}

}  // namespace

TuneResult auto_tune(const FlowParams& p, std::shared_ptr<const OuterAnsatz> outer_plus,
                     std::shared_ptr<const OuterAnsatz> outer_minus,
                     std::shared_ptr<const SolitonProfile> soliton, const TuneOptions& opt) {
  TuneResult res;
  bool have0 = false;
  for (double xi0 : opt.xi0_list) {
    const double cap = std::min(opt.tau0_max, tau_cap(*outer_plus, xi0) - opt.span);
    for (double tau0 = 0.0; tau0 <= cap + 1e-12; tau0 += opt.tau0_step) {
      bool ok = true;
      try {
        for (const auto& s : outer_scans(*outer_plus, *outer_minus, xi0, tau0, opt.span, 120, 33, 1e3,
                                         Exec::parallel, true))
          ok = ok && s.ok();
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok) {
        res.xi0 = xi0;
        res.tau0 = tau0;
        have0 = true;
        break;
      }
    }
    if (have0) break;
  }
  if (!have0) return res;
  res.outer = outer_scans(*outer_plus, *outer_minus, res.xi0, res.tau0, opt.span);

  int best_stage = -1;
  double best[3] = {0, 0, 0};  // xi1, eps, tau1 of the attempt that got furthest
  for (int f : opt.xi1_factors) {
    const double xi1 = f * res.xi0;
    const double cap = std::min(res.tau0 + opt.tau1_span, tau_cap(*outer_plus, xi1) - opt.span);
    for (double eps : opt.eps_list) {
      FlowParams q = p;
      q.xi0 = res.xi0;
      q.xi1 = xi1;
      q.eps = eps;
      q.tau0 = res.tau0;
      TuneAttempt at{res.xi0, xi1, eps, res.tau0, 0.0, false, ""};
      int at_stage = -1;
      for (double tau1 = res.tau0; tau1 <= cap + 1e-12; tau1 += opt.tau1_step) {
        int st = 0;
        try {
          const auto b = assemble_barrier(q, outer_plus, outer_minus, soliton, tau1, tau1 + opt.span, 8);
          const auto rep = check_certificate(b, default_cert_grids(b, opt.span), Exec::parallel, true);
          st = stage(rep);
        } catch (const std::exception&) {
          st = 0;
        }
        if (st > at_stage) {
          at_stage = st;
          at.tau1 = tau1;
        }
        if (st > best_stage) {
          best_stage = st;
          best[0] = xi1;
          best[1] = eps;
          best[2] = tau1;
        }
        if (st == 4) break;
      }
      at.ok = at_stage == 4;
      at.failed = stage_name(std::max(at_stage, 0));
      res.attempts.push_back(at);
      if (at.ok) {
        res.found = true;
        res.xi1 = xi1;
        res.eps = eps;
        res.tau1 = at.tau1;
        break;
      }
    }
    if (res.found) break;
  }
  if (!res.found) {
    res.xi1 = best[0];
    res.eps = best[1];
    res.tau1 = best[2];
  }
  FlowParams q = p;
  q.xi0 = res.xi0;
  q.xi1 = res.xi1;
  q.eps = res.eps;
  q.tau0 = res.tau0;
  res.barrier = assemble_barrier(q, outer_plus, outer_minus, soliton, res.tau1, res.tau1 + opt.span);
  res.cert = check_certificate(res.barrier, default_cert_grids(res.barrier, opt.span));
  return res;
}

}  // namespace yf
