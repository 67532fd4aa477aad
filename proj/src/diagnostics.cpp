#include "yamabe/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "yamabe/io.hpp"

namespace yf {

BlowupRow curvature_row(const std::vector<double>& xi, const std::vector<double>& w, double tau,
                        const FlowParams& p, Exec exec) {
  if (xi.size() < 5) throw std::invalid_argument("curvature_row: snapshot grid too coarse for the curvature stencil");
  Profile prof{Coord::inner_xi, TimeKind::tau, tau, xi, w};
  const auto cf = rescaled_curvature(prof, p, exec);
  const auto it = std::max_element(cf.R.begin(), cf.R.end());
  BlowupRow r;
  r.tau = tau;
  r.t = p.T - std::exp(-tau);
  r.supR = *it;
  r.R0 = cf.R.front();
  r.argmax_xi = xi[it - cf.R.begin()];
  r.lnR = (1.0 + p.gamma) * tau + std::log(r.supR);
  return r;
}

BlowupSeries curvature_series(const RunResult& run, const FlowParams& p, Exec exec) {
  if (run.mode != Mode::rescaled) throw std::invalid_argument("curvature_series: needs a rescaled run");
  BlowupSeries s;
  s.n = p.n;
  const long N = static_cast<long>(run.snaps.size());
  s.rows.resize(N);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long k = 0; k < N; ++k)
    s.rows[k] = curvature_row(run.grid, run.snaps[k].w, run.snaps[k].time, p, Exec::serial);
  return s;
}

FitWindow default_window(const BlowupSeries& s) {
  if (s.rows.empty()) throw std::invalid_argument("default_window: empty series");
  const double hi = s.rows.back().tau;
  const double lo0 = hi - 1.5 * std::log(10.0);
  std::vector<double> taus;
  for (const auto& r : s.rows)
    if (r.tau >= lo0 && r.tau <= hi) taus.push_back(r.tau);
  const std::size_t drop = static_cast<std::size_t>(std::ceil(0.2 * taus.size()));
  return {taus[std::min(drop, taus.size() - 1)], hi};
}

BlowupFit fit_blowup(const BlowupSeries& s, const FitWindow& w) {
  std::vector<double> x, y;
  for (const auto& r : s.rows)
    if (r.tau >= w.tau_lo && r.tau <= w.tau_hi) {
      x.push_back(r.tau);
      y.push_back(r.lnR);
    }
  const std::size_t n = x.size();
  if (n < 8) throw std::invalid_argument("fit_blowup: fewer than 8 rows in the window");
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  BlowupFit f;
  f.p = sxy / sxx;
  const double lnc = ym - f.p * xm;
  f.c = std::exp(lnc);
  f.c_rm = f.c / std::sqrt(s.n * (s.n - 1.0));
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - lnc - f.p * x[i];
    ssr += e * e;
  }
  const double s2 = ssr / (n - 2.0);
  f.p_se = std::sqrt(s2 / sxx);
  f.lnc_se = std::sqrt(s2 * (1.0 / n + xm * xm / sxx));
  f.residual = std::sqrt(ssr / n);
  f.window = w;
  f.rows = n;
  for (std::size_t i = 1; i < n; ++i)
    if (y[i] < y[i - 1]) f.monotone = false;
  return f;
}

BlowupFit fit_blowup(const BlowupSeries& s) { return fit_blowup(s, default_window(s)); }

BlowupSeries synthetic_series(double p, double c, double tau_lo, double tau_hi, int rows, double gamma, double T) {
  if (rows < 2) throw std::invalid_argument("synthetic_series: need at least 2 rows");
  BlowupSeries s;
  for (int i = 0; i < rows; ++i) {
    BlowupRow r;
    r.tau = tau_lo + (tau_hi - tau_lo) * i / (rows - 1.0);
    r.t = T - std::exp(-r.tau);
    r.lnR = std::log(c) + p * r.tau;
    r.supR = r.R0 = std::exp(r.lnR - (1.0 + gamma) * r.tau);
    s.rows.push_back(r);
  }
  return s;
}

SolitonDistance soliton_distance(const std::vector<double>& xi, const std::vector<double>& w,
                                 const SolitonProfile& sol, double lo, double hi) {
  if (xi.empty() || xi.front() > lo || xi.back() < hi)
    throw std::invalid_argument("soliton_distance: window exceeds snapshot");
  std::vector<double> x, v;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (xi[i] >= lo && xi[i] <= hi) {
      x.push_back(xi[i]);
      v.push_back(w[i]);
    }
  auto obj = [&](double c) {
    double e = 0;
    for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(v[i] - sol.eval(x[i] + c)));
    return e;
  };
  const double step = 0.05;
  const int M = 200;
  std::vector<double> f(M + 1);
  for (int k = 0; k <= M; ++k) f[k] = obj(-5.0 + k * step);
  const int k = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
  SolitonDistance out;
  int minima = 0;
  for (int j = 0; j <= M; ++j) {
    const bool left = j == 0 || f[j] < f[j - 1];
    const bool right = j == M || f[j] <= f[j + 1];
    if (left && right) ++minima;
  }
  out.unimodal = minima == 1;
  double a = -5.0 + std::max(k - 1, 0) * step, b = -5.0 + std::min(k + 1, M) * step;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = b - r * (b - a), c2 = a + r * (b - a);
  double f1 = obj(c1), f2 = obj(c2);
  while (b - a > 1e-13) {
    if (f1 <= f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - r * (b - a);
      f1 = obj(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + r * (b - a);
      f2 = obj(c2);
    }
  }
  out.shift = f1 <= f2 ? c1 : c2;
  out.error = std::min(f1, f2);
  if (f[k] < out.error) {
    out.shift = -5.0 + k * step;
    out.error = f[k];
  }
  return out;
}

bool non_increasing(const std::vector<double>& v, std::size_t skip, double jitter) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = skip; i < v.size(); ++i) {
    if (v[i] > best * (1.0 + jitter)) return false;
    best = std::min(best, v[i]);
  }
  return true;
}

Shifts fit_shifts(const std::vector<double>& xi, const std::vector<double>& data, double tau,
                  const CompositeBarrier& b, double search, double step) {
  if (xi.size() != data.size() || xi.empty()) throw std::invalid_argument("fit_shifts: bad data");
  auto lower_ok = [&](double a) {
    const auto v = composite_on(shifted(b, a), xi, tau, Side::minus);
    for (std::size_t i = 0; i < xi.size(); ++i)
      if (!(v[i] <= data[i])) return false;
    return true;
  };
  auto upper_ok = [&](double c) {
    const auto v = composite_on(shifted(b, c), xi, tau, Side::plus);
    for (std::size_t i = 0; i < xi.size(); ++i)
      if (!(data[i] <= v[i])) return false;
    return true;
  };
  // Both predicates are monotone in the shift: raising it lowers the shifted profile.
  auto edge = [&](auto ok, bool from_below) {
    const int M = static_cast<int>(std::lround(2.0 * search / step));
    for (int k = 0; k <= M; ++k) {
      const double s = from_below ? -search + k * step : search - k * step;
      if (!ok(s)) continue;
      if (k == 0) return s;
      double bad = from_below ? s - step : s + step, good = s;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (bad + good);
        (ok(mid) ? good : bad) = mid;
      }
      return good;
    }
    throw std::runtime_error("fit_shifts: no admissible shift; data outside the admissible class");
  };
  Shifts s;
  s.xi_a = edge(lower_ok, true);
  s.xi_b = edge(upper_ok, false);
  return s;
}

Shifts Shifts::ordered(double gap) const {
  if (tight_ordered()) return *this;
  return {xi_b + gap, xi_b};
}

double shifted_sandwich_check(const std::vector<double>& xi, const std::vector<double>& w, double tau,
                              const CompositeBarrier& b, const Shifts& s) {
  const auto lo = composite_on(shifted(b, s.xi_a), xi, tau, Side::minus);
  const auto hi = composite_on(shifted(b, s.xi_b), xi, tau, Side::plus);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xi.size(); ++i) worst = std::max({worst, (w[i] - hi[i]) / hi[i], (lo[i] - w[i]) / lo[i]});
  return worst;
}

nlohmann::json params_json(const FlowParams& p) {
  return {{"n", p.n},           {"gamma", p.gamma}, {"A", p.A},         {"T", p.T},
          {"theta_plus", p.theta_plus}, {"theta_minus", p.theta_minus}, {"eps", p.eps},
          {"xi0", p.xi0},       {"xi1", p.xi1},     {"tau0", p.tau0}};
}

nlohmann::json scan_json(const ScanReport& s, std::size_t max_violations) {
  nlohmann::json v = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(max_violations, s.violations.size()); ++i) {
    const auto& x = s.violations[i];
    v.push_back({{"x", x.x}, {"tau", x.time}, {"value", x.value}, {"band", x.band}});
  }
  return {{"operator", s.op},
          {"region", s.region},
          {"expected_sign", s.expected_sign},
          {"samples", s.samples},
          {"passed", s.passed},
          {"within_band", s.within_band},
          {"violations", s.violations.size()},
          {"worst_margin", s.worst_margin},
          {"band_fraction", s.band_fraction},
          {"first_violations", v}};
}

namespace {

nlohmann::json cert_json(const CertReport& r) {
  nlohmann::json scans = nlohmann::json::array();
  for (const auto& s : r.scans) scans.push_back(scan_json(s));
  return {{"ok", r.ok()},
          {"ordering_ok", r.ordering_ok},
          {"continuity_ok", r.continuity_ok},
          {"scans_ok", r.scans_ok},
          {"jumps_ok", r.jumps_ok},
          {"order_margin", r.order_margin},
          {"positivity_min", r.positivity_min},
          {"continuity_max", r.continuity_max},
          {"jump_plus_min", r.jump_plus_min},
          {"jump_minus_min", r.jump_minus_min},
          {"C_gap_min", r.C_gap_min},
          {"scans", scans}};
}

}  // namespace

nlohmann::json report(const ReportInputs& in) {
  nlohmann::json j;
  std::vector<std::string> missing;
  j["schema_version"] = 1;
  if (in.params)
    j["params"] = params_json(*in.params);
  else
    missing.push_back("params");
  if (in.tuning) {
    const auto& t = *in.tuning;
    j["tuning"] = {{"found", t.found}, {"xi0", t.xi0}, {"xi1", t.xi1}, {"eps", t.eps},
                   {"tau0", t.tau0},   {"tau1", t.tau1}, {"attempts", t.attempts.size()},
                   {"cert", cert_json(t.cert)}};
  } else {
    missing.push_back("tuning");
  }
  if (!in.scans.empty()) {
    j["scans"] = nlohmann::json::array();
    for (const auto& s : in.scans) j["scans"].push_back(scan_json(s));
  } else {
    missing.push_back("scans");
  }
  if (in.run) {
    const auto& r = *in.run;
    j["run"] = {{"ok", r.ok},
                {"abort_reason", r.abort_reason},
                {"snapshots", r.snaps.size()},
                {"time_start", r.snaps.empty() ? 0.0 : r.snaps.front().time},
                {"time_end", r.snaps.empty() ? 0.0 : r.snaps.back().time},
                {"accepted", r.stats.accepted},
                {"rejected", r.stats.rejected},
                {"max_newton", r.stats.max_newton},
                {"dt_min_used", r.stats.dt_min_used},
                {"dt_max_used", r.stats.dt_max_used}};
  } else {
    missing.push_back("run");
  }
  if (in.blowup && in.blowup->fit) {
    const auto& f = *in.blowup->fit;
    j["blowup"] = {{"rows", in.blowup->rows.size()},
                   {"p", f.p},
                   {"p_se", f.p_se},
                   {"c_scalar", f.c},
                   {"c_rmnorm", f.c_rm},
                   {"lnc_se", f.lnc_se},
                   {"window", {f.window.tau_lo, f.window.tau_hi}},
                   {"window_rows", f.rows},
                   {"residual", f.residual},
                   {"monotone", f.monotone},
                   {"sup_over", "computational domain only"}};
  } else {
    missing.push_back("blowup");
  }
  if (!in.distances.empty()) {
    j["soliton_distance"] = nlohmann::json::array();
    for (const auto& [tau, d] : in.distances)
      j["soliton_distance"].push_back({{"tau", tau}, {"shift", d.shift}, {"error", d.error}, {"unimodal", d.unimodal}});
  } else {
    missing.push_back("soliton_distance");
  }
  if (in.shifts)
    j["shifts"] = {{"xi_a", in.shifts->xi_a}, {"xi_b", in.shifts->xi_b}, {"tight_ordered", in.shifts->tight_ordered()}};
  else
    missing.push_back("shifts");
  j["manifest"] = nlohmann::json::array();
  for (const auto& f : in.files) {
    try {
      j["manifest"].push_back({{"file", f}, {"sha256", sha256_file(f)}});
    } catch (const std::exception&) {
      missing.push_back("file:" + f);
    }
  }
  j["missing"] = missing;
  return j;
}

}  // namespace yf
