#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "yamabe/flow.hpp"

using namespace yf;

namespace {

const FlowParams& P() {
  static const FlowParams p = make_params(5, 1.0, 1.0, 1.0);
  return p;
}

FlowState sphere_state(int N, BoundaryCond::Kind kind) {
  auto s = make_state(Mode::cylindrical, -10.0, 10.0, 20.0 / (N - 1.0), 0.0);
  for (std::size_t i = 0; i < s.w.size(); ++i) s.w[i] = 1.0 / std::pow(std::cosh(s.grid[i]), 2);
  s.left.kind = s.right.kind = kind;
  s.left.slope = 2.0;
  s.right.slope = -2.0;
  return s;
}

struct Tuned {
  CompositeBarrier b;
  std::shared_ptr<const SolitonProfile> sol;
};

const Tuned& tuned() {
  static const Tuned t = [] {
    ParamOverrides ov;
    ov.eps = 1e-3;
    ov.xi0 = 5;
    ov.xi1 = 10;
    ov.tau0 = 1;
    const auto p = make_params(5, 1.0, 1.0, 1.0, ov);
    auto w1 = std::make_shared<const CorrectionTable>(build_w1(p));
    auto w2 = std::make_shared<const CorrectionTable>(build_w2(p));
    auto op = std::make_shared<const OuterAnsatz>(build_outer(p, p.theta_plus, w1, w2));
    auto om = std::make_shared<const OuterAnsatz>(build_outer(p, p.theta_minus, w1, w2));
    auto sol = std::make_shared<const SolitonProfile>(solve_soliton(p));
    return Tuned{assemble_barrier(p, op, om, sol, 11.0, 19.0), sol};
  }();
  return t;
}

}  // namespace

TEST_CASE("constant data follows the cylinder ODE") {
  auto s = make_state(Mode::cylindrical, -5.0, 5.0, 0.01, 0.0);
  std::fill(s.w.begin(), s.w.end(), 6.0);
  auto one = s;
  REQUIRE(step(one, 1e-3, P()).ok);
  for (double v : one.w) CHECK(std::abs(v - (6.0 - 12.0 * 1e-3)) <= 1e-12);
  double worst = 0, spread = 0;
  for (int k = 0; k < 200; ++k) {
    REQUIRE(step(s, 1e-3, P()).ok);
    const auto [lo, hi] = std::minmax_element(s.w.begin(), s.w.end());
    spread = std::max(spread, (*hi - *lo) / *hi);
    for (double v : s.w) worst = std::max(worst, std::abs(v - (6.0 - 12.0 * s.time)));
  }
  CHECK(s.time == doctest::Approx(0.2));
  CHECK(worst <= 1e-8 * 6.0);
  CHECK(spread <= 1e-10);
}

TEST_CASE("shrinking sphere") {
  for (auto kind : {BoundaryCond::Kind::robin_log, BoundaryCond::Kind::series}) {
    auto s = sphere_state(2000, kind);
    for (int k = 0; k < 10; ++k) REQUIRE(step(s, 1e-3, P()).ok);
    const double rho2 = 1.0 - 20.0 * s.time;
    double worst = 0;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
      const double r = std::exp(s.grid[i]);
      if (r > 3.0) continue;
      const double exact = rho2 / std::pow(std::cosh(s.grid[i]), 2) / (r * r);
      worst = std::max(worst, std::abs(s.w[i] / (r * r) / exact - 1.0));
    }
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("a step past extinction fails and leaves the state alone") {
  auto s = sphere_state(400, BoundaryCond::Kind::robin_log);
  const auto before = s.w;
  const auto o = step(s, 0.06, P());
  CHECK_FALSE(o.ok);
  CHECK_FALSE(o.reason.empty());
  CHECK(s.w == before);
  CHECK(s.time == 0.0);
}

TEST_CASE("serial and parallel steps agree bitwise") {
  auto a = sphere_state(3001, BoundaryCond::Kind::series);
  auto b = a;
  REQUIRE(step(a, 1e-3, P(), Exec::serial).ok);
  REQUIRE(step(b, 1e-3, P(), Exec::parallel).ok);
  CHECK(a.w == b.w);
}

TEST_CASE("tail boundary data") {
  const auto p = make_params(5, 0.7, 1.3, 1.0);
  for (double tau : {1.0, 2.5}) {
    const double xi = 30.0;
    const double s = p.A * std::exp(p.gamma * tau) + xi;
    const double t = p.T - std::exp(-tau);
    const double direct = p.K() * ((p.T - t) - std::pow(s / p.A, -1.0 / p.gamma)) * std::exp((1 + p.gamma) * tau);
    CHECK(outer_tail_bc(p, xi).value(tau) == doctest::Approx(direct).epsilon(1e-11));
    const double ct = 0.4;
    const double z = std::pow(s / p.A, -1.0 / p.gamma);
    CHECK(cylinder_tail_bc(p, s, ct).value(t) ==
          doctest::Approx(p.K() * ((p.T - t) - z + ct * z * p.A / s)).epsilon(1e-13));
  }
  // offset form stays accurate where the direct form cancels
  CHECK(outer_tail_bc(P(), 40.0).value(30.0) == doctest::Approx(12.0 * 40.0 * (1.0 - 40.0 * std::exp(-30.0))).epsilon(1e-12));
}

TEST_CASE("the soliton is nearly stationary in the rescaled flow") {
  const auto& sol = *tuned().sol;
  auto s = make_state(Mode::rescaled, -8.0, 40.0, 0.01, 11.0);
  for (std::size_t i = 0; i < s.w.size(); ++i) s.w[i] = sol.eval(s.grid[i]);
  s.left.kind = BoundaryCond::Kind::series;
  s.left.slope = 2.0;
  s.fit_lo = -4.0;
  s.fit_hi = 0.0;
  // soliton tail value, carried by the cylinder decay of the exact tail
  const auto tail = outer_tail_bc(P(), 40.0);
  const double w40 = s.w.back();
  s.right.kind = BoundaryCond::Kind::dirichlet;
  s.right.value = [tail, w40](double tau) { return w40 + tail.value(tau) - 12.0 * 40.0; };
  const auto w0 = s.w;
  const auto br = stationary_bracket(s, P());
  double worst_br = 0;
  for (std::size_t i = 1; i + 1 < br.size(); ++i) worst_br = std::max(worst_br, std::abs(br[i]));
  CHECK(worst_br < 1e-3);
  RunControl c;
  c.t_end = 12.0;
  const auto r = run(s, P(), c);
  REQUIRE(r.ok);
  double drift = 0;
  for (std::size_t i = 0; i < w0.size(); ++i) drift = std::max(drift, std::abs(r.snaps.back().w[i] / w0[i] - 1.0));
  CHECK(drift <= 1e-3);
  CHECK(r.snaps.size() == 11);
  CHECK(r.snaps.back().time == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("cylindrical and rescaled runs agree") {
  const double tau0 = 2.0, tau1 = 4.0;
  const auto p = make_params(5, 1.0, 1.0, std::exp(-tau0));
  ConditionII c;
  c.params = p;
  c.tau_start = tau0;
  c.c_t = 0.3;
  const double h = 0.02;
  auto r = init_condition_ii(c, -8.0, 40.0, h);
  const double s0 = c.s_tip() - 8.0, s1 = p.A * std::exp(p.gamma * tau1) + 40.0;
  auto y = make_state(Mode::cylindrical, s0, s1, h, 0.0);
  for (std::size_t i = 0; i < y.w.size(); ++i) y.w[i] = c.w(y.grid[i]);
  y.left.kind = BoundaryCond::Kind::series;
  y.left.slope = 2.0;
  y.right = cylinder_tail_bc(p, y.grid.back(), c.c_t);
  // the rescaled window takes its right value from the cylinder run
  r.right.kind = BoundaryCond::Kind::dirichlet;
  const double dtau = 1e-4;
  double worst = 0;
  for (int k = 1; k <= 20000; ++k) {
    const double tk = tau0 + k * dtau;
    REQUIRE(step(y, p.T - std::exp(-tk) - y.time, p).ok);
    Profile cyl{Coord::cyl_s, TimeKind::t, y.time, y.grid, y.w};
    const double tip = p.A * std::exp(p.gamma * tk), scale = std::exp(-(1 + p.gamma) * tk);
    const double wb = sample(cyl, {tip + r.grid.back()})[0] / scale;
    r.right.value = [wb](double) { return wb; };
    REQUIRE(step(r, tk - r.time, p).ok);
    if (k % 500) continue;
    std::vector<double> s;
    for (double xi : r.grid) s.push_back(xi + tip);
    const auto v = sample(cyl, s);
    for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(v[i] / (scale * r.w[i]) - 1.0));
  }
  CHECK(worst <= 5e-3);
}

TEST_CASE("condition ii data") {
  const auto p = make_params(5, 1.0, 1.0, std::exp(-11.0));
  ConditionII c;
  c.params = p;
  c.tau_start = 11.0;
  c.c_t = 0.5;
  std::vector<double> xi;
  for (double x = -8.0; x <= 40.0; x += 0.01) xi.push_back(x);
  validate_condition_ii(c, xi);
  const double E = std::exp(p.gamma * c.tau_start);
  for (double x : xi) CHECK(c.wbar(x) < p.K() * E);  // |x|^2 u0^{1-m} < (n-1)(n-2) T, rescaled
  // tail: ratio to 12 (T - (s/A)^{-1/gamma}) tends to 1
  const double s = 1e6 * c.s_tip();
  const double T = std::exp(-c.tau_start);
  CHECK(c.w(s) / (12.0 * (T - std::pow(s / p.A, -1.0))) == doctest::Approx(1.0).epsilon(1e-6));
  // smooth origin
  const double r = c.wbar(-30.0) / c.wbar(-31.0);
  CHECK(r == doctest::Approx(std::exp(2.0)).epsilon(1e-6));
  ConditionII bad = c;
  bad.c_t = 2.0 * (c.s_tip() + c.xi_c);
  CHECK_THROWS_AS(validate_condition_ii(bad, xi), std::invalid_argument);
  ConditionII neg = c;
  neg.xi_c = 0.0;
  CHECK_THROWS_AS(validate_condition_ii(neg, xi), std::invalid_argument);
}

TEST_CASE("barrier midpoint data and the sandwich monitor") {
  const auto& b = tuned().b;
  auto s = init_from_barrier_mid(b, 11.0, -8.0, 40.0, 0.01);
  const auto wp = composite_on(b, s.grid, 11.0, Side::plus);
  const auto wm = composite_on(b, s.grid, 11.0, Side::minus);
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    CHECK(s.w[i] < wp[i]);
    CHECK(s.w[i] > wm[i]);
  }
  CHECK(sandwich_check(s.grid, s.w, 11.0, b) < 0.0);
  CHECK(sandwich_check(s.grid, wp, 11.0, b) == 0.0);
  auto up = wp;
  for (auto& v : up) v *= 1.01;
  CHECK(sandwich_check(s.grid, up, 11.0, b) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(boundary_in_corridor(b, 40.0, 11.0, s.w.back()));
  CHECK_FALSE(boundary_in_corridor(b, 40.0, 11.0, 2.0 * s.w.back()));
  CHECK(s.right.value(11.0) == doctest::Approx(s.w.back()).epsilon(1e-4));

  RunControl c;
  c.t_end = 12.0;
  long calls = 0;
  c.on_step = [&](const FlowState& st, std::string&) {
    ++calls;
    for (double v : st.w) REQUIRE(v > 0.0);
    return true;
  };
  const auto r = run(s, b.params, c);
  REQUIRE(r.ok);
  CHECK(calls == r.stats.accepted);
  CHECK(r.stats.dt_max_used <= 5e-3);
  CHECK(r.stats.dt_min_used >= 1e-6);
  for (const auto& sn : r.snaps) CHECK(sandwich_check(r.grid, sn.w, sn.time, b) <= 1e-3);
  CHECK(r.snaps.back().w.back() == doctest::Approx(s.right.value(12.0)).epsilon(1e-15));

  RunControl stop = c;
  stop.on_step = [](const FlowState& st, std::string& why) {
    why = "stop";
    return st.time < 11.05;
  };
  const auto aborted = run(s, b.params, stop);
  CHECK_FALSE(aborted.ok);
  CHECK(aborted.abort_reason == "stop");
}

TEST_CASE("grid construction") {
  CHECK_THROWS_AS(make_state(Mode::rescaled, 1.0, 0.0, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_state(Mode::rescaled, 0.0, 0.2, 0.1, 0.0), std::invalid_argument);
  const auto s = make_state(Mode::rescaled, -8.0, 40.0, 0.01, 3.0);
  CHECK(s.grid.size() == 4801);
  CHECK(s.grid.back() == 40.0);
  CHECK(s.h == doctest::Approx(0.01));
}
