#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "yamabe/barrier.hpp"

using namespace yf;

namespace {

struct Kit {
  FlowParams p;
  std::shared_ptr<const OuterAnsatz> plus, minus;
  std::shared_ptr<const SolitonProfile> sol;
};

Kit kit(double gamma, double eps, double xi0, double xi1, double tau0) {
  ParamOverrides ov;
  ov.eps = eps;
  ov.xi0 = xi0;
  ov.xi1 = xi1;
  ov.tau0 = tau0;
  Kit k;
  k.p = make_params(5, gamma, 1.0, 1.0, ov);
  auto w1 = std::make_shared<const CorrectionTable>(build_w1(k.p));
  auto w2 = std::make_shared<const CorrectionTable>(build_w2(k.p));
  k.plus = std::make_shared<const OuterAnsatz>(build_outer(k.p, k.p.theta_plus, w1, w2));
  k.minus = std::make_shared<const OuterAnsatz>(build_outer(k.p, k.p.theta_minus, w1, w2));
  k.sol = std::make_shared<const SolitonProfile>(solve_soliton(k.p));
  return k;
}

const Kit& tuned() {
  static const Kit k = kit(1.0, 1e-3, 5.0, 10.0, 1.0);
  return k;
}

const CompositeBarrier& barrier() {
  static const CompositeBarrier b = assemble_barrier(tuned().p, tuned().plus, tuned().minus, tuned().sol, 11.0, 19.0);
  return b;
}

}  // namespace

TEST_CASE("inner barriers are scaled translates of the soliton") {
  const auto& s = *tuned().sol;
  CHECK(inner_pm(s, 1.0, Side::plus, 0.2, 0.05) == doctest::Approx(s.eval(1.2) / 1.05).epsilon(1e-15));
  CHECK(inner_pm(s, 1.0, Side::minus, -0.2, 0.05) == doctest::Approx(s.eval(0.8) / 0.95).epsilon(1e-15));
}

TEST_CASE("glue solve matches the outer value at xi1") {
  const auto& k = tuned();
  for (double tau : {11.0, 14.0, 19.0})
    for (Side side : {Side::plus, Side::minus}) {
      const auto& o = side == Side::plus ? *k.plus : *k.minus;
      const auto g = solve_glue(*k.sol, o, tau, side, k.p.eps, k.p.xi1);
      const double E = std::exp(k.p.gamma * tau);
      const double target = (side == Side::plus ? 1.0 + k.p.eps : 1.0 - k.p.eps) * E *
                            what_pm_off(o, k.p.xi1 / E, tau).w;
      CHECK(k.sol->eval(k.p.xi1 + g.C) == doctest::Approx(target).epsilon(1e-13));
      CHECK(std::abs(g.residual) < 1e-10);
      // C' against a centered difference
      const double h = 1e-4;
      const double fd = (solve_glue(*k.sol, o, tau + h, side, k.p.eps, k.p.xi1).C -
                         solve_glue(*k.sol, o, tau - h, side, k.p.eps, k.p.xi1).C) /
                        (2 * h);
      CHECK(std::abs(g.Cprime - fd) < 1e-8 + 1e-5 * std::abs(fd));
    }
}

TEST_CASE("composite barrier: continuity, ordering, derivatives") {
  const auto& b = barrier();
  CHECK(b.C1.size() == b.tau_grid.size());
  for (std::size_t i = 0; i < b.C1.size(); ++i) CHECK(b.C1[i] > b.C2[i]);
  const double xi1 = b.params.xi1;
  for (double tau : {11.0, 15.5}) {
    for (Side s : {Side::plus, Side::minus}) {
      const double l = composite(b, xi1, tau, s), r = composite(b, std::nextafter(xi1, 1e9), tau, s);
      CHECK(std::abs(l - r) / l < 1e-10);
      for (double xi : {-5.0, 3.0, 20.0}) {
        const auto e = composite_eval(b, xi, tau, s);
        const double h = 1e-5;
        CHECK(e.w_xi == doctest::Approx((composite(b, xi + h, tau, s) - composite(b, xi - h, tau, s)) / (2 * h))
                            .epsilon(1e-6));
        CHECK(e.w_tau ==
              doctest::Approx((composite(b, xi, tau + h, s) - composite(b, xi, tau - h, s)) / (2 * h)).epsilon(1e-5).scale(1e-4));
      }
    }
    for (double xi = -10.0; xi <= 40.0; xi += 0.25)
      CHECK(composite(b, xi, tau, Side::plus) > composite(b, xi, tau, Side::minus));
  }
  // convex kinks: w+ loses slope across xi1, w- gains
  const auto [pl, pr] = composite_jump(b, 12.0, Side::plus);
  const auto [ml, mr] = composite_jump(b, 12.0, Side::minus);
  CHECK(pl > pr);
  CHECK(mr > ml);
  const auto on = composite_on(b, {-3.0, 10.0, 30.0}, 13.0, Side::minus);
  CHECK(on[2] == composite(b, 30.0, 13.0, Side::minus));
}

TEST_CASE("shifted view translates by gamma A shift") {
  const auto& b = barrier();
  const auto s = shifted(b, 0.7);
  for (double xi : {-4.0, 9.0, 25.0})
    CHECK(composite(s, xi, 12.0, Side::plus) == composite(b, xi - 0.7, 12.0, Side::plus));
}

TEST_CASE("tuned barrier is certified; exchanged sides are not") {
  const auto& b = barrier();
  const auto g = default_cert_grids(b);
  const auto r = check_certificate(b, g);
  CHECK(r.ordering_ok);
  CHECK(r.continuity_ok);
  CHECK(r.jumps_ok);
  CHECK(r.scans_ok);
  CHECK(r.ok());
  CHECK(r.order_margin > 0.0);
  CHECK(r.positivity_min > 0.0);
  for (const auto& s : r.scans) CHECK(s.violations.empty());
  const auto bad = check_certificate_swapped(b, g);
  CHECK_FALSE(bad.ok());
  const auto serial = check_certificate(b, g, Exec::serial);
  CHECK(serial.order_margin == r.order_margin);
  for (const auto& s : outer_scans(*tuned().plus, *tuned().minus, 5.0, 1.0)) CHECK(s.ok());
}

TEST_CASE("eps = 0.05 breaks the derivative jump condition") {
  // The inner slope mismatch is about eps w0' while the outer kink is only ~ 2/xi1^2.
  const auto k = kit(1.0, 0.05, 5.0, 10.0, 1.0);
  const auto b = assemble_barrier(k.p, k.plus, k.minus, k.sol, 11.0, 19.0);
  const auto r = check_certificate(b, default_cert_grids(b));
  CHECK_FALSE(r.jumps_ok);
  CHECK(r.jump_plus_min < 0.0);
}

TEST_CASE("auto-tune recovers the certified triples") {
  for (auto [g, tau0, tau1] : {std::tuple{1.0, 1.0, 11.0}, {0.4, 4.0, 28.0}}) {
    const auto k = kit(g, 0.05, 5.0, 10.0, 0.0);
    const auto t = auto_tune(k.p, k.plus, k.minus, k.sol);
    REQUIRE(t.found);
    CHECK(t.xi0 == 5.0);
    CHECK(t.xi1 == 10.0);
    CHECK(t.eps == 1e-3);
    CHECK(t.tau0 == tau0);
    CHECK(t.tau1 == tau1);
    CHECK(t.cert.ok());
    if (g < 0.5) CHECK_FALSE(k.plus->corrections.empty());
  }
}
