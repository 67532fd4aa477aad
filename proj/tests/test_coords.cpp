#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "yamabe/coords.hpp"

using namespace yf;

namespace {

// Round sphere of radius rho in stereographic form: u^{1-m} = 4 rho^2 / (1 + r^2)^2, R = n(n-1)/rho^2.
Profile sphere(const FlowParams& p, double rho, int N, double rmax = 3.0) {
  Profile u{Coord::radial_r, TimeKind::t, 0.0, {}, {}};
  for (int i = 0; i < N; ++i) {
    const double r = rmax * i / (N - 1.0);
    u.grid.push_back(r);
    u.values.push_back(std::pow(4.0 * rho * rho / std::pow(1.0 + r * r, 2), 1.0 / (1.0 - p.m)));
  }
  return u;
}

}  // namespace

TEST_CASE("derived constants") {
  const auto p = make_params(5, 1.0, 1.0, 1.0);
  CHECK(p.m == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(p.cbar == doctest::Approx(16.0 / 3.0).epsilon(1e-15));
  CHECK(p.K() == 12.0);
  CHECK(p.theta_c() == -0.25);
  CHECK(p.theta_plus == 0.25);
  CHECK(p.theta_minus == -0.75);
  CHECK(p.slope() == doctest::Approx(12.0));
  for (int n : {3, 4, 6, 7}) {
    const auto q = make_params(n, 0.5, 2.0, 1.0);
    CHECK(q.m == doctest::Approx((n - 2.0) / (n + 2.0)));
    CHECK(q.theta_minus < q.theta_c());
    CHECK(q.theta_c() < q.theta_plus);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_params(2, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_params(5, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_params(5, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_params(5, 1.0, 1.0, 0.0), std::invalid_argument);
  ParamOverrides bad;
  bad.theta_plus = -0.5;
  CHECK_THROWS_AS(make_params(5, 1.0, 1.0, 1.0, bad), std::invalid_argument);
  ParamOverrides xi;
  xi.xi0 = 5;
  xi.xi1 = 4;
  CHECK_THROWS_AS(make_params(5, 1.0, 1.0, 1.0, xi), std::invalid_argument);
  ParamOverrides eps;
  eps.eps = 1.0;
  CHECK_THROWS_AS(make_params(5, 1.0, 1.0, 1.0, eps), std::invalid_argument);
}

TEST_CASE("coordinate round trips") {
  const auto p = make_params(5, 0.7, 1.3, 2.0);
  Profile u{Coord::radial_r, TimeKind::t, 0.4, {}, {}};
  for (int i = 1; i <= 50; ++i) {
    u.grid.push_back(0.1 * i);
    u.values.push_back(1.0 / (1.0 + 0.1 * i));
  }
  const auto w = u_to_w(u, p);
  const auto back = w_to_u(w, p);
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    CHECK(back.grid[i] == doctest::Approx(u.grid[i]).epsilon(1e-14));
    CHECK(back.values[i] == doctest::Approx(u.values[i]).epsilon(1e-13));
  }
  const auto hat = w_to_outer(w, 0.4, p);
  CHECK(hat.time == doctest::Approx(-std::log(1.6)));
  const auto w2 = outer_to_w(hat, p);
  CHECK(w2.time == doctest::Approx(0.4).epsilon(1e-14));
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    CHECK(w2.grid[i] == doctest::Approx(w.grid[i]).epsilon(1e-14));
    CHECK(w2.values[i] == doctest::Approx(w.values[i]).epsilon(1e-14));
  }
  const auto bar = outer_to_inner(hat, hat.time, p);
  const auto hat2 = inner_to_outer(bar, p);
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    CHECK(hat2.grid[i] == doctest::Approx(hat.grid[i]).epsilon(1e-14));
    CHECK(hat2.values[i] == doctest::Approx(hat.values[i]).epsilon(1e-14));
  }
  // xi = s - A e^{gamma tau} and wbar = e^{(1+gamma) tau} w.
  const double tau = hat.time;
  CHECK(bar.grid[3] == doctest::Approx(w.grid[3] - p.A * std::exp(p.gamma * tau)).epsilon(1e-13));
  CHECK(bar.values[3] == doctest::Approx(std::exp((1 + p.gamma) * tau) * w.values[3]).epsilon(1e-13));
}

TEST_CASE("transforms reject wrong coordinates and bad grids") {
  const auto p = make_params(5, 1.0, 1.0, 1.0);
  Profile w{Coord::cyl_s, TimeKind::t, 0.0, {0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(u_to_w(w, p), std::invalid_argument);
  CHECK_THROWS_AS(w_to_outer(w, 1.0, p), std::invalid_argument);
  Profile bad = w;
  bad.grid = {0.0, 2.0, 1.0};
  CHECK_THROWS_AS(w_to_u(bad, p), std::invalid_argument);
  bad = w;
  bad.values[1] = 0.0;
  CHECK_THROWS_AS(w_to_u(bad, p), std::invalid_argument);
  CHECK(coord_from_tag(coord_tag(Coord::inner_xi)) == Coord::inner_xi);
  CHECK_THROWS_AS(coord_from_tag("zeta"), std::invalid_argument);
}

TEST_CASE("sample interpolates and refuses to extrapolate") {
  Profile f{Coord::cyl_s, TimeKind::t, 0.0, {}, {}};
  for (int i = 0; i <= 100; ++i) {
    f.grid.push_back(0.01 * i);
    f.values.push_back(1.0 + 0.01 * i);
  }
  const auto v = sample(f, {0.005, 0.5, 1.0});
  CHECK(v[0] == doctest::Approx(1.005).epsilon(1e-14));
  CHECK(v[2] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(sample(f, {1.01}), std::out_of_range);
}

TEST_CASE("scalar curvature of closed-form metrics") {
  for (int n : {3, 5, 6}) {
    const auto p = make_params(n, 1.0, 1.0, 1.0);
    const double rho = 0.8;
    const auto R = scalar_curvature(sphere(p, rho, 2001), p);
    const double target = n * (n - 1.0) / (rho * rho);
    for (std::size_t i = 0; i < R.R.size(); ++i) CHECK(R.R[i] == doctest::Approx(target).epsilon(2e-4));
    CHECK(R.rmNorm[0] == doctest::Approx(R.R[0] / std::sqrt(n * (n - 1.0))));
  }
  // w = c constant is a round cylinder of radius sqrt(c): R = (n-1)(n-2)/c.
  const auto p = make_params(5, 1.0, 1.0, 1.0);
  Profile cyl{Coord::radial_r, TimeKind::t, 0.0, {}, {}};
  for (int i = 0; i < 400; ++i) {
    const double r = std::exp(-2.0 + 0.01 * i);
    cyl.grid.push_back(r);
    cyl.values.push_back(std::pow(3.0 / (r * r), 1.0 / (1.0 - p.m)));
  }
  const auto Rc = scalar_curvature(cyl, p);
  for (std::size_t i = 1; i + 1 < Rc.R.size(); ++i) CHECK(Rc.R[i] == doctest::Approx(4.0).epsilon(1e-3));
  // one-sided end stencils
  CHECK(Rc.R.front() == doctest::Approx(4.0).epsilon(1e-2));
  CHECK(Rc.R.back() == doctest::Approx(4.0).epsilon(1e-2));
  Profile flat{Coord::radial_r, TimeKind::t, 0.0, {0, 0.1, 0.2, 0.3, 0.4, 0.5}, {2, 2, 2, 2, 2, 2}};
  for (double v : scalar_curvature(flat, p).R) CHECK(std::abs(v) < 1e-12);
  Profile coarse{Coord::radial_r, TimeKind::t, 0.0, {0, 0.1, 0.2, 0.3}, {1, 1, 1, 1}};
  CHECK_THROWS_AS(scalar_curvature(coarse, p), std::invalid_argument);
}

TEST_CASE("serial and parallel curvature agree bitwise") {
  const auto p = make_params(5, 1.0, 1.0, 1.0);
  const auto u = sphere(p, 1.0, 5001);
  const auto a = scalar_curvature(u, p, Exec::serial);
  const auto b = scalar_curvature(u, p, Exec::parallel);
  CHECK(a.R == b.R);
}

TEST_CASE("curvature consistency along the shrinking sphere") {
  // rho^2(t) = 1 - n(n-1) t solves g_t = -R g.
  const auto p = make_params(5, 1.0, 1.0, 1.0);
  auto u0 = sphere(p, 1.0, 1001);
  const double dt = 1e-4;
  auto u1 = sphere(p, std::sqrt(1.0 - 20.0 * dt), 1001);
  u1.time = dt;
  CHECK(curvature_consistency(u0, u1, p) < 1e-3);
  auto u2 = u1;
  for (auto& v : u2.values) v *= 1.01;
  CHECK(curvature_consistency(u0, u2, p) > 1.0);
}
