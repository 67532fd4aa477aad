#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "yamabe/diagnostics.hpp"
#include "yamabe/io.hpp"

using namespace yf;

namespace {

std::vector<double> grid(double lo, double hi, double h) {
  std::vector<double> x;
  const int N = static_cast<int>(std::lround((hi - lo) / h));
  for (int i = 0; i <= N; ++i) x.push_back(lo + i * h);
  return x;
}

struct Tuned {
  FlowParams p;
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
    return Tuned{p, assemble_barrier(p, op, om, sol, 11.0, 19.0), sol};
  }();
  return t;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("yamabe_diag_" + name)).string();
}

}  // namespace

TEST_CASE("synthetic blow-up rows are fitted exactly") {
  for (double p : {1.4, 2.0, 2.7})
    for (double c : {0.8, 2.0}) {
      const auto s = synthetic_series(p, c, 5.0, 15.0, 200);
      const auto f = fit_blowup(s);
      CHECK(std::abs(f.p - p) <= 1e-10);
      CHECK(std::abs(f.c - c) <= 1e-10 * c);
      CHECK(f.c_rm == doctest::Approx(c / std::sqrt(20.0)).epsilon(1e-12));
      CHECK(f.residual < 1e-10);
      CHECK(f.rows >= 8);
      CHECK(f.window.tau_hi == doctest::Approx(15.0));
      CHECK(f.window.tau_lo >= 15.0 - 1.5 * std::log(10.0));
    }
}

TEST_CASE("default window keeps the last 1.5 decades minus the first fifth") {
  const auto s = synthetic_series(2.0, 2.0, 0.0, 10.0, 1001);
  const auto w = default_window(s);
  const double span = 1.5 * std::log(10.0);
  CHECK(w.tau_hi == doctest::Approx(10.0));
  CHECK(w.tau_lo == doctest::Approx(10.0 - 0.8 * span).epsilon(2e-3));
}

TEST_CASE("too few rows in the window") {
  const auto s = synthetic_series(2.0, 2.0, 0.0, 10.0, 1001);
  CHECK_THROWS_AS(fit_blowup(s, FitWindow{9.99, 10.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_blowup(synthetic_series(2.0, 2.0, 0.0, 10.0, 7)), std::invalid_argument);
}

TEST_CASE("rescaled soliton curvature at the origin is 2 gamma A") {
  for (int n : {4, 5, 6})
    for (double gamma : {0.4, 1.0}) {
      const auto p = make_params(n, gamma, 1.0, 1.0);
      const auto sol = solve_soliton(p);
      const auto xi = grid(-8.0, 40.0, 0.01);
      std::vector<double> w;
      for (double x : xi) w.push_back(sol.eval(x));
      const auto row = curvature_row(xi, w, 3.0, p);
      CHECK(row.R0 == doctest::Approx(2.0 * gamma * p.A).epsilon(1e-3));
      CHECK(row.supR >= row.R0);
      CHECK(row.lnR == doctest::Approx((1.0 + gamma) * 3.0 + std::log(row.supR)).epsilon(1e-14));
      CHECK(row.t == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-14));
    }
}

TEST_CASE("curvature rows ignore translation and give p = 1 + gamma on a stationary profile") {
  const auto& sol = *tuned().sol;
  const auto& p = tuned().p;
  const auto xi = grid(-8.0, 40.0, 0.01);
  std::vector<double> w, ws;
  std::vector<double> xs;
  for (double x : xi) {
    w.push_back(sol.eval(x));
    xs.push_back(x - 0.5);
    ws.push_back(sol.eval(x));
  }
  const auto a = curvature_row(xi, w, 5.0, p);
  const auto b = curvature_row(xs, ws, 5.0, p);
  // left of about -6 the signal sits 1e-7 below w and roundoff shows at 1e-4
  CHECK(a.supR == doctest::Approx(b.supR).epsilon(1e-3));
  const auto ra = rescaled_curvature(Profile{Coord::inner_xi, TimeKind::tau, 5.0, xi, w}, p);
  const auto rb = rescaled_curvature(Profile{Coord::inner_xi, TimeKind::tau, 5.0, xs, ws}, p);
  double worst = 0;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (xi[i] >= -2.0) worst = std::max(worst, std::abs(ra.R[i] / rb.R[i] - 1.0));
  CHECK(worst <= 1e-9);

  RunResult r;
  r.grid = xi;
  r.ok = true;
  for (int k = 0; k <= 60; ++k) r.snaps.push_back({10.0 + 0.1 * k, w});
  const auto s = curvature_series(r, p);
  REQUIRE(s.rows.size() == 61);
  const auto f = fit_blowup(s);
  CHECK(f.p == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.c == doctest::Approx(a.supR).epsilon(1e-10));
  const auto serial = curvature_series(r, p, Exec::serial);
  for (std::size_t i = 0; i < s.rows.size(); ++i) CHECK(serial.rows[i].supR == s.rows[i].supR);

  RunResult cyl = r;
  cyl.mode = Mode::cylindrical;
  CHECK_THROWS(curvature_series(cyl, p));
}

TEST_CASE("soliton distance recovers a translation") {
  const auto& sol = *tuned().sol;
  const auto xi = grid(-8.0, 40.0, 0.01);
  for (double c : {0.3, -1.2, 0.0}) {
    std::vector<double> w;
    for (double x : xi) w.push_back(sol.eval(x + c));
    const auto d = soliton_distance(xi, w, sol);
    CHECK(d.shift == doctest::Approx(c).epsilon(1e-9));
    CHECK(d.error <= 1e-10);
    CHECK(d.unimodal);
  }
  std::vector<double> w;
  for (double x : xi) w.push_back(1.01 * sol.eval(x));
  const auto d = soliton_distance(xi, w, sol);
  CHECK(d.error > 1e-3);
}

TEST_CASE("non-increasing with jitter") {
  CHECK(non_increasing({5, 4, 3, 2, 1}, 0));
  CHECK(non_increasing({1, 9, 4, 3, 3.1, 2}, 1));
  CHECK_FALSE(non_increasing({1, 9, 4, 3, 3.5, 2}, 1));
  CHECK(non_increasing({1, 9, 4, 3, 3.5, 2}, 1, 0.2));
  CHECK_FALSE(non_increasing({5, 4, 3, 2, 1, 2}, 0));
  CHECK(non_increasing({}, 0));
}

TEST_CASE("shift fitting") {
  const auto& b = tuned().b;
  const auto s = init_from_barrier_mid(b, 11.0, -8.0, 40.0, 0.01);
  const auto mid = fit_shifts(s.grid, s.w, 11.0, b);
  CHECK(std::abs(mid.xi_a) < 0.05);
  CHECK(std::abs(mid.xi_b) < 0.05);
  CHECK(mid.xi_a <= 0.0);
  CHECK(mid.xi_b >= 0.0);
  CHECK_FALSE(mid.tight_ordered());
  const auto ord = mid.ordered();
  CHECK(ord.xi_a > ord.xi_b);
  CHECK(ord.xi_b == mid.xi_b);
  CHECK(shifted_sandwich_check(s.grid, s.w, 11.0, b, ord) <= 0.0);
  CHECK(shifted_sandwich_check(s.grid, s.w, 11.0, b, mid) <= 1e-12);

  // tightness: nudging either shift past its edge breaks the bound
  CHECK(shifted_sandwich_check(s.grid, s.w, 11.0, b, Shifts{mid.xi_a - 1e-3, mid.xi_b}) > 0.0);
  CHECK(shifted_sandwich_check(s.grid, s.w, 11.0, b, Shifts{mid.xi_a, mid.xi_b + 1e-3}) > 0.0);

  auto up = s.w;
  for (auto& v : up) v *= 1.05;
  const auto hi = fit_shifts(s.grid, up, 11.0, b);
  CHECK(hi.xi_b < mid.xi_b);
  CHECK(hi.xi_a < mid.xi_a);
  CHECK(hi.tight_ordered() == (hi.xi_a > hi.xi_b));

  std::vector<double> ceiling(s.w.size(), 1.1 * 12.0 * std::exp(11.0));
  CHECK_THROWS_AS(fit_shifts(s.grid, ceiling, 11.0, b), std::runtime_error);
  CHECK_THROWS_AS(fit_shifts({}, {}, 11.0, b), std::invalid_argument);
}

TEST_CASE("report lists missing sections and is deterministic") {
  ReportInputs none;
  const auto e = report(none);
  CHECK(e["schema_version"] == 1);
  const std::vector<std::string> all{"params", "tuning", "scans", "run", "blowup", "soliton_distance", "shifts"};
  CHECK(e["missing"].get<std::vector<std::string>>() == all);

  const auto path = tmp_path("abc.txt");
  {
    std::ofstream f(path, std::ios::binary);
    f << "abc";
  }
  ReportInputs in;
  in.params = tuned().p;
  auto s = synthetic_series(2.0, 2.0, 5.0, 15.0, 100);
  s.fit = fit_blowup(s);
  in.blowup = s;
  in.shifts = Shifts{0.1, -0.2};
  in.distances = {{11.0, SolitonDistance{0.01, 1e-4, true}}};
  in.files = {path, tmp_path("absent.txt")};
  const auto j = report(in);
  CHECK(j["params"]["eps"] == 1e-3);
  CHECK(j["blowup"]["p"].get<double>() == doctest::Approx(2.0));
  CHECK(j["shifts"]["tight_ordered"] == true);
  CHECK(j["manifest"][0]["sha256"] == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto miss = j["missing"].get<std::vector<std::string>>();
  CHECK(std::find(miss.begin(), miss.end(), "file:" + tmp_path("absent.txt")) != miss.end());
  CHECK(std::find(miss.begin(), miss.end(), "params") == miss.end());
  CHECK(report(in).dump() == j.dump());
  std::filesystem::remove(path);
}

TEST_CASE("io round trips") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  Profile p{Coord::inner_xi, TimeKind::tau, 11.25, {}, {}};
  for (int i = 0; i < 50; ++i) {
    p.grid.push_back(-8.0 + 0.1 * i + 1e-13 * i);
    p.values.push_back(std::exp(0.37 * i) / 3.0);
  }
  const auto path = tmp_path("profile.csv");
  write_profile_csv(path, p);
  const auto q = read_profile_csv(path);
  CHECK(q.coord == p.coord);
  CHECK(q.time_kind == p.time_kind);
  CHECK(q.time == p.time);
  CHECK(q.grid == p.grid);
  CHECK(q.values == p.values);

  const auto jpath = tmp_path("x.json");
  const nlohmann::json j{{"a", 1.0 / 3.0}, {"b", {1, 2, 3}}};
  write_json(jpath, j);
  CHECK(read_json(jpath) == j);
  std::filesystem::remove(path);
  std::filesystem::remove(jpath);
  CHECK_THROWS(read_profile_csv(path));
}
