#include <benchmark/benchmark.h>

#include <cmath>

#include "yamabe/flow.hpp"
#include "yamabe/residual.hpp"

using namespace yf;

namespace {

const FlowParams& params() {
  static const FlowParams p = make_params(5, 1.0, 1.0, 1.0);
  return p;
}

Profile sphere_profile(int N) {
  Profile u{Coord::radial_r, TimeKind::t, 0.0, {}, {}};
  for (int i = 0; i < N; ++i) {
    const double r = 3.0 * i / (N - 1.0);
    u.grid.push_back(r);
    u.values.push_back(std::pow(2.0 / (1.0 + r * r), 1.0 / (1.0 - params().m)));
  }
  return u;
}

void BM_curvature(benchmark::State& st, Exec exec) {
  const auto u = sphere_profile(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(scalar_curvature(u, params(), exec));
}

void BM_step(benchmark::State& st, Exec exec) {
  auto base = make_state(Mode::cylindrical, -10, 10, 20.0 / (st.range(0) - 1.0), 0.0);
  for (std::size_t i = 0; i < base.w.size(); ++i) base.w[i] = 1.0 / std::pow(std::cosh(base.grid[i]), 2);
  base.left.slope = 2.0;
  base.right.slope = -2.0;
  for (auto _ : st) {
    auto s = base;
    benchmark::DoNotOptimize(step(s, 1e-4, params(), exec));
  }
}

void BM_scan(benchmark::State& st, Exec exec) {
  const auto xs = uniform_grid(0.0, 1.0, static_cast<int>(st.range(0)));
  const auto ts = uniform_grid(0.0, 1.0, 33);
  const auto f = [](double x, double t) { return OpValue{std::sin(3.0 * x) + std::cos(t) + 2.5, 1e-14}; };
  for (auto _ : st) benchmark::DoNotOptimize(sign_scan("bench", "unit", xs, ts, f, 1, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_curvature, serial, Exec::serial)->Arg(2000)->Arg(20000);
BENCHMARK_CAPTURE(BM_curvature, parallel, Exec::parallel)->Arg(2000)->Arg(20000);
BENCHMARK_CAPTURE(BM_step, serial, Exec::serial)->Arg(2000)->Arg(20000);
BENCHMARK_CAPTURE(BM_step, parallel, Exec::parallel)->Arg(2000)->Arg(20000);
BENCHMARK_CAPTURE(BM_scan, serial, Exec::serial)->Arg(1000);
BENCHMARK_CAPTURE(BM_scan, parallel, Exec::parallel)->Arg(1000);

BENCHMARK_MAIN();
