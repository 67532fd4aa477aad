#include "yamabe/coords.hpp"

#include <cmath>
// pchip in Boost 1.74 calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <limits>
#include <stdexcept>

#include "yamabe/fd.hpp"

namespace yf {

FlowParams make_params(int n, double gamma, double A, double T, const ParamOverrides& ov) {
  if (n < 3) throw std::invalid_argument("make_params: n must be >= 3");
  if (!(gamma > 0.0)) throw std::invalid_argument("make_params: gamma must be positive");
  if (!(A > 0.0)) throw std::invalid_argument("make_params: A must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("make_params: T must be positive");
  FlowParams p;
  p.n = n;
  p.m = (n - 2.0) / (n + 2.0);
  p.cbar = 4.0 * (n - 1.0) / (n - 2.0);
  p.gamma = gamma;
  p.A = A;
  p.T = T;
  p.theta_plus = ov.theta_plus.value_or(p.theta_c() + 0.5);
  p.theta_minus = ov.theta_minus.value_or(p.theta_c() - 0.5);
  p.eps = ov.eps.value_or(0.05);
  p.xi0 = ov.xi0.value_or(5.0);
  p.xi1 = ov.xi1.value_or(2.0 * p.xi0);
  p.tau0 = ov.tau0.value_or(0.0);
  validate(p);
  return p;
}

void validate(const FlowParams& p) {
  if (p.n < 3) throw std::invalid_argument("FlowParams: n < 3");
  if (!(p.gamma > 0.0) || !(p.A > 0.0) || !(p.T > 0.0))
    throw std::invalid_argument("FlowParams: gamma, A, T must be positive");
  if (!(p.eps > 0.0 && p.eps < 1.0)) throw std::invalid_argument("FlowParams: eps outside (0,1)");
  if (!(p.theta_minus < p.theta_c() && p.theta_c() < p.theta_plus))
    throw std::invalid_argument("FlowParams: need theta_minus < (n-6)/4 < theta_plus");
  if (!(p.xi1 > p.xi0 && p.xi0 > 0.0)) throw std::invalid_argument("FlowParams: need xi1 > xi0 > 0");
}

std::string coord_tag(Coord c) {
  switch (c) {
    case Coord::radial_r: return "r";
    case Coord::cyl_s: return "s";
    case Coord::outer_eta: return "eta";
    case Coord::inner_xi: return "xi";
  }
  return "?";
}

Coord coord_from_tag(const std::string& s) {
  if (s == "r") return Coord::radial_r;
  if (s == "s") return Coord::cyl_s;
  if (s == "eta") return Coord::outer_eta;
  if (s == "xi") return Coord::inner_xi;
  throw std::invalid_argument("unknown coordinate tag: " + s);
}

void Profile::validate() const {
  if (grid.size() != values.size()) throw std::invalid_argument("Profile: grid/value size mismatch");
  if (grid.size() < 3) throw std::invalid_argument("Profile: fewer than 3 nodes");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("Profile: grid not strictly increasing");
  for (double v : values)
    if (!(v > 0.0)) throw std::invalid_argument("Profile: non-positive value");
}

namespace {

void require(const Profile& p, Coord c, const char* what) {
  if (p.coord != c) throw std::invalid_argument(std::string(what) + ": wrong coordinate system");
  p.validate();
}

}  // namespace

Profile u_to_w(const Profile& u, const FlowParams& p) {
  require(u, Coord::radial_r, "u_to_w");
  if (!(u.grid.front() > 0.0)) throw std::invalid_argument("u_to_w: r-grid must be positive");
  Profile w{Coord::cyl_s, u.time_kind, u.time, {}, {}};
  w.grid.resize(u.grid.size());
  w.values.resize(u.grid.size());
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    const double r = u.grid[i];
    w.grid[i] = std::log(r);
    w.values[i] = r * r * std::pow(u.values[i], 1.0 - p.m);
  }
  return w;
}

Profile w_to_u(const Profile& w, const FlowParams& p) {
  require(w, Coord::cyl_s, "w_to_u");
  Profile u{Coord::radial_r, w.time_kind, w.time, {}, {}};
  u.grid.resize(w.grid.size());
  u.values.resize(w.grid.size());
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    u.grid[i] = std::exp(w.grid[i]);
    u.values[i] = std::pow(w.values[i] * std::exp(-2.0 * w.grid[i]), 1.0 / (1.0 - p.m));
  }
  return u;
}

Profile w_to_outer(const Profile& w, double t, const FlowParams& p) {
  require(w, Coord::cyl_s, "w_to_outer");
  if (!(t < p.T)) throw std::invalid_argument("w_to_outer: t must be < T");
  const double lam = p.T - t;
  const double sc = std::pow(lam, p.gamma);
  Profile h{Coord::outer_eta, TimeKind::tau, -std::log(lam), {}, {}};
  h.grid.resize(w.grid.size());
  h.values.resize(w.grid.size());
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    h.grid[i] = sc * w.grid[i];
    h.values[i] = w.values[i] / lam;
  }
  return h;
}

Profile outer_to_w(const Profile& hat, const FlowParams& p) {
  require(hat, Coord::outer_eta, "outer_to_w");
  const double lam = std::exp(-hat.time);
  const double sc = std::pow(lam, -p.gamma);
  Profile w{Coord::cyl_s, TimeKind::t, p.T - lam, {}, {}};
  w.grid.resize(hat.grid.size());
  w.values.resize(hat.grid.size());
  for (std::size_t i = 0; i < hat.grid.size(); ++i) {
    w.grid[i] = sc * hat.grid[i];
    w.values[i] = lam * hat.values[i];
  }
  return w;
}

Profile outer_to_inner(const Profile& hat, double tau, const FlowParams& p) {
  require(hat, Coord::outer_eta, "outer_to_inner");
  const double e = std::exp(p.gamma * tau);
  Profile b{Coord::inner_xi, TimeKind::tau, tau, {}, {}};
  b.grid.resize(hat.grid.size());
  b.values.resize(hat.grid.size());
  for (std::size_t i = 0; i < hat.grid.size(); ++i) {
    b.grid[i] = (hat.grid[i] - p.A) * e;
    b.values[i] = e * hat.values[i];
  }
  return b;
}

Profile inner_to_outer(const Profile& bar, const FlowParams& p) {
  require(bar, Coord::inner_xi, "inner_to_outer");
  const double e = std::exp(-p.gamma * bar.time);
  Profile h{Coord::outer_eta, TimeKind::tau, bar.time, {}, {}};
  h.grid.resize(bar.grid.size());
  h.values.resize(bar.grid.size());
  for (std::size_t i = 0; i < bar.grid.size(); ++i) {
    h.grid[i] = p.A + bar.grid[i] * e;
    h.values[i] = e * bar.values[i];
  }
  return h;
}

std::vector<double> sample(const Profile& prof, const std::vector<double>& x) {
  prof.validate();
  if (prof.grid.size() < 4) throw std::invalid_argument("sample: need at least 4 nodes");
  auto xs = prof.grid;
  auto ys = prof.values;
  const double lo = xs.front(), hi = xs.back();
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(xs), std::move(ys));
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) throw std::out_of_range("sample: point outside profile grid");
    out[i] = spline(x[i]);
  }
  return out;
}

namespace {

// Radial Laplacian of f at node i; even extension at r = 0.
double radial_laplacian(const std::vector<double>& r, const std::vector<double>& f, std::size_t i,
                        int n) {
  const std::size_t N = r.size();
  if (i == 0 && r[0] == 0.0) return n * 2.0 * (f[1] - f[0]) / (r[1] * r[1]);
  std::size_t lo;
  std::size_t cnt;
  if (i == 0) {
    lo = 0;
    cnt = 4;
  } else if (i == N - 1) {
    lo = N - 4;
    cnt = 4;
  } else {
    lo = i - 1;
    cnt = 3;
  }
  std::span<const double> nodes(r.data() + lo, cnt);
  const auto w = fd_weights(r[i], nodes, 2);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t j = 0; j < cnt; ++j) {
    d1 += w[1][j] * f[lo + j];
    d2 += w[2][j] * f[lo + j];
  }
  return d2 + (n - 1.0) * d1 / r[i];
}

}  // namespace

CurvatureField scalar_curvature(const Profile& u, const FlowParams& p, Exec exec) {
  require(u, Coord::radial_r, "scalar_curvature");
  const std::size_t N = u.grid.size();
  if (N < 5) throw std::invalid_argument("scalar_curvature: grid too coarse (need >= 5 nodes)");
  if (u.grid.front() < 0.0) throw std::invalid_argument("scalar_curvature: negative radius");
  std::vector<double> f(N);
  for (std::size_t i = 0; i < N; ++i) f[i] = std::pow(u.values[i], p.m);
  CurvatureField out;
  out.grid = u.grid;
  out.R.resize(N);
  out.rmNorm.resize(N);
  const double norm = 1.0 / std::sqrt(p.n * (p.n - 1.0));
  const long NN = static_cast<long>(N);
  if (exec == Exec::serial) {
    for (long i = 0; i < NN; ++i) {
      out.R[i] = -p.cbar * radial_laplacian(u.grid, f, i, p.n) / u.values[i];
      out.rmNorm[i] = out.R[i] * norm;
    }
  } else {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < NN; ++i) {
      out.R[i] = -p.cbar * radial_laplacian(u.grid, f, i, p.n) / u.values[i];
      out.rmNorm[i] = out.R[i] * norm;
    }
  }
  return out;
}

double curvature_consistency(const Profile& u0, const Profile& u1, const FlowParams& p) {
  if (u0.grid != u1.grid) throw std::invalid_argument("curvature_consistency: mismatched grids");
  const double dt = u1.time - u0.time;
  if (!(dt > 0.0)) throw std::invalid_argument("curvature_consistency: need increasing times");
  const auto c0 = scalar_curvature(u0, p);
  const auto c1 = scalar_curvature(u1, p);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < u0.grid.size(); ++i) {
    const double g0 = std::pow(u0.values[i], 1.0 - p.m);
    const double g1 = std::pow(u1.values[i], 1.0 - p.m);
    const double dgdt = (g1 - g0) / dt;
    const double Rg = 0.5 * (c0.R[i] * g0 + c1.R[i] * g1);
    if (Rg == 0.0 && dgdt == 0.0) continue;
    const double scale = std::abs(Rg);
    if (scale == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(dgdt + Rg) / scale);
  }
  return worst;
}

CurvatureField rescaled_curvature(const Profile& wbar, const FlowParams& p, Exec exec) {
  require(wbar, Coord::inner_xi, "rescaled_curvature");
  Profile u{Coord::radial_r, wbar.time_kind, wbar.time, {}, {}};
  const std::size_t N = wbar.grid.size();
  u.grid.resize(N);
  u.values.resize(N);
  const double q = 1.0 / (1.0 - p.m);
  for (std::size_t i = 0; i < N; ++i) {
    const double xi = wbar.grid[i];
    u.grid[i] = std::exp(xi);
    u.values[i] = std::exp(q * (std::log(wbar.values[i]) - 2.0 * xi));
  }
  return scalar_curvature(u, p, exec);
}

}  // namespace yf
