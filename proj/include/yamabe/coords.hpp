#pragma once

#include <optional>
#include <string>
#include <vector>

namespace yf {

/// Serial reference path or OpenMP path for grid kernels.
enum class Exec { serial, parallel };

struct FlowParams {
  int n = 5;
  double m = 3.0 / 7.0;
  double cbar = 16.0 / 3.0;
  double gamma = 1.0;
  double A = 1.0;
  double T = 1.0;
  double theta_plus = 0.25;
  double theta_minus = -0.75;
  double eps = 0.05;
  double xi0 = 5.0;
  double xi1 = 10.0;
  double tau0 = 0.0;

  /// (n-1)(n-2), the cylinder speed.
  double K() const { return (n - 1.0) * (n - 2.0); }
  /// (n-6)/4, the theta threshold separating sub- from supersolutions.
  double theta_c() const { return (n - 6.0) / 4.0; }
  /// (n-1)(n-2)/(gamma A), far-field slope of the soliton.
  double slope() const { return K() / (gamma * A); }
};

struct ParamOverrides {
  std::optional<double> theta_plus, theta_minus, eps, xi0, xi1, tau0;
};

FlowParams make_params(int n, double gamma, double A, double T, const ParamOverrides& ov = {});
void validate(const FlowParams& p);

enum class Coord { radial_r, cyl_s, outer_eta, inner_xi };
enum class TimeKind { t, tau };

std::string coord_tag(Coord c);
Coord coord_from_tag(const std::string& s);

struct Profile {
  Coord coord = Coord::radial_r;
  TimeKind time_kind = TimeKind::t;
  double time = 0.0;
  std::vector<double> grid;
  std::vector<double> values;

  void validate() const;
};

struct CurvatureField {
  std::vector<double> grid;
  std::vector<double> R;
  std::vector<double> rmNorm;
};

Profile u_to_w(const Profile& u, const FlowParams& p);
Profile w_to_u(const Profile& w, const FlowParams& p);
Profile w_to_outer(const Profile& w, double t, const FlowParams& p);
Profile outer_to_w(const Profile& hat, const FlowParams& p);
Profile outer_to_inner(const Profile& hat, double tau, const FlowParams& p);
Profile inner_to_outer(const Profile& bar, const FlowParams& p);

/// Samples an inner profile at requested xi by cubic interpolation; throws outside the grid.
std::vector<double> sample(const Profile& prof, const std::vector<double>& x);

CurvatureField scalar_curvature(const Profile& u, const FlowParams& p, Exec exec = Exec::parallel);

double curvature_consistency(const Profile& u0, const Profile& u1, const FlowParams& p);

/// (T-t)^{1+gamma} R on an inner-coordinate profile, via the planar picture y = e^xi.
CurvatureField rescaled_curvature(const Profile& wbar, const FlowParams& p, Exec exec = Exec::parallel);

}  // namespace yf
