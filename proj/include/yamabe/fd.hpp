#pragma once

#include <span>
#include <vector>

namespace yf {

/// Finite-difference weights on arbitrary nodes (Fornberg).
/// Returns w[k][j]: weight of node j for derivative order k at x0, k = 0..max_order.
std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> nodes, int max_order);

/// Tridiagonal solve in place (Thomas). a: sub, b: diag, c: super, d: rhs -> solution.
/// Returns false on a zero pivot.
bool solve_tridiagonal(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
                       std::vector<double>& d);

}  // namespace yf
