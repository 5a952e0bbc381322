#pragma once

// Direct Runge-Kutta integration of the nonlinear Hamilton-Jacobi system,
//
//   du_i/dt = -r(i) - sum_j e^{-1-b_ij} e^{u_j - u_i},   u_i(T) = g(i),
//
// integrated in u itself so this path shares nothing with the exp/log
// transform or the matrix exponential it cross-validates.

#include <cmath>
#include <string>
#include <vector>

#include "lsoc/errors.hpp"
#include "lsoc/hjb.hpp"
#include "lsoc/problem.hpp"

namespace lsoc {

struct OracleSolution {
  std::vector<double> grid;               // uniform times on [0, T]
  std::vector<std::vector<double>> u;     // per grid point, length n_nodes
};

namespace detail {

inline void hj_rhs(const GraphProblem& p, const std::vector<double>& u, std::vector<double>& out) {
  for (int i = 0; i < p.n_nodes; ++i) {
    double v = -p.rewards[i];
    const auto& nbrs = p.neighborhoods[i];
    for (size_t e = 0; e < nbrs.size(); ++e)
      v -= std::exp(-1.0 - p.edge_offsets[i][e] + u[nbrs[e]] - u[i]);
    out[i] = v;
  }
}

}  // namespace detail

// Classical fixed-step RK4 from t = T down to t = 0; global error O(h^4).
inline OracleSolution integrate_hj_backward(const GraphProblem& p, int n_steps) {
  if (n_steps < 1) fail(errc::precondition_violated, "n_steps must be positive");
  const int n = p.n_nodes;
  const double h = -p.horizon / n_steps;  // backward in time

  OracleSolution sol;
  sol.grid.resize(n_steps + 1);
  sol.u.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k)
    sol.grid[k] = p.horizon * (static_cast<double>(k) / n_steps);

  std::vector<double> u = p.terminal_rewards;
  sol.u[n_steps] = u;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (int k = n_steps - 1; k >= 0; --k) {
    detail::hj_rhs(p, u, k1);
    for (int i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    detail::hj_rhs(p, tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    detail::hj_rhs(p, tmp, k3);
    for (int i = 0; i < n; ++i) tmp[i] = u[i] + h * k3[i];
    detail::hj_rhs(p, tmp, k4);
    for (int i = 0; i < n; ++i) {
      u[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(u[i]))
        fail(errc::non_finite, "integration blew up at step " + std::to_string(k) +
                                   "; increase n_steps");
    }
    sol.u[k] = u;
  }
  return sol;
}

// Max over the shared grid and all nodes of |u_a - u_b|.
inline double compare_solutions(const ValueSolution& a, const OracleSolution& b) {
  if (a.grid.size() != b.grid.size()) fail(errc::grid_mismatch, "different grid sizes");
  const double scale = std::max(1.0, std::abs(a.grid.back()));
  for (size_t k = 0; k < a.grid.size(); ++k)
    if (std::abs(a.grid[k] - b.grid[k]) > 1e-12 * scale)
      fail(errc::grid_mismatch, "grids differ at index " + std::to_string(k));
  double worst = 0.0;
  for (size_t k = 0; k < a.u.size(); ++k)
    for (size_t i = 0; i < a.u[k].size(); ++i)
      worst = std::max(worst, std::abs(a.u[k][i] - b.u[k][i]));
  return worst;
}

}  // namespace lsoc
