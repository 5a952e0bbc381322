#pragma once

// Closed-form solver for the Hamilton-Jacobi system of the entropy-cost
// control problem. The exponential change of variables w = e^u turns the
// coupled nonlinear ODEs into the linear system dw/dt = -B w, so the value
// function is a matrix exponential away: w(t) = e^{B (T - t)} e^g. The
// optimal feedback intensities fall out as ratios of w components.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "lsoc/errors.hpp"
#include "lsoc/numerics.hpp"
#include "lsoc/problem.hpp"

namespace lsoc {

// B_ij = e^{-1-b_ij} on edges, B_ii = r(i), zero elsewhere.
struct TransitionMatrixB {
  DenseMatrix matrix;
};

inline TransitionMatrixB build_generator_matrix(const GraphProblem& p) {
  DenseMatrix b(p.n_nodes);
  for (int i = 0; i < p.n_nodes; ++i) {
    b(i, i) = p.rewards[i];
    const auto& nbrs = p.neighborhoods[i];
    for (size_t k = 0; k < nbrs.size(); ++k)
      b(i, nbrs[k]) = std::exp(-1.0 - p.edge_offsets[i][k]);
  }
  return {std::move(b)};
}

// H(i, p) = r(i) + sum_j e^{-1-b_ij} e^{p_ij}. Overflow is reported, never
// silently saturated.
inline double hamiltonian(const GraphProblem& p, NodeId i, const std::vector<double>& pvec) {
  if (i < 0 || i >= p.n_nodes) fail(errc::index_out_of_range, "node " + std::to_string(i));
  const auto& offsets = p.edge_offsets[i];
  if (pvec.size() != offsets.size())
    fail(errc::size_mismatch, "pvec must match the neighborhood of node " + std::to_string(i));
  double h = p.rewards[i];
  for (size_t k = 0; k < pvec.size(); ++k) {
    const double term = std::exp(-1.0 - offsets[k] + pvec[k]);
    if (!std::isfinite(term)) fail(errc::overflow, "hamiltonian term exceeds double range");
    h += term;
  }
  if (!std::isfinite(h)) fail(errc::overflow, "hamiltonian sum exceeds double range");
  return h;
}

// Maximizing intensities of the Hamiltonian supremum: rate_ij = e^{-1-b_ij} e^{p_ij}.
inline std::vector<double> argmax_intensities(const GraphProblem& p, NodeId i,
                                              const std::vector<double>& pvec) {
  if (i < 0 || i >= p.n_nodes) fail(errc::index_out_of_range, "node " + std::to_string(i));
  const auto& offsets = p.edge_offsets[i];
  if (pvec.size() != offsets.size())
    fail(errc::size_mismatch, "pvec must match the neighborhood of node " + std::to_string(i));
  std::vector<double> rates(pvec.size());
  for (size_t k = 0; k < pvec.size(); ++k) {
    rates[k] = std::exp(-1.0 - offsets[k] + pvec[k]);
    if (!std::isfinite(rates[k])) fail(errc::overflow, "intensity exceeds double range");
  }
  return rates;
}

// Value function on a uniform time grid. w holds the linear-system solution
// in overflow-safe form; u = log w componentwise.
struct ValueSolution {
  std::vector<double> grid;                // t_0 = 0 < ... < t_K = T
  std::vector<ScaledPositiveVector> w;     // per grid point
  std::vector<std::vector<double>> u;      // per grid point, length n_nodes
};

// Grid resolution that comfortably resolves the fastest mode of B.
inline int default_n_steps(const GraphProblem& p) {
  double max_rate = 0.0;
  for (int i = 0; i < p.n_nodes; ++i) {
    double row = 0.0;
    for (double b : p.edge_offsets[i]) row += std::exp(-1.0 - b);
    max_rate = std::max(max_rate, row);
  }
  const double suggested = 100.0 * p.horizon * (1.0 + max_rate);
  return std::max(1000, static_cast<int>(std::ceil(suggested)));
}

inline ValueSolution solve_value_function(const GraphProblem& p, int n_steps) {
  if (n_steps < 1) fail(errc::precondition_violated, "n_steps must be positive");
  const DenseMatrix b = build_generator_matrix(p).matrix;
  const auto terminal = ScaledPositiveVector::from_log(p.terminal_rewards);
  // propagate runs in time-to-go tau = T - t, forward from the terminal data
  const auto by_tau = propagate(b, terminal, p.horizon, n_steps);

  ValueSolution sol;
  const int k_last = n_steps;
  sol.grid.resize(k_last + 1);
  sol.w.resize(k_last + 1);
  sol.u.resize(k_last + 1);
  for (int k = 0; k <= k_last; ++k) {
    sol.grid[k] = p.horizon * (static_cast<double>(k) / k_last);
    sol.w[k] = by_tau[k_last - k];
    sol.u[k] = sol.w[k].log_components();
  }
  sol.u[k_last] = p.terminal_rewards;  // terminal condition, exact
  return sol;
}

namespace detail {

// Linear interpolation of u in t; exact at grid points.
inline std::vector<double> interpolate_u(const ValueSolution& sol, double t) {
  const auto& grid = sol.grid;
  if (!(t >= grid.front() && t <= grid.back()))
    fail(errc::out_of_range, "t = " + std::to_string(t));
  if (t == grid.back()) return sol.u.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const size_t k = static_cast<size_t>(it - grid.begin()) - 1;
  const double theta = (t - grid[k]) / (grid[k + 1] - grid[k]);
  if (theta == 0.0) return sol.u[k];
  std::vector<double> u(sol.u[k].size());
  for (size_t i = 0; i < u.size(); ++i)
    u[i] = (1.0 - theta) * sol.u[k][i] + theta * sol.u[k + 1][i];
  return u;
}

inline std::vector<double> feedback_rates(const GraphProblem& p, NodeId i,
                                          const std::vector<double>& u) {
  const auto& nbrs = p.neighborhoods[i];
  std::vector<double> rates(nbrs.size());
  for (size_t k = 0; k < nbrs.size(); ++k)
    rates[k] = std::exp(-1.0 - p.edge_offsets[i][k] + u[nbrs[k]] - u[i]);
  return rates;
}

}  // namespace detail

// Optimal feedback intensities rate(t, i, j) = e^{-1-b_ij} w_j(t)/w_i(t),
// evaluated through u with linear-in-t interpolation between grid points.
inline EdgeValues optimal_policy_at(const ValueSolution& sol, const GraphProblem& p, double t) {
  const std::vector<double> u = detail::interpolate_u(sol, t);
  EdgeValues rates(p.n_nodes);
  for (int i = 0; i < p.n_nodes; ++i) rates[i] = detail::feedback_rates(p, i, u);
  return rates;
}

// Max over interior grid points and nodes of the Hamilton-Jacobi defect
// |du_i/dt + r(i) + sum_j e^{-1-b_ij} e^{u_j - u_i}| with central-difference
// du/dt. O(grid^2) for correct solutions, large under corruption.
inline double hj_residual(const ValueSolution& sol, const GraphProblem& p) {
  const size_t n_points = sol.grid.size();
  double worst = 0.0;
  for (size_t k = 1; k + 1 < n_points; ++k) {
    const double inv_2dt = 1.0 / (sol.grid[k + 1] - sol.grid[k - 1]);
    const auto& u = sol.u[k];
    for (int i = 0; i < p.n_nodes; ++i) {
      const double dudt = (sol.u[k + 1][i] - sol.u[k - 1][i]) * inv_2dt;
      double defect = dudt + p.rewards[i];
      const auto& nbrs = p.neighborhoods[i];
      for (size_t e = 0; e < nbrs.size(); ++e)
        defect += std::exp(-1.0 - p.edge_offsets[i][e] + u[nbrs[e]] - u[i]);
      worst = std::max(worst, std::abs(defect));
    }
  }
  return worst;
}

// Time/state-dependent intensity assignment. rates(t, i) is aligned with the
// neighborhood order of node i.
class IntensityPolicy {
 public:
  virtual ~IntensityPolicy() = default;
  virtual std::vector<double> rates(double t, NodeId i) const = 0;
};

// Closed-form optimal policy backed by a ValueSolution. Holds references;
// both the solution and the problem must outlive the policy.
class OptimalFeedbackPolicy final : public IntensityPolicy {
 public:
  OptimalFeedbackPolicy(const ValueSolution& sol, const GraphProblem& p) : sol_(&sol), p_(&p) {}

  std::vector<double> rates(double t, NodeId i) const override {
    return detail::feedback_rates(*p_, i, detail::interpolate_u(*sol_, t));
  }

 private:
  const ValueSolution* sol_;
  const GraphProblem* p_;
};

class ConstantIntensityPolicy final : public IntensityPolicy {
 public:
  explicit ConstantIntensityPolicy(EdgeValues rates) : rates_(std::move(rates)) {}

  static ConstantIntensityPolicy zero(const GraphProblem& p) {
    EdgeValues rates(p.n_nodes);
    for (int i = 0; i < p.n_nodes; ++i) rates[i].assign(p.neighborhoods[i].size(), 0.0);
    return ConstantIntensityPolicy(std::move(rates));
  }

  std::vector<double> rates(double, NodeId i) const override { return rates_[i]; }
  const EdgeValues& edge_rates() const { return rates_; }

 private:
  EdgeValues rates_;
};

}  // namespace lsoc
