#pragma once

// Long-run analysis on strongly connected graphs. The largest real eigenvalue
// gamma of B is the ergodic constant; the associated positive right and left
// eigenvectors f and phi give the asymptotic shape of the value function,
//
//   u_i(0) - gamma T  ->  alpha + log f_i   as T -> infinity,
//
// and the limiting intensities e^{-1-b_ij} f_j / f_i. Computed by power
// iteration on the shifted nonnegative matrix B + sigma I, whose strictly
// positive diagonal makes it primitive.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lsoc/errors.hpp"
#include "lsoc/hjb.hpp"
#include "lsoc/numerics.hpp"
#include "lsoc/problem.hpp"

namespace lsoc {

struct ErgodicResult {
  double gamma = 0.0;             // ergodic constant, reward rate per unit time
  std::vector<double> f;          // right Perron vector, positive, max-norm 1
  std::vector<double> phi;        // left Perron vector, positive, max-norm 1
  double sigma = 0.0;             // shift used to make B + sigma I nonnegative
  double alpha = std::numeric_limits<double>::quiet_NaN();  // value-function offset
  EdgeValues asymptotic_intensities;  // limit of the optimal intensities
};

// sigma = 1 + max(0, -min_i r(i)): every diagonal of B + sigma*I is >= 1.
inline double choose_shift(const GraphProblem& p) {
  const double min_r = *std::min_element(p.rewards.begin(), p.rewards.end());
  return 1.0 + std::max(0.0, -min_r);
}

// Limiting intensities e^{-1-b_ij} f_j / f_i; invariant under rescaling of f.
inline EdgeValues asymptotic_policy(const GraphProblem& p, const ErgodicResult& e) {
  EdgeValues rates(p.n_nodes);
  for (int i = 0; i < p.n_nodes; ++i) {
    const auto& nbrs = p.neighborhoods[i];
    rates[i].resize(nbrs.size());
    for (size_t k = 0; k < nbrs.size(); ++k)
      rates[i][k] = std::exp(-1.0 - p.edge_offsets[i][k]) * e.f[nbrs[k]] / e.f[i];
  }
  return rates;
}

// Perron data of B for an explicit admissible shift (sigma > -min r).
inline ErgodicResult perron_data(const GraphProblem& p, double sigma, double tol = 1e-12,
                                 long max_iter = 1000000) {
  if (!strong_connectivity(p).strongly_connected)
    fail(errc::not_strongly_connected, "ergodic analysis needs a strongly connected graph");
  DenseMatrix shifted = build_generator_matrix(p).matrix;
  for (int i = 0; i < p.n_nodes; ++i) shifted(i, i) += sigma;

  const EigenPair right = power_iteration(shifted, tol, max_iter);
  const EigenPair left = power_iteration(transpose(shifted), tol, max_iter);

  ErgodicResult e;
  e.gamma = right.value - sigma;
  e.f = right.vector;
  e.phi = left.vector;
  e.sigma = sigma;
  e.asymptotic_intensities = asymptotic_policy(p, e);
  return e;
}

inline ErgodicResult perron_data(const GraphProblem& p) {
  return perron_data(p, choose_shift(p));
}

// alpha = log beta where e^g = beta f + h with h orthogonal to phi, i.e.
// beta = <phi, e^g> / <phi, f>. Assembled with a shared max-subtraction so
// large g cannot overflow.
inline double asymptotic_offset(const GraphProblem& p, const ErgodicResult& e) {
  const double shift = *std::max_element(p.terminal_rewards.begin(), p.terminal_rewards.end());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < p.n_nodes; ++i) {
    num += e.phi[i] * std::exp(p.terminal_rewards[i] - shift);
    den += e.phi[i] * e.f[i];
  }
  if (!(num > 0.0) || !(den > 0.0))
    fail(errc::internal, "Perron vectors lost positivity");
  return shift + std::log(num) - std::log(den);
}

// Full analysis: Perron data plus the offset.
inline ErgodicResult analyze_ergodic(const GraphProblem& p) {
  ErgodicResult e = perron_data(p);
  e.alpha = asymptotic_offset(p, e);
  return e;
}

}  // namespace lsoc
