#pragma once

// Problem instances for continuous-time optimal control on a finite directed
// graph. The agent chooses nonnegative transition intensities on the edges;
// running cost at node i is
//
//   L(i, rates) = -r(i) + sum_j (rate_ij log rate_ij + b_ij rate_ij),
//
// with x log x extended by 0 at x = 0, plus a terminal reward g at horizon T.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lsoc/errors.hpp"

namespace lsoc {

using NodeId = int;

// Per-edge values aligned with GraphProblem::neighborhoods.
using EdgeValues = std::vector<std::vector<double>>;

struct GraphProblem {
  int n_nodes = 0;
  std::vector<std::vector<NodeId>> neighborhoods;  // out-neighbors, per node
  EdgeValues edge_offsets;                         // b_ij, aligned with neighborhoods
  std::vector<double> rewards;                     // r, length n_nodes
  std::vector<double> terminal_rewards;            // g, length n_nodes
  double horizon = 0.0;                            // T
};

inline int edge_count(const GraphProblem& p) {
  int total = 0;
  for (const auto& nbrs : p.neighborhoods) total += static_cast<int>(nbrs.size());
  return total;
}

// Checks every structural invariant and returns the instance unchanged.
inline const GraphProblem& validate_problem(const GraphProblem& p) {
  if (p.n_nodes < 2) fail(errc::size_mismatch, "n_nodes must be at least 2");
  const auto n = static_cast<size_t>(p.n_nodes);
  if (p.neighborhoods.size() != n || p.edge_offsets.size() != n)
    fail(errc::size_mismatch, "neighborhoods/edge_offsets must have one entry per node");
  if (p.rewards.size() != n || p.terminal_rewards.size() != n)
    fail(errc::size_mismatch, "r and g must have length n_nodes");
  if (!std::isfinite(p.horizon)) fail(errc::non_finite_value, "T");
  if (p.horizon <= 0.0) fail(errc::non_positive_horizon, "T = " + std::to_string(p.horizon));
  for (int i = 0; i < p.n_nodes; ++i) {
    if (!std::isfinite(p.rewards[i])) fail(errc::non_finite_value, "r[" + std::to_string(i) + "]");
    if (!std::isfinite(p.terminal_rewards[i]))
      fail(errc::non_finite_value, "g[" + std::to_string(i) + "]");
    const auto& nbrs = p.neighborhoods[i];
    if (p.edge_offsets[i].size() != nbrs.size())
      fail(errc::size_mismatch, "edge_offsets[" + std::to_string(i) + "]");
    std::vector<bool> seen(n, false);
    for (size_t k = 0; k < nbrs.size(); ++k) {
      const NodeId j = nbrs[k];
      if (j < 0 || j >= p.n_nodes)
        fail(errc::index_out_of_range,
             "edge " + std::to_string(i) + " -> " + std::to_string(j));
      if (j == i) fail(errc::self_loop, "node " + std::to_string(i));
      if (seen[static_cast<size_t>(j)])
        fail(errc::duplicate_edge, std::to_string(i) + " -> " + std::to_string(j));
      seen[static_cast<size_t>(j)] = true;
      if (!std::isfinite(p.edge_offsets[i][k]))
        fail(errc::non_finite_value,
             "b[" + std::to_string(i) + " -> " + std::to_string(j) + "]");
    }
  }
  return p;
}

struct ConnectivityReport {
  bool strongly_connected = false;
  std::vector<std::vector<NodeId>> components;  // partition of the nodes
};

// Tarjan's algorithm, iterative so deep graphs cannot overflow the call
// stack. Components are reported sorted internally and ordered by their
// smallest node.
inline ConnectivityReport strong_connectivity(const GraphProblem& p) {
  const int n = p.n_nodes;
  std::vector<int> index(n, -1), lowlink(n, 0), edge_pos(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> stack, call_stack;
  std::vector<std::vector<NodeId>> components;
  int next_index = 0;

  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call_stack.push_back(root);
    while (!call_stack.empty()) {
      const NodeId v = call_stack.back();
      if (index[v] == -1) {
        index[v] = lowlink[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool recursed = false;
      const auto& nbrs = p.neighborhoods[v];
      while (edge_pos[v] < static_cast<int>(nbrs.size())) {
        const NodeId w = nbrs[edge_pos[v]++];
        if (index[w] == -1) {
          call_stack.push_back(w);
          recursed = true;
          break;
        }
        if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
      }
      if (recursed) continue;
      call_stack.pop_back();
      if (!call_stack.empty()) {
        const NodeId parent = call_stack.back();
        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
      }
      if (lowlink[v] == index[v]) {
        std::vector<NodeId> comp;
        for (;;) {
          const NodeId w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
          if (w == v) break;
        }
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }

  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  ConnectivityReport report;
  report.strongly_connected = components.size() == 1;
  report.components = std::move(components);
  return report;
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Running cost rate L(i, rates); rates aligned with the neighborhood of i.
inline double running_cost_rate(const GraphProblem& p, NodeId i,
                                const std::vector<double>& rates) {
  double cost = -p.rewards[i];
  const auto& offsets = p.edge_offsets[i];
  for (size_t k = 0; k < rates.size(); ++k)
    cost += xlogx(rates[k]) + offsets[k] * rates[k];
  return cost;
}

}  // namespace lsoc
