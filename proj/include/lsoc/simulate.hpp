#pragma once

// Monte Carlo verification of the control objective: simulates the
// controlled continuous-time Markov chain under any intensity policy and
// estimates the expected payoff -int L dt + g(X_T). Time-varying policies
// are frozen on a uniform grid; within a step, competing-exponential jump
// sampling is exact for the frozen rates, so the only bias is the O(dt)
// freezing error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lsoc/errors.hpp"
#include "lsoc/hjb.hpp"
#include "lsoc/problem.hpp"

namespace lsoc {

struct PathRecord {
  std::vector<double> jump_times;  // strictly increasing, within [0, T]
  std::vector<NodeId> states;      // visited nodes, starting at i0
  double running_cost = 0.0;       // accumulated integral of L
  double terminal_reward = 0.0;    // g at the final state
  double objective = 0.0;          // -running_cost + terminal_reward
};

struct SimulationEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n_paths)
  long n_paths = 0;
  std::uint64_t master_seed = 0;
};

namespace detail {

// k-th output of a splitmix64 stream started at `master`; used to derive
// independent per-path seeds.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t k) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// 53-bit uniform in [0, 1); avoids distribution objects so streams are
// identical across standard library implementations.
inline double next_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Policy frozen on the simulation grid: per (step, node) the edge rates,
// their total, and the running cost rate. Shared across paths.
struct FrozenPolicy {
  int n_steps = 0;
  double dt = 0.0;
  double horizon = 0.0;
  std::vector<std::vector<std::vector<double>>> rates;  // [step][node][edge]
  std::vector<std::vector<double>> total;               // [step][node]
  std::vector<std::vector<double>> cost_rate;           // [step][node]
};

inline FrozenPolicy freeze_policy(const GraphProblem& p, const IntensityPolicy& pol,
                                  int n_steps) {
  FrozenPolicy f;
  f.n_steps = n_steps;
  f.horizon = p.horizon;
  f.dt = p.horizon / n_steps;
  f.rates.resize(n_steps);
  f.total.resize(n_steps);
  f.cost_rate.resize(n_steps);
  for (int s = 0; s < n_steps; ++s) {
    const double t = s * f.dt;
    f.rates[s].resize(p.n_nodes);
    f.total[s].resize(p.n_nodes);
    f.cost_rate[s].resize(p.n_nodes);
    for (int i = 0; i < p.n_nodes; ++i) {
      std::vector<double> r = pol.rates(t, i);
      if (r.size() != p.neighborhoods[i].size())
        fail(errc::size_mismatch, "policy rates for node " + std::to_string(i));
      double sum = 0.0;
      for (double v : r) {
        if (!std::isfinite(v) || v < 0.0)
          fail(errc::non_finite_intensity, "node " + std::to_string(i));
        sum += v;
      }
      f.total[s][i] = sum;
      f.cost_rate[s][i] = running_cost_rate(p, i, r);
      f.rates[s][i] = std::move(r);
    }
  }
  return f;
}

inline PathRecord run_path(const GraphProblem& p, const FrozenPolicy& f, NodeId i0,
                           std::mt19937_64& gen) {
  PathRecord rec;
  rec.states.push_back(i0);
  NodeId node = i0;
  double cost = 0.0;
  double now = 0.0;
  for (int s = 0; s < f.n_steps; ++s) {
    const double step_end = (s + 1 == f.n_steps) ? f.horizon : (s + 1) * f.dt;
    while (now < step_end) {
      const double total = f.total[s][node];
      const double lrate = f.cost_rate[s][node];
      if (total <= 0.0) {  // absorbed for the rest of the step
        cost += lrate * (step_end - now);
        now = step_end;
        break;
      }
      double u = next_uniform(gen);
      if (u == 0.0) u = 0x1.0p-53;
      const double wait = -std::log1p(-u) / total;
      if (now + wait >= step_end) {
        cost += lrate * (step_end - now);
        now = step_end;
        break;
      }
      cost += lrate * wait;
      now += wait;
      // competing exponentials: destination proportional to its rate
      const double target = next_uniform(gen) * total;
      const auto& rates = f.rates[s][node];
      NodeId next = -1;
      double cum = 0.0;
      for (size_t e = 0; e < rates.size(); ++e) {
        if (rates[e] <= 0.0) continue;
        cum += rates[e];
        next = p.neighborhoods[node][e];
        if (target < cum) break;
      }
      rec.jump_times.push_back(now);
      rec.states.push_back(next);
      node = next;
    }
  }
  rec.running_cost = cost;
  rec.terminal_reward = p.terminal_rewards[node];
  rec.objective = -cost + rec.terminal_reward;
  return rec;
}

}  // namespace detail

// Default simulation resolution: 1e4 steps per unit horizon, capped at 1e6.
inline int default_time_steps(const GraphProblem& p) {
  const double suggested = std::ceil(1e4 * p.horizon);
  return static_cast<int>(std::min(1e6, std::max(1.0, suggested)));
}

inline PathRecord sample_path(const GraphProblem& p, const IntensityPolicy& pol, NodeId i0,
                              std::uint64_t seed, int n_time_steps) {
  if (i0 < 0 || i0 >= p.n_nodes) fail(errc::index_out_of_range, "start node");
  if (n_time_steps < 1) fail(errc::precondition_violated, "n_time_steps must be positive");
  const detail::FrozenPolicy frozen = detail::freeze_policy(p, pol, n_time_steps);
  std::mt19937_64 gen(seed);
  return detail::run_path(p, frozen, i0, gen);
}

// Mean and standard error of the objective over independent paths. Path k
// uses the deterministic seed split_seed(master_seed, k), so results are
// reproducible bit for bit and independent of how paths are scheduled.
inline SimulationEstimate estimate_objective(const GraphProblem& p, const IntensityPolicy& pol,
                                             NodeId i0, long n_paths,
                                             std::uint64_t master_seed, int n_time_steps) {
  if (i0 < 0 || i0 >= p.n_nodes) fail(errc::index_out_of_range, "start node");
  if (n_paths < 2) fail(errc::precondition_violated, "need at least 2 paths");
  if (n_time_steps < 1) fail(errc::precondition_violated, "n_time_steps must be positive");
  const detail::FrozenPolicy frozen = detail::freeze_policy(p, pol, n_time_steps);

  std::vector<double> objectives(static_cast<size_t>(n_paths));
  auto worker = [&](long begin, long end) {
    for (long k = begin; k < end; ++k) {
      std::mt19937_64 gen(detail::split_seed(master_seed, static_cast<std::uint64_t>(k)));
      objectives[static_cast<size_t>(k)] = detail::run_path(p, frozen, i0, gen).objective;
    }
  };

  const unsigned hw = std::thread::hardware_concurrency();
  const long n_threads = std::min<long>(std::max(1u, hw), std::min<long>(n_paths, 8));
  if (n_threads <= 1) {
    worker(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n_paths + n_threads - 1) / n_threads;
    for (long t = 0; t < n_threads; ++t) {
      const long begin = t * chunk;
      const long end = std::min(n_paths, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // fixed-index reduction keeps the result independent of thread scheduling
  double mean = 0.0;
  for (double x : objectives) mean += x;
  mean /= static_cast<double>(n_paths);
  double ss = 0.0;
  for (double x : objectives) ss += (x - mean) * (x - mean);
  const double sample_var = ss / static_cast<double>(n_paths - 1);
  SimulationEstimate est;
  est.mean = mean;
  est.std_error = std::sqrt(sample_var / static_cast<double>(n_paths));
  est.n_paths = n_paths;
  est.master_seed = master_seed;
  return est;
}

// Deterministic value of a constant policy: RK4 on the linear policy
// evaluation ODE dV_i/dt = L(i, rates_i) - sum_j rate_ij (V_j - V_i),
// backward from V(T) = g. Returns V(0), the expected objective per start
// node; dominated componentwise by the optimal value function.
inline std::vector<double> evaluate_fixed_policy(const GraphProblem& p, const EdgeValues& rates,
                                                 int n_steps = 0) {
  if (rates.size() != static_cast<size_t>(p.n_nodes))
    fail(errc::size_mismatch, "one rate vector per node expected");
  double max_total = 0.0;
  std::vector<double> cost(p.n_nodes);
  for (int i = 0; i < p.n_nodes; ++i) {
    if (rates[i].size() != p.neighborhoods[i].size())
      fail(errc::size_mismatch, "rates for node " + std::to_string(i));
    double total = 0.0;
    for (double v : rates[i]) {
      if (!std::isfinite(v) || v < 0.0) fail(errc::non_finite_intensity, std::to_string(i));
      total += v;
    }
    max_total = std::max(max_total, total);
    cost[i] = running_cost_rate(p, i, rates[i]);
  }
  if (n_steps <= 0)
    n_steps = std::max(1000, static_cast<int>(std::ceil(100.0 * p.horizon * (1.0 + max_total))));

  const int n = p.n_nodes;
  const double h = -p.horizon / n_steps;
  auto rhs = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (int i = 0; i < n; ++i) {
      double acc = cost[i];
      const auto& nbrs = p.neighborhoods[i];
      for (size_t e = 0; e < nbrs.size(); ++e)
        acc -= rates[i][e] * (v[nbrs[e]] - v[i]);
      out[i] = acc;
    }
  };

  std::vector<double> v = p.terminal_rewards;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (int s = 0; s < n_steps; ++s) {
    rhs(v, k1);
    for (int i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (int i = 0; i < n; ++i) tmp[i] = v[i] + h * k3[i];
    rhs(tmp, k4);
    for (int i = 0; i < n; ++i) {
      v[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(v[i])) fail(errc::non_finite, "policy evaluation blew up");
    }
  }
  return v;
}

}  // namespace lsoc
