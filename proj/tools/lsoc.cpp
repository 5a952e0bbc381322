// Command-line front end: solve, ergodic, simulate, check.
//
// Exit codes: 0 success, 1 domain error (validation, solver, or file
// problems), 2 usage error. Artifacts are written via temp file + rename so
// a failing command never leaves a partially written file behind.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsoc/lsoc.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) lsoc::fail(lsoc::errc::io, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const fs::path& target, const std::string& content) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      lsoc::fail(lsoc::errc::io, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    lsoc::fail(lsoc::errc::io, "cannot rename into " + target.string());
  }
}

// shortest decimal representation that round-trips
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

lsoc::GraphProblem load_problem_file(const std::string& path) {
  return lsoc::load_problem(read_file(path));
}

int pick_steps(const lsoc::GraphProblem& p, int requested) {
  return requested > 0 ? requested : lsoc::default_n_steps(p);
}

int run_solve(const std::string& problem_file, int steps, const std::string& out_prefix) {
  const lsoc::GraphProblem p = load_problem_file(problem_file);
  const lsoc::ValueSolution sol = lsoc::solve_value_function(p, pick_steps(p, steps));

  std::ostringstream value_csv;
  value_csv << "t";
  for (int i = 0; i < p.n_nodes; ++i) value_csv << ",u_" << i;
  value_csv << "\n";
  for (size_t k = 0; k < sol.grid.size(); ++k) {
    value_csv << fmt(sol.grid[k]);
    for (int i = 0; i < p.n_nodes; ++i) value_csv << "," << fmt(sol.u[k][i]);
    value_csv << "\n";
  }

  std::ostringstream policy_csv;
  policy_csv << "t,from,to,lambda\n";
  for (size_t k = 0; k < sol.grid.size(); ++k) {
    const lsoc::EdgeValues rates = lsoc::optimal_policy_at(sol, p, sol.grid[k]);
    for (int i = 0; i < p.n_nodes; ++i)
      for (size_t e = 0; e < rates[i].size(); ++e)
        policy_csv << fmt(sol.grid[k]) << "," << i << "," << p.neighborhoods[i][e] << ","
                   << fmt(rates[i][e]) << "\n";
  }

  write_atomic(out_prefix + "_value.csv", value_csv.str());
  write_atomic(out_prefix + "_policy.csv", policy_csv.str());
  std::cout << "wrote " << out_prefix << "_value.csv and " << out_prefix << "_policy.csv ("
            << sol.grid.size() << " grid points)\n";
  return 0;
}

int run_ergodic(const std::string& problem_file, const std::string& out_prefix) {
  const lsoc::GraphProblem p = load_problem_file(problem_file);
  const lsoc::ErgodicResult e = lsoc::analyze_ergodic(p);

  nlohmann::ordered_json doc;
  doc["gamma"] = e.gamma;
  doc["alpha"] = e.alpha;
  doc["f"] = e.f;
  doc["phi"] = e.phi;
  doc["sigma"] = e.sigma;
  auto lam = nlohmann::ordered_json::array();
  for (int i = 0; i < p.n_nodes; ++i)
    for (size_t k = 0; k < p.neighborhoods[i].size(); ++k) {
      nlohmann::ordered_json entry;
      entry["from"] = i;
      entry["to"] = p.neighborhoods[i][k];
      entry["lambda"] = e.asymptotic_intensities[i][k];
      lam.push_back(std::move(entry));
    }
  doc["lambda_inf"] = std::move(lam);

  write_atomic(out_prefix + "_ergodic.json", doc.dump(2) + "\n");
  std::cout << "gamma = " << fmt(e.gamma) << ", alpha = " << fmt(e.alpha) << ", sigma = "
            << fmt(e.sigma) << "\nwrote " << out_prefix << "_ergodic.json\n";
  return 0;
}

int run_simulate(const std::string& problem_file, const std::string& policy_spec, int start,
                 long n_paths, std::uint64_t seed, int steps, const std::string& out_prefix) {
  const lsoc::GraphProblem p = load_problem_file(problem_file);
  const int n_time_steps = steps > 0 ? steps : lsoc::default_time_steps(p);

  lsoc::SimulationEstimate est;
  double optimal_value = 0.0;
  bool have_optimal = false;
  if (policy_spec == "optimal") {
    const lsoc::ValueSolution sol = lsoc::solve_value_function(p, lsoc::default_n_steps(p));
    const lsoc::OptimalFeedbackPolicy pol(sol, p);
    est = lsoc::estimate_objective(p, pol, start, n_paths, seed, n_time_steps);
    optimal_value = sol.u.front()[start];
    have_optimal = true;
  } else if (policy_spec.rfind("constant:", 0) == 0) {
    const std::string path = policy_spec.substr(9);
    const lsoc::EdgeValues rates = lsoc::load_constant_policy(read_file(path), p);
    const lsoc::ConstantIntensityPolicy pol(rates);
    est = lsoc::estimate_objective(p, pol, start, n_paths, seed, n_time_steps);
  } else {
    lsoc::fail(lsoc::errc::parse, "policy must be \"optimal\" or \"constant:<file>\"");
  }

  nlohmann::ordered_json doc;
  doc["mean"] = est.mean;
  doc["stderr"] = est.std_error;
  doc["n_paths"] = est.n_paths;
  doc["seed"] = est.master_seed;
  write_atomic(out_prefix + "_sim.json", doc.dump(2) + "\n");

  std::cout << "mean = " << fmt(est.mean) << ", stderr = " << fmt(est.std_error) << " ("
            << est.n_paths << " paths)\n";
  if (have_optimal) {
    std::cout << "value u_" << start << "(0) = " << fmt(optimal_value)
              << ", |mean - value| = " << fmt(std::abs(est.mean - optimal_value))
              << ", 3*stderr = " << fmt(3.0 * est.std_error) << "\n";
  }
  std::cout << "wrote " << out_prefix << "_sim.json\n";
  return 0;
}

// A priori bound on the central-difference defect of an exact solution:
// chained derivative bounds of the right-hand side give |u'''| <= R3, so the
// defect is at most dt^2/6 * R3 plus a rounding floor.
double residual_bound(const lsoc::ValueSolution& sol, const lsoc::GraphProblem& p) {
  double max_rate = 0.0;
  for (size_t k = 0; k < sol.grid.size(); ++k) {
    for (int i = 0; i < p.n_nodes; ++i) {
      double total = 0.0;
      const auto& nbrs = p.neighborhoods[i];
      for (size_t e = 0; e < nbrs.size(); ++e)
        total += std::exp(-1.0 - p.edge_offsets[i][e] + sol.u[k][nbrs[e]] - sol.u[k][i]);
      max_rate = std::max(max_rate, total);
    }
  }
  double max_abs_r = 0.0;
  for (double r : p.rewards) max_abs_r = std::max(max_abs_r, std::abs(r));
  const double r1 = max_abs_r + max_rate;            // |u'|
  const double r2 = 2.0 * max_rate * r1;             // |u''|
  const double r3 = max_rate * (2.0 * r2 + 4.0 * r1 * r1);  // |u'''|
  const double dt = sol.grid.size() > 1 ? sol.grid[1] - sol.grid[0] : 0.0;
  return dt * dt / 6.0 * r3 * 2.0 + 1e-8;
}

int run_check(const std::string& problem_file, int steps) {
  const lsoc::GraphProblem p = load_problem_file(problem_file);
  const int n = pick_steps(p, steps);
  const lsoc::ValueSolution sol = lsoc::solve_value_function(p, n);
  const lsoc::OracleSolution oracle = lsoc::integrate_hj_backward(p, n);
  const double deviation = lsoc::compare_solutions(sol, oracle);
  const double residual = lsoc::hj_residual(sol, p);
  const double bound = residual_bound(sol, p);

  std::cout << "closed form vs RK4 max deviation = " << fmt(deviation) << " (tolerance 1e-06)\n";
  std::cout << "HJ residual = " << fmt(residual) << " (bound " << fmt(bound) << ")\n";
  if (deviation > 1e-6) {
    std::cout << "FAIL: deviation exceeds tolerance\n";
    return 1;
  }
  if (residual > bound) {
    std::cout << "FAIL: residual exceeds grid bound\n";
    return 1;
  }
  std::cout << "OK\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entropy-cost optimal control on finite directed graphs"};
  app.require_subcommand(1);

  std::string problem_file, out_prefix = "out", policy_spec = "optimal";
  int steps = 0, start = 0;
  long n_paths = 10000;
  std::uint64_t seed = 1;

  CLI::App* solve = app.add_subcommand("solve", "value function and optimal policy to CSV");
  solve->add_option("problem", problem_file, "problem document (JSON)")->required();
  solve->add_option("--steps", steps, "time grid steps (0 = auto)");
  solve->add_option("--out", out_prefix, "output file prefix");

  CLI::App* ergodic = app.add_subcommand("ergodic", "ergodic constant and asymptotic policy");
  ergodic->add_option("problem", problem_file, "problem document (JSON)")->required();
  ergodic->add_option("--out", out_prefix, "output file prefix");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the objective");
  simulate->add_option("problem", problem_file, "problem document (JSON)")->required();
  simulate->add_option("--policy", policy_spec, "optimal | constant:<file>");
  simulate->add_option("--start", start, "start node");
  simulate->add_option("--paths", n_paths, "number of simulated paths");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--steps", steps, "simulation time steps (0 = auto)");
  simulate->add_option("--out", out_prefix, "output file prefix");

  CLI::App* check = app.add_subcommand("check", "cross-validate closed form against RK4");
  check->add_option("problem", problem_file, "problem document (JSON)")->required();
  check->add_option("--steps", steps, "time grid steps (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) return run_solve(problem_file, steps, out_prefix);
    if (ergodic->parsed()) return run_ergodic(problem_file, out_prefix);
    if (simulate->parsed())
      return run_simulate(problem_file, policy_spec, start, n_paths, seed, steps, out_prefix);
    if (check->parsed()) return run_check(problem_file, steps);
  } catch (const lsoc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
