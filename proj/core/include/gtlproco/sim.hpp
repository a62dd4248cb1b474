#pragma once

#include "gtlproco/synthesis.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gtlproco {

/*
 * Counter-based uniform stream: the draw for (sub-swarm, agent, step) is a
 * pure function of the key, so traces are reproducible regardless of agent
 * scheduling order.
 */
struct CounterRng {
  std::uint64_t seed = 0;

  /* one double in [0, 1) per (sub-swarm, agent, step) */
  double uniform(int sub_swarm, long agent, long step) const;
};

/* floor(count * x) plus one unit to the largest remainders, summing to count */
std::vector<long> largest_remainder(long count, const Eigen::VectorXd &x);

struct AgentPopulation {
  int node_count = 0;
  std::vector<std::vector<int>> bin; /* [s][agent] current bin index */

  int sub_swarm_count() const { return static_cast<int>(bin.size()); }
  DensityState empirical() const;

  /* apportion each sub-swarm's agents over x0 by largest remainder */
  static AgentPopulation from_density(const DensityState &x0,
                                      const std::vector<long> &agents);
};

/*
 * Advance every agent one step: agent in bin i samples its next bin from
 * column i of its sub-swarm matrix by inverse transform over z = U[0,1),
 * never selecting a zero-probability bin. The collision-avoidance stage of
 * the protocol is a no-op hook here.
 */
void step_agents(AgentPopulation &pop, const std::vector<Eigen::MatrixXd> &M,
                 const CounterRng &rng, long step);

struct SimulationOptions {
  std::vector<long> agents; /* per sub-swarm; a single entry is broadcast */
  std::uint64_t seed = 0;
  long horizon = -1;       /* < 0: use the plan length */
  double atom_slack = -1.0; /* < 0: use the quantization margin */
};

struct SimulationTrace {
  std::vector<DensityState> empirical; /* t = 0..horizon */
  std::vector<DensityState> planned;
  std::vector<double> deviation; /* max_s |empirical - planned|_inf per t */
  double max_deviation = 0.0;
  double slack = 0.0; /* atom slack used for the empirical verdict */
  bool verdict = true;
};

/*
 * Monte-Carlo execution of the guidance protocol: realizes x0 by largest
 * remainder, steps the population through the plan (reusing matrices
 * periodically past the plan length), and re-checks every requirement on
 * the empirical trajectory with the quantization slack
 * max_s 1/N_a^s + 3 max_s sqrt(1/N_a^s).
 */
SimulationTrace run_simulation(const LabeledGraph &g,
                               const std::vector<GtlRequirement> &reqs,
                               const MarkovPlan &plan, const DensityState &x0,
                               const SimulationOptions &opts = {});

/*
 * CSV with fixed header t,sub_swarm,bin,planned_density,empirical_density
 * and rows ordered lexicographically by (t, sub_swarm, bin).
 */
void write_trace_csv(const SimulationTrace &trace, const std::string &path);

} // namespace gtlproco
