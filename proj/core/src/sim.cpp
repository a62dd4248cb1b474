#include "gtlproco/sim.hpp"

#include "gtlproco/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace gtlproco {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

double CounterRng::uniform(int sub_swarm, long agent, long step) const {
  std::uint64_t h = mix64(seed ^ 0x5bf03635dce981e5ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(sub_swarm));
  h = mix64(h ^ static_cast<std::uint64_t>(agent));
  h = mix64(h ^ static_cast<std::uint64_t>(step));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<long> largest_remainder(long count, const Eigen::VectorXd &x) {
  if (count < 0) throw input_error("agent count must be nonnegative");
  const int n = static_cast<int>(x.size());
  std::vector<long> out(n, 0);
  std::vector<std::pair<double, int>> rem;
  long placed = 0;
  for (int v = 0; v < n; ++v) {
    const double target = std::max(0.0, x(v)) * static_cast<double>(count);
    out[v] = static_cast<long>(std::floor(target + 1e-12));
    placed += out[v];
    rem.push_back({target - static_cast<double>(out[v]), v});
  }
  std::sort(rem.begin(), rem.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (long k = 0; k < count - placed; ++k) ++out[rem[k % n].second];
  return out;
}

DensityState AgentPopulation::empirical() const {
  DensityState d;
  for (const auto &bins : bin) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(node_count);
    for (int b : bins) x(b) += 1.0;
    if (!bins.empty()) x /= static_cast<double>(bins.size());
    d.x.push_back(std::move(x));
  }
  return d;
}

AgentPopulation AgentPopulation::from_density(const DensityState &x0,
                                              const std::vector<long> &agents) {
  if (agents.size() != x0.x.size())
    throw input_error("one agent count per sub-swarm is required");
  AgentPopulation pop;
  pop.node_count = static_cast<int>(x0.x.at(0).size());
  for (std::size_t s = 0; s < x0.x.size(); ++s) {
    const auto counts = largest_remainder(agents[s], x0.x[s]);
    std::vector<int> bins;
    bins.reserve(agents[s]);
    for (int v = 0; v < pop.node_count; ++v)
      bins.insert(bins.end(), counts[v], v);
    pop.bin.push_back(std::move(bins));
  }
  return pop;
}

void step_agents(AgentPopulation &pop, const std::vector<Eigen::MatrixXd> &M,
                 const CounterRng &rng, long step) {
  if (M.size() != pop.bin.size())
    throw input_error("one matrix per sub-swarm is required");
  const int n = pop.node_count;
  for (std::size_t s = 0; s < M.size(); ++s) {
    const Eigen::MatrixXd &mat = M[s];
    if (mat.rows() != n || mat.cols() != n)
      throw input_error("transition matrix has the wrong dimension");
    for (int j = 0; j < n; ++j)
      if (std::abs(mat.col(j).sum() - 1.0) > 1e-9)
        throw input_error("transition matrix column " + std::to_string(j) +
                          " does not sum to 1");
    auto &bins = pop.bin[s];
    for (std::size_t a = 0; a < bins.size(); ++a) {
      const int i = bins[a];
      const double z =
          rng.uniform(static_cast<int>(s), static_cast<long>(a), step);
      double acc = 0.0;
      int next = -1;
      for (int j = 0; j < n; ++j) {
        const double p = mat(j, i);
        if (p <= 0.0) continue;
        acc += p;
        next = j;
        if (z <= acc) break;
      }
      if (next < 0)
        throw input_error("transition matrix column " + std::to_string(i) +
                          " has no positive entry");
      bins[a] = next;
    }
  }
}

SimulationTrace run_simulation(const LabeledGraph &g,
                               const std::vector<GtlRequirement> &reqs,
                               const MarkovPlan &plan, const DensityState &x0,
                               const SimulationOptions &opts) {
  plan.validate(g);
  x0.validate();
  if (static_cast<int>(x0.x.size()) != g.sub_swarm_count())
    throw input_error("start state has the wrong number of sub-swarms");
  const long horizon = opts.horizon < 0 ? plan.k_p : opts.horizon;
  if (horizon < 1) throw input_error("simulation horizon must be at least 1");
  if (horizon > plan.k_p && !plan.loop_index)
    throw input_error("plan has no loop index; cannot continue past its end");

  std::vector<long> agents = opts.agents;
  if (agents.empty()) agents.assign(x0.x.size(), 1000);
  if (agents.size() == 1) agents.assign(x0.x.size(), agents[0]);
  if (agents.size() != x0.x.size())
    throw input_error("one agent count per sub-swarm is required");
  for (long n : agents)
    if (n < 1) throw input_error("agent counts must be positive");

  SimulationTrace trace;
  const CounterRng rng{opts.seed};
  AgentPopulation pop = AgentPopulation::from_density(x0, agents);
  trace.empirical.push_back(pop.empirical());
  trace.planned.push_back(x0);
  for (long t = 0; t < horizon; ++t) {
    std::vector<Eigen::MatrixXd> Mt;
    for (int s = 0; s < g.sub_swarm_count(); ++s)
      Mt.push_back(plan.matrix_at(s, t));
    step_agents(pop, Mt, rng, t);
    trace.empirical.push_back(pop.empirical());
    DensityState next;
    for (int s = 0; s < g.sub_swarm_count(); ++s)
      next.x.push_back(Mt[s] * trace.planned.back().x[s]);
    trace.planned.push_back(std::move(next));
  }

  for (std::size_t t = 0; t < trace.empirical.size(); ++t) {
    double dev = 0.0;
    for (int s = 0; s < g.sub_swarm_count(); ++s)
      dev = std::max(dev, (trace.empirical[t].x[s] - trace.planned[t].x[s])
                              .lpNorm<Eigen::Infinity>());
    trace.deviation.push_back(dev);
    trace.max_deviation = std::max(trace.max_deviation, dev);
  }

  double inv = 0.0;
  for (long n : agents) inv = std::max(inv, 1.0 / static_cast<double>(n));
  trace.slack = opts.atom_slack >= 0.0 ? opts.atom_slack
                                       : inv + 3.0 * std::sqrt(inv);

  if (!reqs.empty() && horizon >= plan.k_p) {
    GraphTrajectory etraj;
    etraj.loop_index = plan.loop_index;
    etraj.x.resize(g.sub_swarm_count());
    for (int s = 0; s < g.sub_swarm_count(); ++s)
      for (int t = 0; t <= plan.k_p; ++t)
        etraj.x[s].push_back(trace.empirical[t].x[s]);
    for (const auto &r : reqs)
      for (NodeId v : r.nodes)
        trace.verdict =
            trace.verdict && evaluate(g, etraj, *r.phi, v, 0, trace.slack);
  }
  return trace;
}

void write_trace_csv(const SimulationTrace &trace, const std::string &path) {
  std::FILE *f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fputs("t,sub_swarm,bin,planned_density,empirical_density\n", f);
  for (std::size_t t = 0; t < trace.empirical.size(); ++t)
    for (std::size_t s = 0; s < trace.empirical[t].x.size(); ++s)
      for (int v = 0; v < trace.empirical[t].x[s].size(); ++v)
        std::fprintf(f, "%zu,%zu,%d,%.17g,%.17g\n", t, s, v,
                     trace.planned[t].x[s](v), trace.empirical[t].x[s](v));
  std::fclose(f);
}

} // namespace gtlproco
