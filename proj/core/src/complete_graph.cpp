#include "gtlproco/branch_bound.hpp"
#include "synth_common.hpp"

#include <chrono>

namespace gtlproco {

namespace {

double wall_seconds(const std::chrono::steady_clock::time_point &t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

} // namespace

SynthesisResult
synthesize_complete_graph(const LabeledGraph &g, const DensityState &x0,
                          const std::vector<GtlRequirement> &reqs, int k_p,
                          const CostSpec &cost, const SynthOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  if (k_p < 1) throw input_error("the trajectory length must be at least 1");
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    if (!g.is_complete(s))
      throw input_error("sub-swarm " + std::to_string(s) +
                        " graph is not complete; use the general path");
  cost.validate(g);

  /* density-only program: matrices are recovered from the trajectory */
  ConstraintSystem cs(g, k_p);
  detail::assemble_complete_model(cs, x0, reqs, cost, opts);

  SynthesisResult res;
  res.diagnostics.path = "complete-milp";
  Solution sol = solve_mip(cs.model(), opts.solve);
  res.status = detail::from_solve_status(sol.status);
  res.diagnostics.wall_time_sec = wall_seconds(t0);
  if (res.status != SynthStatus::Success) {
    res.diagnostics.message = "density program: " + to_string(sol.status);
    return res;
  }

  auto x = detail::extract_densities(cs, sol.x);
  const int loop = detail::extract_loop_index(cs, sol.x);
  for (auto &per : x) {
    for (auto &xt : per) sanitize_density(xt);
    if (opts.periodic_densities) per[k_p] = per[loop - 1];
  }

  /* M^s_ij(t) = x^s_i(t+1): rank-one extraction, exactly stochastic and
     exactly reproducing the dynamics */
  const int n = g.node_count();
  res.plan.k_p = k_p;
  res.plan.loop_index = loop;
  res.plan.M.resize(g.sub_swarm_count());
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    for (int t = 0; t < k_p; ++t)
      res.plan.M[s].push_back(x[s][t + 1] * Eigen::RowVectorXd::Ones(n));

  res.trajectory.x = std::move(x);
  res.trajectory.loop_index = loop;
  res.diagnostics.objective = sol.objective;
  res.diagnostics.bilinear_gap = bilinear_error(res.plan, res.trajectory);

  if (!detail::verify_requirements(g, res.trajectory, reqs, 1e-7)) {
    res.status = SynthStatus::NumericalTrouble;
    res.diagnostics.message =
        "solution trajectory failed the exact semantics re-check";
  }
  res.diagnostics.wall_time_sec = wall_seconds(t0);
  return res;
}

SynthesisResult synthesize_complete_graph(const LabeledGraph &g,
                                          const DensityState &x0,
                                          const Formula &phi,
                                          const NodeSet &nodes, int k_p,
                                          const CostSpec &cost,
                                          const SynthOptions &opts) {
  return synthesize_complete_graph(g, x0, detail::single_requirement(phi, nodes),
                                   k_p, cost, opts);
}

} // namespace gtlproco
