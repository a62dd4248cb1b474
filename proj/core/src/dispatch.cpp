#include "gtlproco/spectral.hpp"
#include "synth_common.hpp"

namespace gtlproco {

std::string to_string(SynthStatus s) {
  switch (s) {
  case SynthStatus::Success: return "success";
  case SynthStatus::Infeasible: return "infeasible";
  case SynthStatus::InaccurateLocalSolution: return "inaccurate-local-solution";
  case SynthStatus::TimeLimit: return "time-limit";
  case SynthStatus::NumericalTrouble: return "numerical-trouble";
  }
  return "unknown";
}

bool CostSpec::empty() const {
  return density_coeff.empty() && matrix_coeff.empty() && !loop_cost;
}

void CostSpec::validate(const LabeledGraph &g) const {
  const int m = g.sub_swarm_count();
  const int n = g.node_count();
  if (!density_coeff.empty()) {
    if (static_cast<int>(density_coeff.size()) != m)
      throw input_error("density cost needs one vector per sub-swarm");
    for (const auto &c : density_coeff)
      if (c.size() != n)
        throw input_error("density cost vector has the wrong dimension");
  }
  if (!matrix_coeff.empty()) {
    if (static_cast<int>(matrix_coeff.size()) != m)
      throw input_error("matrix cost needs one matrix per sub-swarm");
    for (const auto &c : matrix_coeff)
      if (c.rows() != n || c.cols() != n)
        throw input_error("matrix cost has the wrong dimension");
  }
}

double ReachAvoidSpec::weight(int s) const {
  if (weights.size() == 0) return 1.0;
  return weights(s);
}

void ReachAvoidSpec::validate(const LabeledGraph &g) const {
  const int m = g.sub_swarm_count();
  const int n = g.node_count();
  if (static_cast<int>(nu.size()) != m)
    throw input_error("one target distribution per sub-swarm is required");
  for (const auto &v : nu) {
    if (v.size() != n)
      throw input_error("target distribution has the wrong dimension");
    if (v.minCoeff() < 0.0 || std::abs(v.sum() - 1.0) > 1e-9)
      throw input_error("target distribution must lie on the simplex");
  }
  for (const auto &blk : safety) {
    if (blk.A.cols() != static_cast<Eigen::Index>(m) * n)
      throw input_error("safety block must act on the stacked densities");
    if (blk.A.rows() != blk.b.size())
      throw input_error("safety block row count mismatch");
  }
  if (weights.size() != 0) {
    if (static_cast<int>(weights.size()) != m)
      throw input_error("one convergence weight per sub-swarm is required");
    if (weights.minCoeff() < 0.0)
      throw input_error("convergence weights must be nonnegative");
  }
}

void TrustRegionParams::validate() const {
  if (lambda <= 0.0) throw input_error("slack penalty must be positive");
  if (r0 <= 0.0 || r_min <= 0.0 || r_min >= r0)
    throw input_error("trust radii must satisfy 0 < r_min < r0");
  if (r_exp <= 1.0 || r_con <= 1.0)
    throw input_error("trust scaling factors must exceed 1");
  if (eps_tol <= 0.0 || eps_acc <= 0.0)
    throw input_error("tolerances must be positive");
  if (max_passes < 1) throw input_error("at least one pass is required");
}

void ProblemInstance::validate() const {
  if (k_p < 1) throw input_error("the trajectory length must be at least 1");
  x0.validate();
  if (static_cast<int>(x0.x.size()) != graph.sub_swarm_count())
    throw input_error("initial state sub-swarm count mismatch");
  for (const auto &v : x0.x)
    if (v.size() != graph.node_count())
      throw input_error("initial state dimension mismatch");
  cost.validate(graph);
  for (const auto &r : requirements) {
    if (!r.phi) throw input_error("requirement formula is missing");
    if (r.nodes.empty()) throw input_error("requirement node set is empty");
    for (NodeId v : r.nodes)
      if (v < 0 || v >= graph.node_count())
        throw input_error("requirement node out of range");
  }
  if (reach_avoid) reach_avoid->validate(graph);
}

double bilinear_error(const MarkovPlan &plan, const GraphTrajectory &traj) {
  double gap = 0.0;
  for (std::size_t s = 0; s < traj.x.size(); ++s)
    for (std::size_t t = 0; t + 1 < traj.x[s].size(); ++t)
      gap = std::max(gap, (traj.x[s][t + 1] -
                           plan.matrix(static_cast<int>(s), static_cast<int>(t)) *
                               traj.x[s][t])
                              .lpNorm<Eigen::Infinity>());
  return gap;
}

SynthesisResult gtlproco_dispatch(const ProblemInstance &prob,
                                  const SynthOptions &opts) {
  prob.validate();
  if (prob.reach_avoid) {
    bool scrambling = true;
    for (int s = 0; s < prob.graph.sub_swarm_count(); ++s)
      scrambling = scrambling && is_scrambling(prob.graph.adjacency(s));
    if (scrambling)
      return synthesize_reach_avoid_lp(prob.graph, prob.x0, *prob.reach_avoid,
                                       prob.cost, opts);
    return synthesize_reach_avoid_spectral(prob.graph, prob.x0,
                                           *prob.reach_avoid, prob.cost, opts);
  }
  bool complete = true;
  for (int s = 0; s < prob.graph.sub_swarm_count(); ++s)
    complete = complete && prob.graph.is_complete(s);
  if (complete)
    return synthesize_complete_graph(prob.graph, prob.x0, prob.requirements,
                                     prob.k_p, prob.cost, opts);
  return synthesize_general(prob.graph, prob.x0, prob.requirements, prob.k_p,
                            prob.cost, opts);
}

Model build_export_model(const ProblemInstance &prob,
                         const SynthOptions &opts) {
  prob.validate();
  if (prob.reach_avoid)
    throw input_error(
        "reach-avoid instances are solved directly and cannot be exported");
  bool complete = true;
  for (int s = 0; s < prob.graph.sub_swarm_count(); ++s)
    complete = complete && prob.graph.is_complete(s);
  ConstraintSystem cs(prob.graph, prob.k_p);
  if (complete)
    detail::assemble_complete_model(cs, prob.x0, prob.requirements, prob.cost,
                                    opts);
  else
    detail::assemble_mccormick_model(cs, prob.x0, prob.requirements, prob.cost,
                                     opts);
  return std::move(cs.model());
}

} // namespace gtlproco
