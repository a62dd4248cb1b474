#pragma once

#include "gtlproco/formula.hpp"
#include "gtlproco/graph.hpp"

#include <optional>

namespace gtlproco {

/*
 * Finite prefix of a swarm density trajectory plus an optional loop index.
 * x[s][t] holds the density of sub-swarm s at time t for t = 0..k_p.
 * With loop_index = l_p the trajectory continues periodically: label values
 * at time k_p coincide with those at l_p - 1 and the suffix repeats with
 * period k_p - l_p + 1.
 */
struct GraphTrajectory {
  std::vector<std::vector<Eigen::VectorXd>> x; /* [s][t] */
  std::optional<int> loop_index;

  int k_p() const { return static_cast<int>(x.at(0).size()) - 1; }
  int sub_swarm_count() const { return static_cast<int>(x.size()); }
  int period() const { return k_p() - *loop_index + 1; }

  /* canonical time index in [0, k_p] representing time t >= 0 */
  long fold(long t) const;

  Eigen::VectorXd stacked(long t) const;
  Eigen::VectorXd label_value(const LabeledGraph &g, NodeId v, long t) const;

  /*
   * Checks shape, simplex membership of every density (1e-9) and, when a
   * loop index is set, the label periodicity condition within tol.
   */
  void validate(const LabeledGraph &g, double tol = 1e-7) const;
};

/* Trajectory realized by a plan from a start state: x(t+1) = M(t) x(t). */
GraphTrajectory rollout(const LabeledGraph &g, const MarkovPlan &plan,
                        const DensityState &x0);

/*
 * Exact verdict of formula phi at (node, t) over the infinite trajectory
 * induced by the lasso. Unbounded temporal operators require a loop index.
 * atom_slack relaxes every lowered atom row a.y <= b to a.y <= b + slack.
 */
bool evaluate(const LabeledGraph &g, const GraphTrajectory &traj,
              const Formula &phi, NodeId node, long t = 0,
              double atom_slack = 0.0);

/* evaluate at every node of the set (conjunction) */
bool evaluate_all(const LabeledGraph &g, const GraphTrajectory &traj,
                  const Formula &phi, const NodeSet &nodes, long t = 0,
                  double atom_slack = 0.0);

/*
 * Exhaustive search for a satisfying lasso trajectory whose densities all
 * lie on the uniform grid {0, 1/res, ..., 1} of the simplex. Dynamics are
 * ignored: this answers the same trajectory-existence question the MILP
 * encoding poses. Guard rails: n_r <= 4, k_p <= 5, res <= 5 and a cap on
 * the total enumeration size. If x0 is given, the search pins x(0) to it.
 */
std::optional<GraphTrajectory>
brute_force_witness(const LabeledGraph &g, const Formula &phi,
                    const NodeSet &nodes, int k_p, int resolution,
                    const std::optional<DensityState> &x0 = std::nullopt);

bool brute_force_satisfiable(const LabeledGraph &g, const Formula &phi,
                             const NodeSet &nodes, int k_p, int resolution,
                             const std::optional<DensityState> &x0 =
                                 std::nullopt);

} // namespace gtlproco
