#pragma once

#include "gtlproco/constraint_system.hpp"
#include "gtlproco/encoder.hpp"
#include "gtlproco/synthesis.hpp"

namespace gtlproco {
namespace detail {

/* Registry of M^s(t) variables restricted to the motion support. */
struct MatrixVars {
  /* idx[s][t](i, j) holds the model variable index, or -1 off-support */
  std::vector<std::vector<Eigen::MatrixXi>> idx;

  int at(int s, int t, int i, int j) const { return idx[s][t](i, j); }
  int steps() const { return static_cast<int>(idx.at(0).size()); }
};

/*
 * Adds M^s(t) in [0,1] for every edge of the motion pattern (M_ij allowed
 * iff adj^s(j, i) != 0) plus the column-stochasticity rows. Throws if some
 * node has no outgoing edge in some sub-swarm.
 */
MatrixVars add_matrix_vars(Model &m, const LabeledGraph &g, int steps,
                           const std::string &prefix);

/* Raise the lower bound of every supported entry to the floor value. */
void raise_support_floor(Model &m, const MatrixVars &vars,
                         const LabeledGraph &g, double floor);

/* sum_v x^s_v(t) = 1 for every sub-swarm and time index */
void add_simplex_rows(ConstraintSystem &cs);

/* pin the t = 0 densities to the given start state */
void pin_initial_state(ConstraintSystem &cs, const DensityState &x0);

/*
 * Density periodicity at the loop: |x^s_v(k_p) - x^s_v(j-1)| <= 1 - l_j.
 * Makes rollouts of the extracted plan exactly periodic; the label ties
 * added by the loop encoding only constrain label values.
 */
void add_density_loop_ties(ConstraintSystem &cs);

/* objective contributions */
void add_density_cost(ConstraintSystem &cs, const CostSpec &cost);
void add_loop_cost(ConstraintSystem &cs, const CostSpec &cost);
void add_matrix_cost(Model &m, const MatrixVars &vars, const LabeledGraph &g,
                     const CostSpec &cost);

/*
 * Shared big-M over all requirements, loop encoding and one encode call
 * per requirement. Requires the loop not to be encoded yet. A positive
 * pinned_loop fixes the loop-back position, leaving no free binaries.
 */
void encode_requirements(ConstraintSystem &cs,
                         const std::vector<GtlRequirement> &reqs,
                         int pinned_loop = -1);

std::vector<std::vector<Eigen::VectorXd>>
extract_densities(ConstraintSystem &cs, const Eigen::VectorXd &sol);

int extract_loop_index(const ConstraintSystem &cs, const Eigen::VectorXd &sol);

std::vector<std::vector<Eigen::MatrixXd>>
extract_matrices(const MatrixVars &vars, const LabeledGraph &g, int steps,
                 const Eigen::VectorXd &sol);

/* numeric value of the linear cost at a candidate solution */
double cost_value(const CostSpec &cost,
                  const std::vector<std::vector<Eigen::VectorXd>> &x,
                  const std::vector<std::vector<Eigen::MatrixXd>> &M,
                  std::optional<int> loop_index);

/* single-requirement convenience wrapper */
std::vector<GtlRequirement> single_requirement(const Formula &phi,
                                               const NodeSet &nodes);

/*
 * Re-checks every requirement with the exact trajectory semantics. The
 * slack absorbs the round-off introduced by solving and re-normalising.
 */
bool verify_requirements(const LabeledGraph &g, const GraphTrajectory &traj,
                         const std::vector<GtlRequirement> &reqs, double slack);

/*
 * Complete model assembly for the two MILP paths, shared with the model
 * exporter: the density-only complete-graph program (matrix costs folded
 * as row sums on x(t+1)) and the McCormick-envelope relaxation used to
 * initialize the sequential MILP.
 */
void assemble_complete_model(ConstraintSystem &cs, const DensityState &x0,
                             const std::vector<GtlRequirement> &reqs,
                             const CostSpec &cost, const SynthOptions &opts);
void assemble_mccormick_model(ConstraintSystem &cs, const DensityState &x0,
                              const std::vector<GtlRequirement> &reqs,
                              const CostSpec &cost, const SynthOptions &opts);

/* map a solver status to a synthesis status for non-optimal outcomes */
SynthStatus from_solve_status(SolveStatus s);

} // namespace detail
} // namespace gtlproco
