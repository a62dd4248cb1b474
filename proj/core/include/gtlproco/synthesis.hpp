#pragma once

#include "gtlproco/formula.hpp"
#include "gtlproco/graph.hpp"
#include "gtlproco/model.hpp"
#include "gtlproco/monitor.hpp"

#include <memory>
#include <optional>

namespace gtlproco {

/* Linear objective over densities and matrix entries plus loop placement. */
struct CostSpec {
  /* coeff[s](v) multiplies x^s_v(t), summed over t = 0..k_p */
  std::vector<Eigen::VectorXd> density_coeff;
  /* coeff[s](i, j) multiplies M^s_ij(t), summed over t = 0..k_p-1 */
  std::vector<Eigen::MatrixXd> matrix_coeff;
  /* adds sum_j (j+1) l_j, preferring early loop-back positions */
  bool loop_cost = false;

  bool empty() const;
  void validate(const LabeledGraph &g) const;
};

/*
 * Target stationary distributions plus safety polytopes on stacked states.
 * Invariance is certified over {A x <= b} intersected with the per-sub-swarm
 * sum constraints only; nonnegativity is not assumed, so append -x <= 0 rows
 * to a block when the intended safe set is relative to the density simplex.
 */
struct ReachAvoidSpec {
  std::vector<Eigen::VectorXd> nu; /* one per sub-swarm, on the simplex */
  struct SafetyBlock {
    Eigen::MatrixXd A; /* p x (m * n_r) over [x^1; ...; x^m] */
    Eigen::VectorXd b; /* p */
  };
  std::vector<SafetyBlock> safety;
  Eigen::VectorXd weights; /* convergence weights c_s >= 0; empty = ones */

  double weight(int s) const;
  void validate(const LabeledGraph &g) const;
};

/*
 * Invariance witness per safety block: Y <= 0, Y b + S 1 >= -b and
 * Y A + S O <= -A diag(M^1, ..., M^m), which certify that A x(t) <= b
 * propagates from t to t+1 under the synthesized matrices.
 */
struct SafetyCertificate {
  std::vector<Eigen::MatrixXd> Y;
  std::vector<Eigen::MatrixXd> S;
  double max_violation = 0.0;
};

struct TrustRegionParams {
  double lambda = 10.0; /* slack penalty weight */
  double r_min = 1e-4;
  double r_exp = 1.5;
  double r_con = 1.5;
  double eps_tol = 1e-6; /* cost-change tolerance */
  double eps_acc = 1e-6; /* bilinear accuracy tolerance */
  double r0 = 2.0;
  bool inf_norm = false; /* slack-penalty/trust-region norm; default 1-norm */
  int max_passes = 100;  /* accepted plus rejected iterations */

  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double radius = 0.0;
  double linear_cost = 0.0; /* optimum of the linearized subproblem */
  double accuracy = 0.0;    /* bilinear residual f */
  double ratio = 0.0;       /* rho = f_new / f_old */
  bool accepted = false;
};

enum class SynthStatus {
  Success,
  Infeasible,
  InaccurateLocalSolution,
  TimeLimit,
  NumericalTrouble
};
std::string to_string(SynthStatus s);

struct SolverDiagnostics {
  std::string path; /* reach-avoid-lp | spectral | complete-milp | sequential-milp */
  std::vector<IterationRecord> log;
  double bilinear_gap = 0.0; /* max_{s,t} inf-norm dynamics residual */
  double objective = 0.0;
  double wall_time_sec = 0.0;
  std::string message;
};

struct SynthesisResult {
  SynthStatus status = SynthStatus::Infeasible;
  MarkovPlan plan;
  GraphTrajectory trajectory; /* certified density trajectory */
  SolverDiagnostics diagnostics;
  SafetyCertificate certificate;        /* reach-avoid paths */
  std::vector<double> ergodicity;       /* tau_1 per sub-swarm */
  std::vector<double> convergence_rate; /* reversibilization rate per sub-swarm */
};

/* One formula enforced at every node of the set, at time 0. */
struct GtlRequirement {
  std::unique_ptr<Formula> phi;
  NodeSet nodes;
};

struct SynthOptions {
  SolveOptions solve;
  TrustRegionParams trust;
  bool periodic_densities = true; /* tie x(k_p) to the loop-back state */
  int pinned_loop = -1;           /* fix the lasso loop-back position to this
                                     step (1..k_p); removes the loop binaries
                                     from the models, trading completeness of
                                     the search for pure-LP subproblems */
  double support_floor = 1e-3;    /* reach-avoid: M >= floor on the pattern */
  int spectral_max_iters = 200;
  double spectral_improve_tol = 1e-6;
};

struct ProblemInstance {
  LabeledGraph graph;
  DensityState x0;
  std::vector<GtlRequirement> requirements;
  int k_p = 1;
  CostSpec cost;
  std::optional<ReachAvoidSpec> reach_avoid;

  void validate() const;
};

/*
 * Time-invariant synthesis for reach-avoid requirements on scrambling
 * graphs: a single LP over M^s, the (Y, S) certificate and an exact
 * linearization of the ergodicity coefficients. Rejects non-scrambling
 * graphs (use the spectral path instead) and unsafe initial states.
 */
SynthesisResult synthesize_reach_avoid_lp(const LabeledGraph &g,
                                          const DensityState &x0,
                                          const ReachAvoidSpec &spec,
                                          const CostSpec &cost = {},
                                          const SynthOptions &opts = {});

/*
 * Time-invariant synthesis for reach-avoid requirements without the
 * scrambling property: sequential linearization of the convergence rate
 * |Q^-1 M Q - r r^T|_2^2 with a trust region and exact line search.
 * The reported rate sequence is monotonically non-increasing.
 */
SynthesisResult synthesize_reach_avoid_spectral(const LabeledGraph &g,
                                                const DensityState &x0,
                                                const ReachAvoidSpec &spec,
                                                const CostSpec &cost = {},
                                                const SynthOptions &opts = {});

/*
 * Complete-graph reduction: solve the density-only MILP, then read the
 * matrices off the trajectory as M^s_ij(t) = x^s_i(t+1). The resulting
 * plan reproduces the dynamics exactly.
 */
SynthesisResult synthesize_complete_graph(const LabeledGraph &g,
                                          const DensityState &x0,
                                          const std::vector<GtlRequirement> &reqs,
                                          int k_p, const CostSpec &cost = {},
                                          const SynthOptions &opts = {});
SynthesisResult synthesize_complete_graph(const LabeledGraph &g,
                                          const DensityState &x0,
                                          const Formula &phi,
                                          const NodeSet &nodes, int k_p,
                                          const CostSpec &cost = {},
                                          const SynthOptions &opts = {});

/* Densities of an optimal solution of the McCormick-relaxed MILP. */
struct RelaxedStart {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<std::vector<Eigen::VectorXd>> x; /* [s][t], t = 0..k_p */
  std::optional<int> loop_index;
  double objective = 0.0;
};
RelaxedStart mccormick_initialize(const LabeledGraph &g, const DensityState &x0,
                                  const std::vector<GtlRequirement> &reqs,
                                  int k_p, const CostSpec &cost = {},
                                  const SynthOptions &opts = {});
RelaxedStart mccormick_initialize(const LabeledGraph &g, const DensityState &x0,
                                  const Formula &phi, const NodeSet &nodes,
                                  int k_p, const CostSpec &cost = {},
                                  const SynthOptions &opts = {});

/*
 * Best motion-feasible matrices reproducing a density trajectory:
 * minimize sum_s sum_t |z^s(t)|_1 with x(t+1) = M(t) x(t) + z(t).
 * residual is zero exactly when the trajectory is realizable.
 */
struct MarkovFit {
  std::vector<std::vector<Eigen::MatrixXd>> M; /* [s][t], t = 0..k_p-1 */
  double residual = 0.0;
};
MarkovFit recover_markov(const LabeledGraph &g,
                         const std::vector<std::vector<Eigen::VectorXd>> &x,
                         const SolveOptions &opts = {});

/*
 * Trust-region sequential MILP for the general bilinear problem:
 * McCormick start, then alternate a linearized-dynamics MILP (slack
 * penalty lambda, trust radius r) with a matrix re-fit, accepting or
 * contracting on the bilinear-accuracy ratio rho.
 */
SynthesisResult synthesize_general(const LabeledGraph &g, const DensityState &x0,
                                   const std::vector<GtlRequirement> &reqs,
                                   int k_p, const CostSpec &cost = {},
                                   const SynthOptions &opts = {});
SynthesisResult synthesize_general(const LabeledGraph &g, const DensityState &x0,
                                   const Formula &phi, const NodeSet &nodes,
                                   int k_p, const CostSpec &cost = {},
                                   const SynthOptions &opts = {});

/*
 * Route a problem to the appropriate path: reach-avoid requirements go to
 * the LP on scrambling graphs and to the spectral program otherwise;
 * general formulas go to the complete-graph MILP when every graph is
 * complete and to the sequential MILP otherwise. diagnostics.path names
 * the branch taken.
 */
SynthesisResult gtlproco_dispatch(const ProblemInstance &prob,
                                  const SynthOptions &opts = {});

/* max_s max_t |x^s(t+1) - M^s(t) x^s(t)|_inf over the trajectory */
double bilinear_error(const MarkovPlan &plan, const GraphTrajectory &traj);

/*
 * The encoded model a solve would start from, for export to external
 * solvers: the density-only program when every graph is complete, the
 * McCormick-relaxed program otherwise. Reach-avoid instances are solved
 * directly and are not exportable.
 */
Model build_export_model(const ProblemInstance &prob,
                         const SynthOptions &opts = {});

} // namespace gtlproco
