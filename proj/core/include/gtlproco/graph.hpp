#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtlproco {

using NodeId = int;
using NodeSet = std::vector<NodeId>; /* kept sorted, unique */

class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string &what) : std::runtime_error(what) {}
};

/*
 * Node label as an affine map over the stacked sub-swarm densities
 * [x^1; x^2; ...; x^m]:  f(x) = C x + c0, with C of shape d x (m * n_r).
 */
struct AffineLabel {
  Eigen::MatrixXd C;
  Eigen::VectorXd c0;

  int dim() const { return static_cast<int>(c0.size()); }
  Eigen::VectorXd eval(const Eigen::VectorXd &stacked) const {
    return C * stacked + c0;
  }
};

/*
 * A swarm environment: one shared node set, one adjacency matrix per
 * sub-swarm (adj[s](i, j) != 0 means the edge v_i -> v_j exists for
 * sub-swarm s), and one affine label per node.
 */
class LabeledGraph {
public:
  LabeledGraph() = default;
  LabeledGraph(std::vector<Eigen::MatrixXi> adjacency,
               std::vector<AffineLabel> labels);

  int node_count() const { return n_; }
  int sub_swarm_count() const { return static_cast<int>(adj_.size()); }
  int label_dim() const { return label_dim_; }

  const Eigen::MatrixXi &adjacency(int s) const { return adj_.at(s); }
  const AffineLabel &label(NodeId v) const { return labels_.at(v); }

  bool has_edge(int s, NodeId from, NodeId to) const {
    return adj_.at(s)(from, to) != 0;
  }
  /* true if the union edge set over sub-swarms contains (from, to) */
  bool has_union_edge(NodeId from, NodeId to) const;

  bool is_complete(int s) const; /* every ordered pair incl. self-loops */
  bool is_strongly_connected(int s) const;

  /* column support allowed for M^s: M(i, j) may be nonzero iff adj[s](j, i) */
  std::vector<NodeId> in_neighbors(int s, NodeId j) const;

private:
  int n_ = 0;
  int label_dim_ = 0;
  std::vector<Eigen::MatrixXi> adj_;
  std::vector<AffineLabel> labels_;
};

/*
 * Iterated successor-set image over the union edge set: depth applications
 * of V' -> { v' : (v, v') in E, v in V' }.
 */
NodeSet neighbor_set(const LabeledGraph &g, const NodeSet &seed, int depth);

/* One density vector per sub-swarm; each must lie on the simplex. */
struct DensityState {
  std::vector<Eigen::VectorXd> x;

  int sub_swarm_count() const { return static_cast<int>(x.size()); }
  /* stacked [x^1; ...; x^m] for label evaluation */
  Eigen::VectorXd stacked() const;
  void validate(double tol = 1e-9) const;
};

Eigen::VectorXd stack_densities(const std::vector<Eigen::VectorXd> &xs);

/*
 * Synthesized plan: per sub-swarm a sequence of column-stochastic matrices
 * M^s(t), t = 0..k_p-1, obeying the motion constraints of the graph, plus
 * the loop index of the underlying lasso trajectory.
 */
struct MarkovPlan {
  std::vector<std::vector<Eigen::MatrixXd>> M; /* [s][t] */
  int k_p = 0;
  std::optional<int> loop_index;               /* l_p in [1, k_p] */
  bool time_invariant = false;

  const Eigen::MatrixXd &matrix(int s, int t) const;
  /* matrix to apply at an arbitrary time, reusing the loop past k_p */
  const Eigen::MatrixXd &matrix_at(int s, long t) const;
  void validate(const LabeledGraph &g, double tol = 1e-9) const;
};

bool is_column_stochastic(const Eigen::MatrixXd &M, double tol = 1e-9);
bool respects_motion(const Eigen::MatrixXd &M, const Eigen::MatrixXi &adj,
                     double tol = 0.0);

/*
 * Clip entries to [0, 1] and renormalize each column to sum one.
 * Returns the largest per-entry adjustment made.
 */
double sanitize_column_stochastic(Eigen::MatrixXd &M);
double sanitize_density(Eigen::VectorXd &x);

} // namespace gtlproco
