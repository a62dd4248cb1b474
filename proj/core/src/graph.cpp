#include "gtlproco/graph.hpp"

#include <algorithm>
#include <queue>

namespace gtlproco {

LabeledGraph::LabeledGraph(std::vector<Eigen::MatrixXi> adjacency,
                           std::vector<AffineLabel> labels)
    : adj_(std::move(adjacency)), labels_(std::move(labels)) {
  if (adj_.empty())
    throw input_error("graph needs at least one sub-swarm adjacency");
  n_ = static_cast<int>(adj_[0].rows());
  for (std::size_t s = 0; s < adj_.size(); ++s) {
    if (adj_[s].rows() != n_ || adj_[s].cols() != n_)
      throw input_error("adjacency " + std::to_string(s) +
                        " is not n x n with shared n");
    for (int i = 0; i < n_; ++i) {
      bool has_out = false;
      for (int j = 0; j < n_; ++j)
        if (adj_[s](i, j) != 0) has_out = true;
      if (!has_out)
        throw input_error("node " + std::to_string(i) +
                          " has no outgoing edge in sub-swarm " +
                          std::to_string(s));
    }
  }
  if (static_cast<int>(labels_.size()) != n_)
    throw input_error("need exactly one label per node");
  label_dim_ = labels_[0].dim();
  const int stacked = n_ * static_cast<int>(adj_.size());
  for (int v = 0; v < n_; ++v) {
    if (labels_[v].dim() != label_dim_)
      throw input_error("label dimension differs at node " + std::to_string(v));
    if (labels_[v].C.rows() != label_dim_ || labels_[v].C.cols() != stacked)
      throw input_error("label matrix at node " + std::to_string(v) +
                        " must be d x (m*n)");
  }
}

bool LabeledGraph::has_union_edge(NodeId from, NodeId to) const {
  for (const auto &a : adj_)
    if (a(from, to) != 0) return true;
  return false;
}

bool LabeledGraph::is_complete(int s) const {
  const auto &a = adj_.at(s);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (a(i, j) == 0) return false;
  return true;
}

bool LabeledGraph::is_strongly_connected(int s) const {
  const auto &a = adj_.at(s);
  auto reach = [&](bool forward) {
    std::vector<char> seen(n_, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v = 0; v < n_; ++v) {
        bool edge = forward ? a(u, v) != 0 : a(v, u) != 0;
        if (edge && !seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c; });
  };
  return reach(true) && reach(false);
}

std::vector<NodeId> LabeledGraph::in_neighbors(int s, NodeId j) const {
  /* M(i, j) moves mass from v_j to v_i, so it needs the edge (v_j, v_i) */
  std::vector<NodeId> out;
  for (int i = 0; i < n_; ++i)
    if (adj_.at(s)(j, i) != 0) out.push_back(i);
  return out;
}

NodeSet neighbor_set(const LabeledGraph &g, const NodeSet &seed, int depth) {
  if (depth < 1) throw input_error("neighbor_set depth must be >= 1");
  std::vector<char> cur(g.node_count(), 0);
  for (NodeId v : seed) {
    if (v < 0 || v >= g.node_count())
      throw input_error("neighbor_set seed node out of range");
    cur[v] = 1;
  }
  for (int step = 0; step < depth; ++step) {
    std::vector<char> next(g.node_count(), 0);
    for (int v = 0; v < g.node_count(); ++v) {
      if (!cur[v]) continue;
      for (int w = 0; w < g.node_count(); ++w)
        if (g.has_union_edge(v, w)) next[w] = 1;
    }
    cur.swap(next);
  }
  NodeSet out;
  for (int v = 0; v < g.node_count(); ++v)
    if (cur[v]) out.push_back(v);
  return out;
}

Eigen::VectorXd stack_densities(const std::vector<Eigen::VectorXd> &xs) {
  Eigen::Index total = 0;
  for (const auto &v : xs) total += v.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto &v : xs) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  return out;
}

Eigen::VectorXd DensityState::stacked() const { return stack_densities(x); }

void DensityState::validate(double tol) const {
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (std::abs(x[s].sum() - 1.0) > tol)
      throw input_error("density of sub-swarm " + std::to_string(s) +
                        " does not sum to one");
    if ((x[s].array() < -tol).any())
      throw input_error("density of sub-swarm " + std::to_string(s) +
                        " has a negative entry");
  }
}

const Eigen::MatrixXd &MarkovPlan::matrix(int s, int t) const {
  return M.at(s).at(t);
}

const Eigen::MatrixXd &MarkovPlan::matrix_at(int s, long t) const {
  if (t < k_p) return M.at(s).at(static_cast<std::size_t>(t));
  if (time_invariant) return M.at(s).back();
  if (!loop_index)
    throw input_error("plan has no loop index; cannot extend past horizon");
  const long lp = *loop_index;
  const long period = k_p - lp + 1;
  const long folded = (lp - 1) + (t - (lp - 1)) % period;
  return M.at(s).at(static_cast<std::size_t>(folded));
}

void MarkovPlan::validate(const LabeledGraph &g, double tol) const {
  if (static_cast<int>(M.size()) != g.sub_swarm_count())
    throw input_error("plan sub-swarm count mismatch");
  if (loop_index && (*loop_index < 1 || *loop_index > k_p))
    throw input_error("loop index out of range");
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    if (static_cast<int>(M[s].size()) != k_p)
      throw input_error("plan horizon mismatch in sub-swarm " +
                        std::to_string(s));
    for (const auto &mat : M[s]) {
      if (!is_column_stochastic(mat, tol))
        throw input_error("plan matrix is not column-stochastic");
      if (!respects_motion(mat, g.adjacency(s), tol))
        throw input_error("plan matrix violates motion constraints");
    }
  }
}

bool is_column_stochastic(const Eigen::MatrixXd &M, double tol) {
  if (M.rows() != M.cols()) return false;
  for (int j = 0; j < M.cols(); ++j) {
    if (std::abs(M.col(j).sum() - 1.0) > tol) return false;
    if ((M.col(j).array() < -tol).any()) return false;
  }
  return true;
}

bool respects_motion(const Eigen::MatrixXd &M, const Eigen::MatrixXi &adj,
                     double tol) {
  /* M(i, j) may be nonzero only along reversed edges: adj(j, i) != 0 */
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (adj(j, i) == 0 && std::abs(M(i, j)) > tol) return false;
  return true;
}

double sanitize_column_stochastic(Eigen::MatrixXd &M) {
  Eigen::MatrixXd before = M;
  M = M.cwiseMax(0.0).cwiseMin(1.0);
  for (int j = 0; j < M.cols(); ++j) {
    double s = M.col(j).sum();
    if (s <= 0.0)
      throw input_error("cannot renormalize a nonpositive column");
    M.col(j) /= s;
  }
  return (M - before).cwiseAbs().maxCoeff();
}

double sanitize_density(Eigen::VectorXd &x) {
  Eigen::VectorXd before = x;
  x = x.cwiseMax(0.0).cwiseMin(1.0);
  double s = x.sum();
  if (s <= 0.0) throw input_error("cannot renormalize a nonpositive density");
  x /= s;
  if (before.size() == 0) return 0.0;
  return (x - before).cwiseAbs().maxCoeff();
}

} // namespace gtlproco
