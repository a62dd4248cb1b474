#include "gtlproco/gridworld.hpp"

#include "gtlproco/parser.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace gtlproco {

namespace {

bool contains(const std::vector<NodeId> &v, NodeId x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

GtlRequirement requirement(const std::string &formula, NodeSet nodes) {
  GtlRequirement r;
  r.phi = parse_formula(formula, 1);
  std::sort(nodes.begin(), nodes.end());
  r.nodes = std::move(nodes);
  return r;
}

} // namespace

Eigen::MatrixXi grid_adjacency(int rows, int cols,
                               const std::vector<NodeId> &obstacles) {
  if (rows < 1 || cols < 1) throw input_error("grid dimensions must be positive");
  const int n = rows * cols;
  for (NodeId b : obstacles)
    if (b < 0 || b >= n) throw input_error("obstacle bin out of range");
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
  auto blocked = [&](int b) { return contains(obstacles, b); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int b = r * cols + c;
      adj(b, b) = 1;
      if (blocked(b)) continue;
      const int dr[] = {-1, 1, 0, 0};
      const int dc[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int nr = r + dr[k], nc = c + dc[k];
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
        const int nb = nr * cols + nc;
        if (!blocked(nb)) adj(b, nb) = 1;
      }
    }
  }
  return adj;
}

ProblemInstance make_gridworld(const GridworldSpec &spec) {
  const int n = spec.rows * spec.cols;
  if (spec.starts.empty()) throw input_error("gridworld needs start bins");
  for (NodeId b : spec.starts)
    if (b < 0 || b >= n) throw input_error("start bin out of range");
  for (NodeId b : spec.targets)
    if (b < 0 || b >= n) throw input_error("target bin out of range");
  for (NodeId b : spec.starts)
    if (contains(spec.obstacles, b))
      throw input_error("start bin coincides with an obstacle");
  for (NodeId b : spec.targets)
    if (contains(spec.obstacles, b))
      throw input_error("target bin coincides with an obstacle");

  ProblemInstance prob;
  Eigen::MatrixXi adj = grid_adjacency(spec.rows, spec.cols, spec.obstacles);
  std::vector<AffineLabel> labels;
  for (int v = 0; v < n; ++v) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, n);
    C(0, v) = 1.0;
    labels.push_back({C, Eigen::VectorXd::Zero(1)});
  }
  prob.graph = LabeledGraph({adj}, std::move(labels));

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  for (NodeId b : spec.starts) x0(b) = 1.0 / spec.starts.size();
  prob.x0.x = {x0};
  prob.k_p = spec.k_p;

  /* protected bins keep the higher cap; everything else the transit cap */
  std::set<NodeId> protected_bins(spec.starts.begin(), spec.starts.end());
  protected_bins.insert(spec.targets.begin(), spec.targets.end());
  NodeSet transit;
  for (NodeId v = 0; v < n; ++v)
    if (!protected_bins.count(v) && !contains(spec.obstacles, v))
      transit.push_back(v);

  if (!spec.targets.empty())
    prob.requirements.push_back(requirement(
        "FG (y >= [" + fmt(spec.target_floor) + "])", spec.targets));
  if (!spec.obstacles.empty())
    prob.requirements.push_back(requirement("G (y = [0])", spec.obstacles));
  prob.requirements.push_back(
      requirement("G (y <= [" + fmt(spec.protected_cap) + "])",
                  NodeSet(protected_bins.begin(), protected_bins.end())));
  if (!transit.empty())
    prob.requirements.push_back(requirement(
        "G (y <= [" + fmt(spec.transit_cap) + "])", std::move(transit)));
  return prob;
}

GridworldSpec default_gridworld() {
  GridworldSpec spec;
  spec.rows = 5;
  spec.cols = 7;
  spec.starts = {0, 6, 24, 30};
  spec.targets = {16, 17, 23, 28};
  spec.obstacles = {9, 11, 25};
  return spec;
}

} // namespace gtlproco
