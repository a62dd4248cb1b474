#include "gtlproco/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gtlproco {

long GraphTrajectory::fold(long t) const {
  if (t <= k_p()) return t;
  if (!loop_index)
    throw input_error("trajectory has no loop index; cannot evaluate past k_p");
  const long lp = *loop_index;
  const long p = k_p() - lp + 1;
  return (lp - 1) + (t - (lp - 1)) % p;
}

Eigen::VectorXd GraphTrajectory::stacked(long t) const {
  const long tt = fold(t);
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(x.size());
  for (const auto &per_s : x) xs.push_back(per_s.at(static_cast<std::size_t>(tt)));
  return stack_densities(xs);
}

Eigen::VectorXd GraphTrajectory::label_value(const LabeledGraph &g, NodeId v,
                                             long t) const {
  return g.label(v).eval(stacked(t));
}

void GraphTrajectory::validate(const LabeledGraph &g, double tol) const {
  if (static_cast<int>(x.size()) != g.sub_swarm_count())
    throw input_error("trajectory sub-swarm count mismatch");
  const std::size_t len = x.at(0).size();
  if (len == 0) throw input_error("trajectory is empty");
  for (const auto &per_s : x) {
    if (per_s.size() != len)
      throw input_error("trajectory lengths differ across sub-swarms");
    for (const auto &v : per_s) {
      if (v.size() != g.node_count())
        throw input_error("trajectory density has wrong dimension");
      if (std::abs(v.sum() - 1.0) > 1e-9 || (v.array() < -1e-9).any())
        throw input_error("trajectory density leaves the simplex");
    }
  }
  if (loop_index) {
    const int lp = *loop_index;
    if (lp < 1 || lp > k_p())
      throw input_error("loop index out of range");
    for (int v = 0; v < g.node_count(); ++v) {
      Eigen::VectorXd a = label_value(g, v, k_p());
      Eigen::VectorXd b = label_value(g, v, lp - 1);
      if ((a - b).cwiseAbs().maxCoeff() > tol)
        throw input_error("label periodicity violated at node " +
                          std::to_string(v));
    }
  }
}

GraphTrajectory rollout(const LabeledGraph &g, const MarkovPlan &plan,
                        const DensityState &x0) {
  GraphTrajectory traj;
  traj.loop_index = plan.loop_index;
  traj.x.resize(g.sub_swarm_count());
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    traj.x[s].resize(plan.k_p + 1);
    traj.x[s][0] = x0.x.at(s);
    for (int t = 0; t < plan.k_p; ++t)
      traj.x[s][t + 1] = plan.matrix(s, t) * traj.x[s][t];
  }
  return traj;
}

namespace {

class Evaluator {
public:
  Evaluator(const LabeledGraph &g, const GraphTrajectory &traj, double slack)
      : g_(g), traj_(traj), slack_(slack) {}

  bool eval(const Formula &f, NodeId v, long t) {
    t = traj_.fold(t);
    const auto key = std::make_tuple(&f, v, t);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool val = compute(f, v, t);
    memo_.emplace(key, val);
    return val;
  }

private:
  long require_loop(const Formula &f) const {
    if (!traj_.loop_index)
      throw input_error("unbounded operator '" +
                        std::string(f.kind == FormulaKind::Next ? "X" : "U/F/G") +
                        "' needs a periodic trajectory");
    return *traj_.loop_index;
  }

  /* first time index of the repeating cycle */
  long cycle_start() const { return *traj_.loop_index - 1; }

  bool atom_holds(const Formula &f, NodeId v, long t) {
    const Eigen::VectorXd y = traj_.label_value(g_, v, t);
    for (const auto &row : f.atom.lowered())
      if (row.a.dot(y) > row.b + slack_) return false;
    return true;
  }

  bool compute(const Formula &f, NodeId v, long t) {
    switch (f.kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Atomic: return atom_holds(f, v, t);
    case FormulaKind::Not: return !eval(*f.lhs, v, t);
    case FormulaKind::And: return eval(*f.lhs, v, t) && eval(*f.rhs, v, t);
    case FormulaKind::Or: return eval(*f.lhs, v, t) || eval(*f.rhs, v, t);
    case FormulaKind::Next:
      if (t + 1 > traj_.k_p()) require_loop(f);
      return eval(*f.lhs, v, t + 1);
    case FormulaKind::Until: {
      /*
       * Scan far enough that the periodic suffix is covered once beyond
       * the start of the cycle; if phi2 has not occurred by then it never
       * will.
       */
      require_loop(f);
      const long horizon = std::max(t, cycle_start()) + traj_.period();
      for (long u = t; u <= horizon; ++u) {
        if (eval(*f.rhs, v, u)) return true;
        if (!eval(*f.lhs, v, u)) return false;
      }
      return false;
    }
    case FormulaKind::Eventually: {
      require_loop(f);
      const long horizon = std::max(t, cycle_start()) + traj_.period();
      for (long u = t; u <= horizon; ++u)
        if (eval(*f.lhs, v, u)) return true;
      return false;
    }
    case FormulaKind::Always: {
      require_loop(f);
      const long horizon = std::max(t, cycle_start()) + traj_.period();
      for (long u = t; u <= horizon; ++u)
        if (!eval(*f.lhs, v, u)) return false;
      return true;
    }
    case FormulaKind::EventuallyAlways: {
      /* true iff the child holds at every position of the cycle */
      require_loop(f);
      for (long u = cycle_start(); u <= cycle_start() + traj_.period() - 1;
           ++u)
        if (!eval(*f.lhs, v, u)) return false;
      return true;
    }
    case FormulaKind::AlwaysEventually: {
      /* true iff the child holds somewhere in the cycle */
      require_loop(f);
      for (long u = cycle_start(); u <= cycle_start() + traj_.period() - 1;
           ++u)
        if (eval(*f.lhs, v, u)) return true;
      return false;
    }
    case FormulaKind::ExistsN: {
      NodeSet nbrs = neighbor_set(g_, {v}, f.depth);
      if (static_cast<int>(nbrs.size()) < f.count) return false;
      int hits = 0;
      for (NodeId w : nbrs)
        if (eval(*f.lhs, w, t)) ++hits;
      return hits >= f.count;
    }
    }
    throw input_error("unknown formula kind");
  }

  const LabeledGraph &g_;
  const GraphTrajectory &traj_;
  double slack_;
  std::map<std::tuple<const Formula *, NodeId, long>, bool> memo_;
};

} // namespace

bool evaluate(const LabeledGraph &g, const GraphTrajectory &traj,
              const Formula &phi, NodeId node, long t, double atom_slack) {
  if (node < 0 || node >= g.node_count())
    throw input_error("evaluate: node out of range");
  Evaluator ev(g, traj, atom_slack);
  return ev.eval(phi, node, t);
}

bool evaluate_all(const LabeledGraph &g, const GraphTrajectory &traj,
                  const Formula &phi, const NodeSet &nodes, long t,
                  double atom_slack) {
  Evaluator ev(g, traj, atom_slack);
  for (NodeId v : nodes)
    if (!ev.eval(phi, v, t)) return false;
  return true;
}

namespace {

/* all vectors of n nonnegative integers summing to res, as densities */
std::vector<Eigen::VectorXd> simplex_grid(int n, int res) {
  std::vector<Eigen::VectorXd> out;
  std::vector<int> parts(n, 0);
  const double step = 1.0 / res;
  auto rec = [&](auto &&self, int idx, int left) -> void {
    if (idx == n - 1) {
      parts[idx] = left;
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = parts[i] * step;
      out.push_back(v);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      parts[idx] = k;
      self(self, idx + 1, left - k);
    }
  };
  rec(rec, 0, res);
  return out;
}

} // namespace

std::optional<GraphTrajectory>
brute_force_witness(const LabeledGraph &g, const Formula &phi,
                    const NodeSet &nodes, int k_p, int resolution,
                    const std::optional<DensityState> &x0) {
  if (g.node_count() > 4 || k_p > 5 || k_p < 1 || resolution > 5 ||
      resolution < 1)
    throw input_error("brute force guard: needs n_r <= 4, k_p <= 5, res <= 5");
  const int m = g.sub_swarm_count();
  auto states = simplex_grid(g.node_count(), resolution);
  const std::size_t per_time_slots = static_cast<std::size_t>(m) * (k_p + 1);
  double total = 1.0;
  const std::size_t free_slots = x0 ? per_time_slots - m : per_time_slots;
  for (std::size_t i = 0; i < free_slots; ++i) total *= states.size();
  if (total > 2e8)
    throw input_error("brute force guard: enumeration too large");

  GraphTrajectory traj;
  traj.x.assign(m, std::vector<Eigen::VectorXd>(k_p + 1));
  if (x0)
    for (int s = 0; s < m; ++s) traj.x[s][0] = x0->x.at(s);

  std::vector<std::size_t> choice(free_slots, 0);
  auto fill = [&]() {
    std::size_t c = 0;
    for (int s = 0; s < m; ++s)
      for (int t = x0 ? 1 : 0; t <= k_p; ++t)
        traj.x[s][t] = states[choice[c++]];
  };

  while (true) {
    fill();
    traj.loop_index.reset();
    const Eigen::VectorXd end_stack = traj.stacked(k_p);
    for (int lp = 1; lp <= k_p; ++lp) {
      bool periodic = true;
      const Eigen::VectorXd loop_stack = traj.stacked(lp - 1);
      for (int v = 0; v < g.node_count() && periodic; ++v) {
        Eigen::VectorXd a = g.label(v).eval(end_stack);
        Eigen::VectorXd b = g.label(v).eval(loop_stack);
        if ((a - b).cwiseAbs().maxCoeff() > 1e-9) periodic = false;
      }
      if (!periodic) continue;
      traj.loop_index = lp;
      if (evaluate_all(g, traj, phi, nodes)) return traj;
    }
    traj.loop_index.reset();
    /* odometer increment */
    std::size_t i = 0;
    while (i < free_slots) {
      if (++choice[i] < states.size()) break;
      choice[i] = 0;
      ++i;
    }
    if (i == free_slots) return std::nullopt;
  }
}

bool brute_force_satisfiable(const LabeledGraph &g, const Formula &phi,
                             const NodeSet &nodes, int k_p, int resolution,
                             const std::optional<DensityState> &x0) {
  return brute_force_witness(g, phi, nodes, k_p, resolution, x0).has_value();
}

} // namespace gtlproco
