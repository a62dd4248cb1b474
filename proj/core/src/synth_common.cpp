#include "synth_common.hpp"

#include "gtlproco/monitor.hpp"

namespace gtlproco {
namespace detail {

MatrixVars add_matrix_vars(Model &m, const LabeledGraph &g, int steps,
                           const std::string &prefix) {
  const int n = g.node_count();
  MatrixVars vars;
  vars.idx.resize(g.sub_swarm_count());
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    for (int t = 0; t < steps; ++t) {
      Eigen::MatrixXi ix = Eigen::MatrixXi::Constant(n, n, -1);
      for (int j = 0; j < n; ++j) {
        const auto rows = g.in_neighbors(s, j);
        if (rows.empty())
          throw input_error("node " + std::to_string(j) +
                            " has no outgoing edge in sub-swarm " +
                            std::to_string(s));
        std::vector<std::pair<int, double>> col;
        for (int i : rows) {
          ix(i, j) = m.add_var(prefix + std::to_string(s) + "_" +
                                   std::to_string(t) + "_" + std::to_string(i) +
                                   "_" + std::to_string(j),
                               0.0, 1.0);
          col.emplace_back(ix(i, j), 1.0);
        }
        m.add_row(std::move(col), RowSense::EQ, 1.0);
      }
      vars.idx[s].push_back(std::move(ix));
    }
  }
  return vars;
}

void raise_support_floor(Model &m, const MatrixVars &vars,
                         const LabeledGraph &g, double floor) {
  if (floor <= 0.0) return;
  const int n = g.node_count();
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    for (int t = 0; t < vars.steps(); ++t)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          if (vars.at(s, t, i, j) >= 0) m.lb[vars.at(s, t, i, j)] = floor;
}

void add_simplex_rows(ConstraintSystem &cs) {
  const int n = cs.graph().node_count();
  for (int s = 0; s < cs.graph().sub_swarm_count(); ++s)
    for (int t = 0; t <= cs.horizon(); ++t) {
      std::vector<std::pair<int, double>> terms;
      for (int v = 0; v < n; ++v) terms.emplace_back(cs.density_var(s, t, v), 1.0);
      cs.model().add_row(std::move(terms), RowSense::EQ, 1.0);
    }
}

void pin_initial_state(ConstraintSystem &cs, const DensityState &x0) {
  x0.validate();
  if (x0.sub_swarm_count() != cs.graph().sub_swarm_count())
    throw input_error("start state has the wrong number of sub-swarms");
  const int n = cs.graph().node_count();
  for (int s = 0; s < x0.sub_swarm_count(); ++s) {
    if (x0.x[s].size() != n)
      throw input_error("start state has the wrong number of bins");
    for (int v = 0; v < n; ++v) {
      const int var = cs.density_var(s, 0, v);
      cs.model().lb[var] = x0.x[s](v);
      cs.model().ub[var] = x0.x[s](v);
    }
  }
}

void add_density_loop_ties(ConstraintSystem &cs) {
  const int n = cs.graph().node_count();
  const int kp = cs.horizon();
  for (int s = 0; s < cs.graph().sub_swarm_count(); ++s)
    for (int j = 1; j <= kp; ++j)
      for (int v = 0; v < n; ++v) {
        const int back = cs.density_var(s, j - 1, v);
        const int end = cs.density_var(s, kp, v);
        if (back == end) continue;
        const int lj = cs.loop_var(j);
        cs.model().add_row({{end, 1.0}, {back, -1.0}, {lj, 1.0}}, RowSense::LE,
                           1.0);
        cs.model().add_row({{end, 1.0}, {back, -1.0}, {lj, -1.0}}, RowSense::GE,
                           -1.0);
      }
}

void add_density_cost(ConstraintSystem &cs, const CostSpec &cost) {
  if (cost.density_coeff.empty()) return;
  const int n = cs.graph().node_count();
  for (int s = 0; s < cs.graph().sub_swarm_count(); ++s) {
    const Eigen::VectorXd &c = cost.density_coeff.at(s);
    for (int t = 0; t <= cs.horizon(); ++t)
      for (int v = 0; v < n; ++v)
        if (c(v) != 0.0) cs.model().obj[cs.density_var(s, t, v)] += c(v);
  }
}

void add_loop_cost(ConstraintSystem &cs, const CostSpec &cost) {
  if (!cost.loop_cost) return;
  for (int j = 1; j <= cs.horizon(); ++j)
    cs.model().obj[cs.loop_var(j)] += static_cast<double>(j + 1);
}

void add_matrix_cost(Model &m, const MatrixVars &vars, const LabeledGraph &g,
                     const CostSpec &cost) {
  if (cost.matrix_coeff.empty()) return;
  const int n = g.node_count();
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    const Eigen::MatrixXd &c = cost.matrix_coeff.at(s);
    for (int t = 0; t < vars.steps(); ++t)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (c(i, j) != 0.0 && vars.at(s, t, i, j) >= 0)
            m.obj[vars.at(s, t, i, j)] += c(i, j);
  }
}

void encode_requirements(ConstraintSystem &cs,
                         const std::vector<GtlRequirement> &reqs,
                         int pinned_loop) {
  double big_m = 0.0;
  for (const auto &req : reqs)
    big_m = std::max(big_m, choose_big_m(cs.graph(), *req.phi));
  if (big_m == 0.0) big_m = 1.0;
  cs.encode_loop(big_m);
  if (pinned_loop != -1) {
    if (pinned_loop < 1 || pinned_loop > cs.horizon())
      throw input_error("pinned loop position must lie in 1..k_p");
    for (int j = 1; j <= cs.horizon(); ++j) {
      const double v = j == pinned_loop ? 1.0 : 0.0;
      cs.model().lb[cs.loop_var(j)] = v;
      cs.model().ub[cs.loop_var(j)] = v;
    }
  }
  for (const auto &req : reqs) encode_formula(cs, *req.phi, req.nodes);
}

std::vector<std::vector<Eigen::VectorXd>>
extract_densities(ConstraintSystem &cs, const Eigen::VectorXd &sol) {
  const int n = cs.graph().node_count();
  std::vector<std::vector<Eigen::VectorXd>> x(cs.graph().sub_swarm_count());
  for (int s = 0; s < cs.graph().sub_swarm_count(); ++s)
    for (int t = 0; t <= cs.horizon(); ++t) {
      Eigen::VectorXd v(n);
      for (int u = 0; u < n; ++u) v(u) = sol(cs.density_var(s, t, u));
      x[s].push_back(std::move(v));
    }
  return x;
}

int extract_loop_index(const ConstraintSystem &cs, const Eigen::VectorXd &sol) {
  int best = 1;
  double best_val = -1.0;
  for (int j = 1; j <= cs.horizon(); ++j) {
    const double v = sol(cs.loop_var(j));
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  return best;
}

std::vector<std::vector<Eigen::MatrixXd>>
extract_matrices(const MatrixVars &vars, const LabeledGraph &g, int steps,
                 const Eigen::VectorXd &sol) {
  const int n = g.node_count();
  std::vector<std::vector<Eigen::MatrixXd>> M(g.sub_swarm_count());
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    for (int t = 0; t < steps; ++t) {
      Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (vars.at(s, t, i, j) >= 0) mat(i, j) = sol(vars.at(s, t, i, j));
      M[s].push_back(std::move(mat));
    }
  return M;
}

double cost_value(const CostSpec &cost,
                  const std::vector<std::vector<Eigen::VectorXd>> &x,
                  const std::vector<std::vector<Eigen::MatrixXd>> &M,
                  std::optional<int> loop_index) {
  double total = 0.0;
  if (!cost.density_coeff.empty())
    for (std::size_t s = 0; s < x.size(); ++s)
      for (const auto &xt : x[s]) total += cost.density_coeff.at(s).dot(xt);
  if (!cost.matrix_coeff.empty())
    for (std::size_t s = 0; s < M.size(); ++s)
      for (const auto &Mt : M[s])
        total += cost.matrix_coeff.at(s).cwiseProduct(Mt).sum();
  if (cost.loop_cost && loop_index) total += static_cast<double>(*loop_index + 1);
  return total;
}

std::vector<GtlRequirement> single_requirement(const Formula &phi,
                                               const NodeSet &nodes) {
  std::vector<GtlRequirement> reqs;
  reqs.push_back(GtlRequirement{phi.clone(), nodes});
  return reqs;
}

bool verify_requirements(const LabeledGraph &g, const GraphTrajectory &traj,
                         const std::vector<GtlRequirement> &reqs,
                         double slack) {
  for (const auto &r : reqs)
    for (NodeId v : r.nodes)
      if (!evaluate(g, traj, *r.phi, v, 0, slack)) return false;
  return true;
}

void assemble_complete_model(ConstraintSystem &cs, const DensityState &x0,
                             const std::vector<GtlRequirement> &reqs,
                             const CostSpec &cost, const SynthOptions &opts) {
  add_simplex_rows(cs);
  pin_initial_state(cs, x0);
  encode_requirements(cs, reqs, opts.pinned_loop);
  if (opts.periodic_densities) add_density_loop_ties(cs);
  add_density_cost(cs, cost);
  add_loop_cost(cs, cost);
  if (!cost.matrix_coeff.empty()) {
    /* column j of M^s(t) equals x^s(t+1), so a matrix cost folds into a
       density cost with row-summed coefficients */
    const LabeledGraph &g = cs.graph();
    const int n = g.node_count();
    for (int s = 0; s < g.sub_swarm_count(); ++s) {
      const Eigen::VectorXd rowsum = cost.matrix_coeff.at(s).rowwise().sum();
      for (int t = 0; t + 1 <= cs.horizon(); ++t)
        for (int i = 0; i < n; ++i)
          if (rowsum(i) != 0.0)
            cs.model().obj[cs.density_var(s, t + 1, i)] += rowsum(i);
    }
  }
}

void assemble_mccormick_model(ConstraintSystem &cs, const DensityState &x0,
                              const std::vector<GtlRequirement> &reqs,
                              const CostSpec &cost, const SynthOptions &opts) {
  add_simplex_rows(cs);
  pin_initial_state(cs, x0);
  encode_requirements(cs, reqs, opts.pinned_loop);
  if (opts.periodic_densities) add_density_loop_ties(cs);
  add_density_cost(cs, cost);
  add_loop_cost(cs, cost);

  const LabeledGraph &g = cs.graph();
  const int n = g.node_count();
  const int k_p = cs.horizon();
  Model &m = cs.model();
  const auto mv = add_matrix_vars(m, g, k_p, "M");
  add_matrix_cost(m, mv, g, cost);

  /* envelope variables V_ij(t) ~ M_ij(t) x_j(t) drive the dynamics */
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    for (int t = 0; t < k_p; ++t) {
      std::vector<std::vector<std::pair<int, double>>> dyn(n);
      for (int j = 0; j < n; ++j) {
        std::vector<std::pair<int, double>> conserve;
        for (int i = 0; i < n; ++i) {
          const int mvar = mv.at(s, t, i, j);
          if (mvar < 0) continue;
          const int xj = cs.density_var(s, t, j);
          const int vv = m.add_var("V" + std::to_string(s) + "_" +
                                       std::to_string(t) + "_" +
                                       std::to_string(i) + "_" +
                                       std::to_string(j),
                                   0.0, 1.0);
          m.add_row({{vv, 1.0}, {mvar, -1.0}, {xj, -1.0}}, RowSense::GE, -1.0);
          m.add_row({{vv, 1.0}, {xj, -1.0}}, RowSense::LE, 0.0);
          m.add_row({{vv, 1.0}, {mvar, -1.0}}, RowSense::LE, 0.0);
          dyn[i].push_back({vv, -1.0});
          conserve.push_back({vv, 1.0});
        }
        /* summing V_ij = M_ij x_j over the column gives sum_i V_ij = x_j;
           with this row the V block is an exact mass flow, so a zero-error
           transition matrix can always be recovered from the relaxation */
        conserve.push_back({cs.density_var(s, t, j), -1.0});
        m.add_row(std::move(conserve), RowSense::EQ, 0.0);
      }
      for (int i = 0; i < n; ++i) {
        dyn[i].push_back({cs.density_var(s, t + 1, i), 1.0});
        m.add_row(dyn[i], RowSense::EQ, 0.0);
      }
    }
  }
}

SynthStatus from_solve_status(SolveStatus s) {
  switch (s) {
  case SolveStatus::Optimal: return SynthStatus::Success;
  case SolveStatus::Infeasible: return SynthStatus::Infeasible;
  case SolveStatus::TimeLimit: return SynthStatus::TimeLimit;
  default: return SynthStatus::NumericalTrouble;
  }
}

} // namespace detail
} // namespace gtlproco
