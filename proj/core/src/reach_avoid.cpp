#include "gtlproco/simplex.hpp"
#include "gtlproco/spectral.hpp"
#include "synth_common.hpp"

#include <chrono>

namespace gtlproco {

namespace {

using detail::MatrixVars;

double wall_seconds(const std::chrono::steady_clock::time_point &t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

/* variable layout of one stacked safety block's certificate */
struct BlockVars {
  int y0 = 0; /* p*p entries, row-major, bounds (-inf, 0] */
  int s0 = 0; /* p*m entries, row-major, free */
  int p = 0;
};

struct RaProgram {
  Model model;
  MatrixVars mvars;
  std::vector<BlockVars> blocks;
  std::vector<int> tau; /* epigraph variable per sub-swarm; empty if unused */
};

/*
 * Common constraint assembly of the time-invariant reach-avoid programs:
 * column-stochastic M^s on the motion support with an optional entry floor,
 * stationarity M^s nu^s = nu^s, and per safety block the invariance
 * certificate rows linking (Y, S) to M.
 */
RaProgram build_reach_avoid_program(const LabeledGraph &g,
                                    const ReachAvoidSpec &spec,
                                    const CostSpec &cost,
                                    const SynthOptions &opts, bool with_tau) {
  const int n = g.node_count();
  const int m = g.sub_swarm_count();
  RaProgram prog;
  prog.mvars = detail::add_matrix_vars(prog.model, g, 1, "M");
  detail::raise_support_floor(prog.model, prog.mvars, g, opts.support_floor);
  detail::add_matrix_cost(prog.model, prog.mvars, g, cost);

  for (int s = 0; s < m; ++s) {
    const Eigen::VectorXd &nu = spec.nu.at(s);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < n; ++j)
        if (prog.mvars.at(s, 0, i, j) >= 0)
          terms.emplace_back(prog.mvars.at(s, 0, i, j), nu(j));
      prog.model.add_row(std::move(terms), RowSense::EQ, nu(i));
    }
  }

  for (const auto &block : spec.safety) {
    const int p = static_cast<int>(block.b.size());
    BlockVars bv;
    bv.p = p;
    bv.y0 = prog.model.var_count();
    for (int k = 0; k < p; ++k)
      for (int l = 0; l < p; ++l)
        prog.model.add_var("Y" + std::to_string(k) + "_" + std::to_string(l),
                           -kInf, 0.0);
    bv.s0 = prog.model.var_count();
    for (int k = 0; k < p; ++k)
      for (int q = 0; q < m; ++q)
        prog.model.add_var("S" + std::to_string(k) + "_" + std::to_string(q),
                           -kInf, kInf);

    for (int k = 0; k < p; ++k) {
      /* Y b + S 1 >= -b, row k */
      std::vector<std::pair<int, double>> terms;
      for (int l = 0; l < p; ++l)
        if (block.b(l) != 0.0) terms.emplace_back(bv.y0 + k * p + l, block.b(l));
      for (int q = 0; q < m; ++q) terms.emplace_back(bv.s0 + k * m + q, 1.0);
      prog.model.add_row(std::move(terms), RowSense::GE, -block.b(k));

      /* Y A + S O <= -A diag(M^1..M^m), row k, column (s, j) */
      for (int s = 0; s < m; ++s)
        for (int j = 0; j < n; ++j) {
          const int c = s * n + j;
          std::vector<std::pair<int, double>> row;
          for (int l = 0; l < p; ++l)
            if (block.A(l, c) != 0.0)
              row.emplace_back(bv.y0 + k * p + l, block.A(l, c));
          row.emplace_back(bv.s0 + k * m + s, 1.0);
          for (int i = 0; i < n; ++i)
            if (prog.mvars.at(s, 0, i, j) >= 0 && block.A(k, s * n + i) != 0.0)
              row.emplace_back(prog.mvars.at(s, 0, i, j), block.A(k, s * n + i));
          prog.model.add_row(std::move(row), RowSense::LE, 0.0);
        }
    }
    prog.blocks.push_back(bv);
  }

  if (with_tau) {
    for (int s = 0; s < m; ++s) {
      const double c_s = spec.weight(s);
      prog.tau.push_back(prog.model.add_var("tau" + std::to_string(s), 0.0,
                                            kInf, c_s));
      if (c_s == 0.0) continue;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          std::vector<std::pair<int, double>> pair_row{{prog.tau.back(), 1.0}};
          for (int row = 0; row < n; ++row) {
            const int a = prog.mvars.at(s, 0, row, i);
            const int b = prog.mvars.at(s, 0, row, j);
            if (a < 0 && b < 0) continue;
            const int u = prog.model.add_var(
                "u" + std::to_string(s) + "_" + std::to_string(row) + "_" +
                    std::to_string(i) + "_" + std::to_string(j),
                0.0, kInf);
            std::vector<std::pair<int, double>> ge1{{u, 1.0}}, ge2{{u, 1.0}};
            if (a >= 0) {
              ge1.emplace_back(a, -1.0);
              ge2.emplace_back(a, 1.0);
            }
            if (b >= 0) {
              ge1.emplace_back(b, 1.0);
              ge2.emplace_back(b, -1.0);
            }
            prog.model.add_row(std::move(ge1), RowSense::GE, 0.0);
            prog.model.add_row(std::move(ge2), RowSense::GE, 0.0);
            pair_row.emplace_back(u, -0.5);
          }
          prog.model.add_row(std::move(pair_row), RowSense::GE, 0.0);
        }
    }
  }
  return prog;
}

void check_preconditions(const LabeledGraph &g, const DensityState &x0,
                         const ReachAvoidSpec &spec) {
  spec.validate(g);
  x0.validate();
  if (x0.sub_swarm_count() != g.sub_swarm_count())
    throw input_error("start state has the wrong number of sub-swarms");
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    if (!g.is_strongly_connected(s))
      throw input_error("sub-swarm " + std::to_string(s) +
                        " graph is not strongly connected; stationary "
                        "distributions are not reachable");
  const Eigen::VectorXd stacked = x0.stacked();
  for (const auto &block : spec.safety)
    if (((block.A * stacked) - block.b).maxCoeff() > 1e-9)
      throw input_error("initial state violates a safety row");
}

/* certificate values and worst violation of the invariance conditions */
SafetyCertificate extract_certificate(const RaProgram &prog,
                                      const ReachAvoidSpec &spec,
                                      const LabeledGraph &g,
                                      const std::vector<Eigen::MatrixXd> &M,
                                      const Eigen::VectorXd &sol) {
  const int n = g.node_count();
  const int m = g.sub_swarm_count();
  SafetyCertificate cert;
  for (std::size_t bi = 0; bi < prog.blocks.size(); ++bi) {
    const BlockVars &bv = prog.blocks[bi];
    const auto &block = spec.safety[bi];
    Eigen::MatrixXd Y(bv.p, bv.p), S(bv.p, m);
    for (int k = 0; k < bv.p; ++k) {
      for (int l = 0; l < bv.p; ++l) Y(k, l) = sol(bv.y0 + k * bv.p + l);
      for (int q = 0; q < m; ++q) S(k, q) = sol(bv.s0 + k * m + q);
    }
    cert.max_violation = std::max(cert.max_violation, Y.maxCoeff());
    const Eigen::VectorXd r1 = -block.b - (Y * block.b + S.rowwise().sum());
    cert.max_violation = std::max(cert.max_violation, r1.maxCoeff());

    Eigen::MatrixXd Mdiag = Eigen::MatrixXd::Zero(n * m, n * m);
    for (int s = 0; s < m; ++s) Mdiag.block(s * n, s * n, n, n) = M[s];
    Eigen::MatrixXd O = Eigen::MatrixXd::Zero(m, n * m);
    for (int s = 0; s < m; ++s) O.block(s, s * n, 1, n).setOnes();
    const Eigen::MatrixXd r2 = Y * block.A + S * O + block.A * Mdiag;
    cert.max_violation = std::max(cert.max_violation, r2.maxCoeff());
    cert.Y.push_back(std::move(Y));
    cert.S.push_back(std::move(S));
  }
  return cert;
}

MarkovPlan invariant_plan(std::vector<Eigen::MatrixXd> M) {
  MarkovPlan plan;
  plan.k_p = 1;
  plan.loop_index = 1;
  plan.time_invariant = true;
  for (auto &mat : M) plan.M.push_back({std::move(mat)});
  return plan;
}

GraphTrajectory one_step_prefix(const LabeledGraph &g, const MarkovPlan &plan,
                                const DensityState &x0) {
  GraphTrajectory traj;
  traj.x.resize(g.sub_swarm_count());
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    traj.x[s] = {x0.x[s], plan.matrix(s, 0) * x0.x[s]};
  return traj;
}

} // namespace

SynthesisResult synthesize_reach_avoid_lp(const LabeledGraph &g,
                                          const DensityState &x0,
                                          const ReachAvoidSpec &spec,
                                          const CostSpec &cost,
                                          const SynthOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  check_preconditions(g, x0, spec);
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    if (!is_scrambling(g.adjacency(s)))
      throw input_error("sub-swarm " + std::to_string(s) +
                        " graph has no scrambling pattern; the ergodicity "
                        "coefficient cannot certify convergence, use the "
                        "spectral path");

  const bool with_tau = spec.weights.size() == 0 || spec.weights.maxCoeff() > 0;
  RaProgram prog = build_reach_avoid_program(g, spec, cost, opts, with_tau);

  SynthesisResult res;
  res.diagnostics.path = "reach-avoid-lp";
  Solution sol = solve_lp(prog.model, opts.solve);
  res.status = detail::from_solve_status(sol.status);
  res.diagnostics.wall_time_sec = wall_seconds(t0);
  if (res.status != SynthStatus::Success) {
    res.diagnostics.message = "linear program: " + to_string(sol.status);
    return res;
  }

  auto M = detail::extract_matrices(prog.mvars, g, 1, sol.x);
  std::vector<Eigen::MatrixXd> Ms;
  for (auto &per : M) Ms.push_back(per[0]);
  for (auto &mat : Ms) sanitize_column_stochastic(mat);

  res.certificate = extract_certificate(prog, spec, g, Ms, sol.x);
  for (const auto &mat : Ms)
    res.ergodicity.push_back(ergodicity_coefficient(mat));
  for (int s = 0; s < g.sub_swarm_count(); ++s)
    res.convergence_rate.push_back(
        reversibilization_rate(Ms[s], spec.nu[s]).rate);
  res.plan = invariant_plan(std::move(Ms));
  res.trajectory = one_step_prefix(g, res.plan, x0);
  res.diagnostics.objective = sol.objective;
  res.diagnostics.bilinear_gap = 0.0;
  res.diagnostics.wall_time_sec = wall_seconds(t0);
  return res;
}

namespace {

/* squared spectral norm of Q^-1 M Q - r r^T plus its top singular pair */
struct RateInfo {
  double value = 0.0;
  double sigma = 0.0;
  Eigen::VectorXd u, v;
};

RateInfo rate_info(const Eigen::MatrixXd &M, const Eigen::VectorXd &nu) {
  const Eigen::VectorXd r = nu.cwiseSqrt();
  const int n = static_cast<int>(nu.size());
  Eigen::MatrixXd G(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      G(a, b) = M(a, b) * r(b) / r(a) - r(a) * r(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  RateInfo info;
  info.sigma = svd.singularValues()(0);
  info.value = info.sigma * info.sigma;
  info.u = svd.matrixU().col(0);
  info.v = svd.matrixV().col(0);
  return info;
}

double weighted_rate(const std::vector<Eigen::MatrixXd> &Ms,
                     const ReachAvoidSpec &spec) {
  double total = 0.0;
  for (std::size_t s = 0; s < Ms.size(); ++s)
    if (spec.weight(static_cast<int>(s)) > 0.0)
      total += spec.weight(static_cast<int>(s)) *
               rate_info(Ms[s], spec.nu[s]).value;
  return total;
}

} // namespace

SynthesisResult synthesize_reach_avoid_spectral(const LabeledGraph &g,
                                                const DensityState &x0,
                                                const ReachAvoidSpec &spec,
                                                const CostSpec &cost,
                                                const SynthOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  check_preconditions(g, x0, spec);
  const int n = g.node_count();
  const int m = g.sub_swarm_count();

  RaProgram prog = build_reach_avoid_program(g, spec, cost, opts, false);
  const std::vector<double> base_obj(prog.model.obj);

  SynthesisResult res;
  res.diagnostics.path = "spectral";
  Solution sol = solve_lp(prog.model, opts.solve);
  res.status = detail::from_solve_status(sol.status);
  if (res.status != SynthStatus::Success) {
    res.diagnostics.message = "feasibility program: " + to_string(sol.status);
    res.diagnostics.wall_time_sec = wall_seconds(t0);
    return res;
  }

  /* current iterate: matrices plus matching certificate variables */
  Eigen::VectorXd cur = sol.x;
  auto matrices = [&](const Eigen::VectorXd &point) {
    auto M = detail::extract_matrices(prog.mvars, g, 1, point);
    std::vector<Eigen::MatrixXd> Ms;
    for (auto &per : M) Ms.push_back(per[0]);
    return Ms;
  };
  double f_cur = weighted_rate(matrices(cur), spec);
  const bool optimize = spec.weights.size() == 0 || spec.weights.maxCoeff() > 0;

  double radius = 1.0;
  const std::vector<double> lb0(prog.model.lb), ub0(prog.model.ub);
  int iter = 0;
  while (optimize && iter < opts.spectral_max_iters) {
    ++iter;
    const auto Ms = matrices(cur);
    /* linearized objective: base cost plus rate subgradients */
    prog.model.obj = base_obj;
    for (int s = 0; s < m; ++s) {
      const double c_s = spec.weight(s);
      if (c_s == 0.0) continue;
      const RateInfo info = rate_info(Ms[s], spec.nu[s]);
      const Eigen::VectorXd r = spec.nu[s].cwiseSqrt();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int var = prog.mvars.at(s, 0, i, j);
          if (var < 0) continue;
          prog.model.obj[var] +=
              c_s * 2.0 * info.sigma * info.u(i) * info.v(j) * r(j) / r(i);
        }
    }
    /* trust region on the matrix entries */
    for (int s = 0; s < m; ++s)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int var = prog.mvars.at(s, 0, i, j);
          if (var < 0) continue;
          prog.model.lb[var] = std::max(lb0[var], cur(var) - radius);
          prog.model.ub[var] = std::min(ub0[var], cur(var) + radius);
        }

    Solution step = solve_lp(prog.model, opts.solve);
    if (step.status != SolveStatus::Optimal) break;

    /* exact line search on the segment; both endpoints are feasible and
       the constraint rows are jointly linear in (M, Y, S) */
    const Eigen::VectorXd dir = step.x - cur;
    auto f_at = [&](double a) {
      return weighted_rate(matrices(cur + a * dir), spec);
    };
    double lo = 0.0, hi = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
      if (f_at(a) <= f_at(b))
        hi = b;
      else
        lo = a;
    }
    const double alpha = 0.5 * (lo + hi);
    const double f_new = f_at(alpha);

    IterationRecord rec;
    rec.k = iter;
    rec.radius = radius;
    rec.linear_cost = step.objective;
    rec.ratio = f_cur - f_new;
    if (f_new < f_cur - 1e-15) {
      cur += alpha * dir;
      const double improvement = f_cur - f_new;
      f_cur = f_new;
      rec.accepted = true;
      rec.accuracy = f_cur;
      res.diagnostics.log.push_back(rec);
      radius = std::min(1.0, radius * 1.5);
      if (improvement < opts.spectral_improve_tol) break;
    } else {
      rec.accepted = false;
      rec.accuracy = f_cur;
      res.diagnostics.log.push_back(rec);
      radius *= 0.5;
      if (radius < 1e-7) break;
    }
    if (wall_seconds(t0) > opts.solve.time_limit_sec) {
      res.status = SynthStatus::TimeLimit;
      break;
    }
  }

  auto Ms = matrices(cur);
  for (auto &mat : Ms) sanitize_column_stochastic(mat);
  res.certificate = extract_certificate(prog, spec, g, Ms, cur);
  for (const auto &mat : Ms)
    res.ergodicity.push_back(ergodicity_coefficient(mat));
  for (int s = 0; s < m; ++s)
    res.convergence_rate.push_back(
        reversibilization_rate(Ms[s], spec.nu[s]).rate);
  res.plan = invariant_plan(std::move(Ms));
  res.trajectory = one_step_prefix(g, res.plan, x0);
  res.diagnostics.objective =
      detail::cost_value(cost, {}, res.plan.M, std::nullopt) + f_cur;
  res.diagnostics.wall_time_sec = wall_seconds(t0);
  return res;
}

} // namespace gtlproco
