#include "gtlproco/branch_bound.hpp"
#include "gtlproco/lp_file.hpp"
#include "gtlproco/simplex.hpp"
#include "synth_common.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace gtlproco {

namespace {

double wall_seconds(const std::chrono::steady_clock::time_point &t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

/* f(x, M) = sum_s sum_t |x(t+1) - M(t) x(t)|_1 */
double accuracy_of(const std::vector<std::vector<Eigen::VectorXd>> &x,
                   const std::vector<std::vector<Eigen::MatrixXd>> &M) {
  double f = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s)
    for (std::size_t t = 0; t + 1 < x[s].size(); ++t)
      f += (x[s][t + 1] - M[s][t] * x[s][t]).lpNorm<1>();
  return f;
}

struct StepResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<std::vector<Eigen::VectorXd>> x;
  int loop_index = 1;
  double linear_cost = 0.0;
};

/*
 * One linearized subproblem: the requirement encoding plus the dynamics
 * linearized at (xk, Mk) with penalized slack and a trust region of the
 * given radius around xk.
 */
StepResult solve_subproblem(const LabeledGraph &g, const DensityState &x0,
                            const std::vector<GtlRequirement> &reqs, int k_p,
                            const CostSpec &cost, const SynthOptions &opts,
                            const std::vector<std::vector<Eigen::VectorXd>> &xk,
                            const std::vector<std::vector<Eigen::MatrixXd>> &Mk,
                            double radius, const SolveOptions &solve_opts) {
  const int n = g.node_count();
  ConstraintSystem cs(g, k_p);
  detail::add_simplex_rows(cs);
  detail::pin_initial_state(cs, x0);
  detail::encode_requirements(cs, reqs, opts.pinned_loop);
  if (opts.periodic_densities) detail::add_density_loop_ties(cs);
  detail::add_density_cost(cs, cost);
  detail::add_loop_cost(cs, cost);

  Model &m = cs.model();
  const auto mv = detail::add_matrix_vars(m, g, k_p, "M");
  detail::add_matrix_cost(m, mv, g, cost);

  const double lam = opts.trust.lambda;
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    for (int t = 0; t < k_p; ++t) {
      const std::string tag = std::to_string(s) + "_" + std::to_string(t);
      int band = -1; /* per-step slack bound for the inf-norm option */
      if (opts.trust.inf_norm) band = m.add_var("zb" + tag, 0.0, kInf, lam);
      for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> terms;
        terms.push_back({cs.density_var(s, t + 1, i), 1.0});
        double rhs = 0.0;
        for (int j = 0; j < n; ++j) {
          const double mij = Mk[s][t](i, j);
          if (mij != 0.0) terms.push_back({cs.density_var(s, t, j), -mij});
          const int mvar = mv.at(s, t, i, j);
          if (mvar >= 0 && xk[s][t](j) != 0.0)
            terms.push_back({mvar, -xk[s][t](j)});
          rhs -= mij * xk[s][t](j);
        }
        const std::string itag = tag + "_" + std::to_string(i);
        if (opts.trust.inf_norm) {
          const int z = m.add_var("z" + itag, -kInf, kInf);
          terms.push_back({z, -1.0});
          m.add_row(terms, RowSense::EQ, rhs);
          m.add_row({{band, 1.0}, {z, -1.0}}, RowSense::GE, 0.0);
          m.add_row({{band, 1.0}, {z, 1.0}}, RowSense::GE, 0.0);
        } else {
          const int zp = m.add_var("zp" + itag, 0.0, kInf, lam);
          const int zm = m.add_var("zm" + itag, 0.0, kInf, lam);
          terms.push_back({zp, -1.0});
          terms.push_back({zm, 1.0});
          m.add_row(terms, RowSense::EQ, rhs);
        }
      }
    }
  }

  /* trust region |x(t) - xk(t)| <= radius for t >= 1 (t = 0 is pinned) */
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    for (int t = 1; t <= k_p; ++t) {
      if (opts.trust.inf_norm) {
        for (int v = 0; v < n; ++v) {
          const int xvar = cs.density_var(s, t, v);
          m.lb[xvar] = std::max(m.lb[xvar], xk[s][t](v) - radius);
          m.ub[xvar] = std::min(m.ub[xvar], xk[s][t](v) + radius);
        }
      } else {
        std::vector<std::pair<int, double>> ball;
        for (int v = 0; v < n; ++v) {
          const int xvar = cs.density_var(s, t, v);
          const int d = m.add_var("tr" + std::to_string(s) + "_" +
                                      std::to_string(t) + "_" +
                                      std::to_string(v),
                                  0.0, kInf);
          m.add_row({{d, 1.0}, {xvar, -1.0}}, RowSense::GE, -xk[s][t](v));
          m.add_row({{d, 1.0}, {xvar, 1.0}}, RowSense::GE, xk[s][t](v));
          ball.push_back({d, 1.0});
        }
        m.add_row(ball, RowSense::LE, radius);
      }
    }
  }

  StepResult step;
  Solution sol = solve_mip(m, solve_opts);
  step.status = sol.status;
  if (sol.status != SolveStatus::Optimal) {
    if (const char *dump = std::getenv("GTLPROCO_TR_DUMP")) {
      write_lp_file(m, dump);
      std::FILE *fp = std::fopen((std::string(dump) + ".point").c_str(), "w");
      for (int s = 0; s < g.sub_swarm_count(); ++s)
        for (int t = 0; t <= k_p; ++t)
          for (int v = 0; v < n; ++v)
            std::fprintf(fp, "x%d_%d_%d %.17g\n", s, t, v, xk[s][t](v));
      std::fclose(fp);
      std::fprintf(stderr, "subproblem status=%d dumped to %s\n",
                   (int)sol.status, dump);
    }
    return step;
  }
  step.x = detail::extract_densities(cs, sol.x);
  step.loop_index = detail::extract_loop_index(cs, sol.x);
  step.linear_cost = sol.objective;
  return step;
}

} // namespace

RelaxedStart mccormick_initialize(const LabeledGraph &g, const DensityState &x0,
                                  const std::vector<GtlRequirement> &reqs,
                                  int k_p, const CostSpec &cost,
                                  const SynthOptions &opts) {
  if (k_p < 1) throw input_error("the trajectory length must be at least 1");
  cost.validate(g);
  ConstraintSystem cs(g, k_p);
  detail::assemble_mccormick_model(cs, x0, reqs, cost, opts);

  RelaxedStart start;
  Solution sol = solve_mip(cs.model(), opts.solve);
  start.status = sol.status;
  if (sol.status != SolveStatus::Optimal) return start;
  start.x = detail::extract_densities(cs, sol.x);
  start.loop_index = detail::extract_loop_index(cs, sol.x);
  start.objective = sol.objective;
  return start;
}

RelaxedStart mccormick_initialize(const LabeledGraph &g, const DensityState &x0,
                                  const Formula &phi, const NodeSet &nodes,
                                  int k_p, const CostSpec &cost,
                                  const SynthOptions &opts) {
  return mccormick_initialize(g, x0, detail::single_requirement(phi, nodes),
                              k_p, cost, opts);
}

MarkovFit recover_markov(const LabeledGraph &g,
                         const std::vector<std::vector<Eigen::VectorXd>> &x,
                         const SolveOptions &opts) {
  const int n = g.node_count();
  if (static_cast<int>(x.size()) != g.sub_swarm_count())
    throw input_error("trajectory sub-swarm count mismatch");
  if (x.empty() || x[0].size() < 2)
    throw input_error("trajectory needs at least two states");
  const int steps = static_cast<int>(x[0].size()) - 1;
  for (const auto &per : x) {
    if (static_cast<int>(per.size()) != steps + 1)
      throw input_error("trajectory length mismatch between sub-swarms");
    for (const auto &xt : per)
      if (xt.size() != n) throw input_error("trajectory dimension mismatch");
  }

  Model m;
  const auto mv = detail::add_matrix_vars(m, g, steps, "M");
  for (int s = 0; s < g.sub_swarm_count(); ++s) {
    for (int t = 0; t < steps; ++t) {
      for (int i = 0; i < n; ++i) {
        const std::string tag = std::to_string(s) + "_" + std::to_string(t) +
                                "_" + std::to_string(i);
        const int zp = m.add_var("zp" + tag, 0.0, kInf, 1.0);
        const int zm = m.add_var("zm" + tag, 0.0, kInf, 1.0);
        std::vector<std::pair<int, double>> terms{{zp, 1.0}, {zm, -1.0}};
        for (int j = 0; j < n; ++j) {
          const int mvar = mv.at(s, t, i, j);
          if (mvar >= 0 && x[s][t](j) != 0.0)
            terms.push_back({mvar, x[s][t](j)});
        }
        m.add_row(terms, RowSense::EQ, x[s][t + 1](i));
      }
    }
  }

  Solution sol = solve_lp(m, opts);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("matrix recovery did not solve: " +
                             to_string(sol.status));
  MarkovFit fit;
  fit.M = detail::extract_matrices(mv, g, steps, sol.x);
  fit.residual = sol.objective;
  return fit;
}

SynthesisResult synthesize_general(const LabeledGraph &g,
                                   const DensityState &x0,
                                   const std::vector<GtlRequirement> &reqs,
                                   int k_p, const CostSpec &cost,
                                   const SynthOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrustRegionParams &tr = opts.trust;
  tr.validate();

  SynthesisResult res;
  res.diagnostics.path = "sequential-milp";
  const auto remaining = [&]() {
    return opts.solve.time_limit_sec - wall_seconds(t0);
  };
  const auto sub_opts = [&]() {
    SolveOptions so = opts.solve;
    so.time_limit_sec = remaining();
    return so;
  };

  RelaxedStart start = mccormick_initialize(g, x0, reqs, k_p, cost, opts);
  if (start.status != SolveStatus::Optimal) {
    res.status = detail::from_solve_status(start.status);
    if (res.status == SynthStatus::Success)
      res.status = SynthStatus::NumericalTrouble;
    res.diagnostics.message = "relaxed start: " + to_string(start.status);
    res.diagnostics.wall_time_sec = wall_seconds(t0);
    return res;
  }

  auto xk = start.x;
  int loopk = start.loop_index.value_or(1);
  MarkovFit fit = recover_markov(g, xk, sub_opts());
  auto Mk = fit.M;
  double fk = fit.residual;
  double lhat_k = detail::cost_value(cost, xk, Mk, loopk) + tr.lambda * fk;
  res.diagnostics.log.push_back({0, tr.r0, lhat_k, fk, 0.0, true});

  struct Best {
    std::vector<std::vector<Eigen::VectorXd>> x;
    std::vector<std::vector<Eigen::MatrixXd>> M;
    int loop = 1;
    double f = 0.0;
  } best{xk, Mk, loopk, fk};

  double radius = tr.r0;
  int k = 0;
  bool converged = false;
  for (int pass = 1; pass <= tr.max_passes && radius > tr.r_min; ++pass) {
    if (remaining() <= 0.0) {
      res.status = SynthStatus::TimeLimit;
      res.diagnostics.message = "time limit during the trust-region loop";
      break;
    }
    StepResult step = solve_subproblem(g, x0, reqs, k_p, cost, opts, xk, Mk,
                                       radius, sub_opts());
    if (step.status == SolveStatus::Infeasible) {
      res.status = SynthStatus::Infeasible;
      res.diagnostics.message = "linearized subproblem infeasible";
      res.diagnostics.wall_time_sec = wall_seconds(t0);
      return res;
    }
    if (step.status != SolveStatus::Optimal) {
      res.status = detail::from_solve_status(step.status);
      res.diagnostics.message = "subproblem: " + to_string(step.status);
      break;
    }
    MarkovFit refit = recover_markov(g, step.x, sub_opts());
    const double fp = refit.residual;
    const double dl = std::abs(step.linear_cost - lhat_k);
    const double rho = fp / std::max(fk, 1e-15);
    const bool accept = rho <= 1.0;
    res.diagnostics.log.push_back(
        {k, radius, step.linear_cost, fp, rho, accept});

    if (dl <= tr.eps_tol && (fk <= tr.eps_acc || fp <= tr.eps_acc)) {
      if (fp < fk) best = {step.x, refit.M, step.loop_index, fp};
      else best = {xk, Mk, loopk, fk};
      converged = true;
      break;
    }
    if (accept) {
      xk = step.x;
      Mk = refit.M;
      loopk = step.loop_index;
      fk = fp;
      lhat_k = step.linear_cost;
      ++k;
      if (fk < best.f) best = {xk, Mk, loopk, fk};
      radius = radius * std::min(1.0 / std::max(rho, 1e-15), tr.r_exp);
    } else {
      radius = radius / std::min(tr.r_con, rho);
    }
  }

  if (res.status != SynthStatus::TimeLimit &&
      res.status != SynthStatus::NumericalTrouble &&
      res.diagnostics.message.empty()) {
    res.status = (converged || best.f <= tr.eps_acc)
                     ? SynthStatus::Success
                     : SynthStatus::InaccurateLocalSolution;
    if (!converged && res.status == SynthStatus::InaccurateLocalSolution)
      res.diagnostics.message =
          "trust region exhausted before reaching the accuracy tolerance";
  }

  /* package the best iterate */
  for (auto &per : best.x)
    for (auto &xt : per) sanitize_density(xt);
  res.plan.M = best.M;
  for (auto &per : res.plan.M)
    for (auto &mat : per) sanitize_column_stochastic(mat);
  res.plan.k_p = k_p;
  res.plan.loop_index = best.loop;
  res.trajectory.x = best.x;
  res.trajectory.loop_index = best.loop;
  res.diagnostics.objective =
      detail::cost_value(cost, best.x, best.M, best.loop);
  res.diagnostics.bilinear_gap = bilinear_error(res.plan, res.trajectory);
  if (res.status == SynthStatus::Success &&
      res.diagnostics.bilinear_gap > tr.eps_acc)
    res.status = SynthStatus::InaccurateLocalSolution;
  if ((res.status == SynthStatus::Success ||
       res.status == SynthStatus::InaccurateLocalSolution) &&
      !detail::verify_requirements(g, res.trajectory, reqs, 1e-7)) {
    res.status = SynthStatus::NumericalTrouble;
    res.diagnostics.message =
        "solution trajectory failed the exact semantics re-check";
  }
  res.diagnostics.wall_time_sec = wall_seconds(t0);
  return res;
}

SynthesisResult synthesize_general(const LabeledGraph &g,
                                   const DensityState &x0, const Formula &phi,
                                   const NodeSet &nodes, int k_p,
                                   const CostSpec &cost,
                                   const SynthOptions &opts) {
  return synthesize_general(g, x0, detail::single_requirement(phi, nodes), k_p,
                            cost, opts);
}

} // namespace gtlproco
