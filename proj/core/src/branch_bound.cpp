#include "gtlproco/branch_bound.hpp"

#include "gtlproco/simplex.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

namespace gtlproco {

namespace {

struct NodeData {
  std::shared_ptr<const NodeData> parent;
  int var = -1;
  double lo = 0.0;
  double hi = 0.0;
  std::shared_ptr<const LpEngine::Basis> basis;
};

struct Node {
  double bound = -kInf;
  long seq = 0;
  std::shared_ptr<const NodeData> data;
};

struct NodeCmp {
  bool operator()(const Node &a, const Node &b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

void apply_chain(LpEngine &eng, const NodeData *d) {
  /* deeper fixings override shallower ones, so apply root-first */
  std::vector<const NodeData *> chain;
  for (; d != nullptr; d = d->parent.get())
    if (d->var >= 0) chain.push_back(d);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    eng.set_bounds((*it)->var, (*it)->lo, (*it)->hi);
}

int pick_branch_var(const Eigen::VectorXd &x, const std::vector<int> &bins,
                    double int_tol) {
  int best = -1;
  double best_frac = int_tol;
  for (int j : bins) {
    const double f = std::abs(x(j) - std::round(x(j)));
    if (f > best_frac + 1e-12) {
      best_frac = f;
      best = j;
    }
  }
  return best;
}

} // namespace

Solution solve_mip(const Model &model, const SolveOptions &opts,
                   const MipCallbacks &callbacks) {
  if (model.maximize) {
    Model flipped = model;
    flipped.maximize = false;
    for (double &c : flipped.obj) c = -c;
    flipped.obj_offset = -flipped.obj_offset;
    MipCallbacks wrapped;
    if (callbacks.on_incumbent)
      wrapped.on_incumbent = [&](const Eigen::VectorXd &x, double v) {
        callbacks.on_incumbent(x, -v);
      };
    Solution sol = solve_mip(flipped, opts, wrapped);
    sol.objective = -sol.objective;
    sol.best_bound = -sol.best_bound;
    return sol;
  }
  std::vector<int> bins;
  for (int j = 0; j < model.var_count(); ++j)
    if (model.binary[j]) bins.push_back(j);

  LpEngine eng(model, opts);
  auto deadline = std::chrono::steady_clock::time_point::max();
  if (std::isfinite(opts.time_limit_sec))
    deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(opts.time_limit_sec));
  eng.set_deadline(deadline);

  Solution root = eng.solve();
  long nodes = 1;
  long iters = root.iterations;
  if (root.status != SolveStatus::Optimal || bins.empty()) {
    root.nodes = nodes;
    root.best_bound = root.objective;
    if (root.status == SolveStatus::Optimal && bins.empty() &&
        callbacks.on_incumbent)
      callbacks.on_incumbent(root.x, root.objective);
    return root;
  }

  double best_obj = kInf;
  Eigen::VectorXd best_x;
  bool have_inc = false;
  bool numerical_trouble = false;
  SolveStatus stop_status = SolveStatus::Optimal;
  bool stopped = false;

  std::priority_queue<Node, std::vector<Node>, NodeCmp> heap;
  long seq = 0;

  auto gap_cut = [&]() {
    if (!have_inc) return kInf;
    return best_obj - opts.mip_rel_gap * std::max(1.0, std::abs(best_obj));
  };

  /* returns the dive child when the node branches, nothing otherwise */
  auto process =
      [&](const Solution &sol, const std::shared_ptr<const NodeData> &data)
      -> std::optional<std::shared_ptr<const NodeData>> {
    iters += sol.iterations;
    if (sol.status == SolveStatus::Infeasible) return std::nullopt;
    if (sol.status == SolveStatus::TimeLimit) {
      stopped = true;
      stop_status = SolveStatus::TimeLimit;
      return std::nullopt;
    }
    if (sol.status != SolveStatus::Optimal) {
      numerical_trouble = true;
      return std::nullopt;
    }
    if (sol.objective >= gap_cut()) return std::nullopt;

    int q = pick_branch_var(sol.x, bins, opts.int_tol);
    if (q < 0) {
      /* integral within tolerance; a binary at 1 - eps still loosens its
         big-M rows, so polish to an exactly integral point by fixing every
         binary at its rounded value and re-solving before accepting */
      int worst = -1;
      double worst_frac = 1e-12;
      for (int j : bins) {
        const double f = std::abs(sol.x(j) - std::round(sol.x(j)));
        if (f > worst_frac) {
          worst_frac = f;
          worst = j;
        }
      }
      Solution inc = sol;
      bool usable = true;
      if (worst >= 0) {
        for (int j : bins) {
          const double v = std::round(sol.x(j));
          eng.set_bounds(j, v, v);
        }
        inc = eng.resolve();
        iters += inc.iterations;
        eng.reset_bounds();
        apply_chain(eng, data.get());
        if (inc.status == SolveStatus::TimeLimit) {
          stopped = true;
          stop_status = SolveStatus::TimeLimit;
          return std::nullopt;
        }
        usable = inc.status == SolveStatus::Optimal;
      }
      if (usable) {
        if (inc.objective < best_obj - 1e-12) {
          best_obj = inc.objective;
          best_x = inc.x;
          have_inc = true;
          if (callbacks.on_incumbent) callbacks.on_incumbent(best_x, best_obj);
        }
        return std::nullopt;
      }
      /* the rounding is infeasible: branch the worst binary to exactness */
      q = worst;
    }

    auto snapshot = std::make_shared<const LpEngine::Basis>(eng.basis());
    const double near_v = std::round(sol.x(q));
    const double far_v = 1.0 - near_v;

    auto far_data = std::make_shared<NodeData>();
    far_data->parent = data;
    far_data->var = q;
    far_data->lo = far_v;
    far_data->hi = far_v;
    far_data->basis = snapshot;
    heap.push(Node{sol.objective, seq++, far_data});

    auto dive_data = std::make_shared<NodeData>();
    dive_data->parent = data;
    dive_data->var = q;
    dive_data->lo = near_v;
    dive_data->hi = near_v;
    dive_data->basis = snapshot;
    return std::make_optional<std::shared_ptr<const NodeData>>(dive_data);
  };

  auto dive = process(root, nullptr);
  double dive_bound = root.objective;

  while (!stopped) {
    std::shared_ptr<const NodeData> data;
    bool warm_in_place = false;
    double parent_bound;
    if (dive.has_value()) {
      data = *dive;
      dive.reset();
      warm_in_place = true;
      parent_bound = dive_bound;
    } else {
      if (heap.empty()) break;
      Node top = heap.top();
      heap.pop();
      if (top.bound >= gap_cut()) continue;
      data = top.data;
      parent_bound = top.bound;
    }

    if (nodes >= opts.max_nodes) {
      stopped = true;
      stop_status = SolveStatus::IterationLimit;
      /* restore bookkeeping for the bound report */
      heap.push(Node{parent_bound, seq++, data});
      break;
    }
    if (std::chrono::steady_clock::now() > deadline) {
      stopped = true;
      stop_status = SolveStatus::TimeLimit;
      heap.push(Node{parent_bound, seq++, data});
      break;
    }

    if (warm_in_place) {
      eng.set_bounds(data->var, data->lo, data->hi);
    } else {
      eng.reset_bounds();
      apply_chain(eng, data.get());
      if (data->basis) eng.load_basis(*data->basis);
    }
    Solution sol = eng.resolve();
    ++nodes;
    dive = process(sol, data);
    if (dive.has_value()) dive_bound = sol.objective;
  }

  Solution out;
  out.nodes = nodes;
  out.iterations = iters;
  out.duals = Eigen::VectorXd::Zero(model.row_count());
  double lower = have_inc ? best_obj : kInf;
  if (!heap.empty()) lower = std::min(lower, heap.top().bound);
  if (dive.has_value()) lower = std::min(lower, dive_bound);
  out.best_bound = lower;
  if (have_inc) {
    out.status = stopped ? stop_status : SolveStatus::Optimal;
    out.x = best_x;
    out.objective = best_obj;
    out.max_violation = model.max_violation(best_x);
  } else if (stopped) {
    out.status = stop_status;
    out.objective = kInf;
  } else if (numerical_trouble) {
    out.status = SolveStatus::NumericalFailure;
    out.objective = kInf;
  } else {
    out.status = SolveStatus::Infeasible;
    out.objective = kInf;
  }
  return out;
}

} // namespace gtlproco
