#pragma once

#include "gtlproco/model.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <chrono>
#include <memory>

namespace gtlproco {

/*
 * Bounded-variable revised simplex over a sparse column store, with an
 * LU-factorized basis refreshed periodically and product-form updates in
 * between. Deterministic: Dantzig pricing with lowest-index tie breaks and
 * a Bland fallback that engages after a run of degenerate steps.
 */
class LpEngine {
public:
  LpEngine(const Model &model, const SolveOptions &opts);
  ~LpEngine();

  LpEngine(const LpEngine &) = delete;
  LpEngine &operator=(const LpEngine &) = delete;

  /* two-phase primal solve from a fresh logical basis */
  Solution solve();

  /* tighten/relax a structural variable's bounds (keeps current basis) */
  void set_bounds(int var, double lo, double hi);
  void reset_bounds();

  /* re-optimize with the dual simplex from the current (dual feasible)
     basis after bound changes; falls back to a fresh primal solve when the
     warm start cannot be used */
  Solution resolve();

  struct Basis {
    std::vector<std::int8_t> vstat;
    std::vector<int> basic;
  };
  Basis basis() const;
  void load_basis(const Basis &b);
  bool has_valid_basis() const;

  /* deadline shared by solve/resolve; steady-clock time point */
  void set_deadline(std::chrono::steady_clock::time_point tp);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/* One-shot LP solve. Duals are reported per row: the objective change per
   unit increase of the row's right-hand side. */
Solution solve_lp(const Model &model, const SolveOptions &opts = {});

} // namespace gtlproco
