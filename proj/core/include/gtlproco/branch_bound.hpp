#pragma once

#include "gtlproco/model.hpp"

#include <functional>

namespace gtlproco {

/*
 * Branch & bound over the LP relaxation. Node selection is best-first on the
 * parent relaxation bound, with a diving pass that follows the child nearest
 * the fractional value before returning to the queue. Branching picks the
 * binary variable whose relaxation value is farthest from an integer, lowest
 * index on ties. Warm starts reuse the parent basis through the dual simplex.
 */
struct MipCallbacks {
  /* called whenever a new incumbent is accepted */
  std::function<void(const Eigen::VectorXd &, double)> on_incumbent;
};

Solution solve_mip(const Model &model, const SolveOptions &opts = {},
                   const MipCallbacks &callbacks = {});

} // namespace gtlproco
