#pragma once

#include "gtlproco/constraint_system.hpp"
#include "gtlproco/formula.hpp"

#include <vector>

namespace gtlproco {

/*
 * Certified big-M for the formula's atomic rows: at least
 * max over rows of (|offset| + sum |coefficients|) + |rhs| + 1,
 * which bounds |a.f(x) - b| over the density simplex.
 */
double choose_big_m(const LabeledGraph &graph, const Formula &phi);

struct EncodeResult {
  std::vector<int> root_vars;  /* one per requested node, pinned to 1 */
  int binaries_added = 0;      /* formula binaries, loop vars excluded */
};

/*
 * Lowers phi at each requested node into mixed-integer rows on the system's
 * model, per-position satisfaction variables, lasso wrap via the loop
 * binaries, and counting rows for the neighbor operator. Roots are pinned
 * to 1. Requires encode_loop to have run (its big-M is reused here).
 *
 * Subformula variables are continuous wherever a forcing chain makes their
 * value exact; binaries are spent only on disjunction certificates, on
 * atoms that must signal falsity, and on neighbor-count indicators.
 */
EncodeResult encode_formula(ConstraintSystem &cs, const Formula &phi,
                            const std::vector<int> &nodes);

/*
 * Independent count of the binaries encode_formula will add for phi
 * (loop variables excluded); used to cross-check the encoder.
 */
int predict_binary_count(const LabeledGraph &graph, const Formula &phi,
                         const std::vector<int> &nodes, int k_p);

} // namespace gtlproco
