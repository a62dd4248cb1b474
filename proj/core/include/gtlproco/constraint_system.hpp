#pragma once

#include "gtlproco/graph.hpp"
#include "gtlproco/model.hpp"

#include <unordered_map>
#include <vector>

namespace gtlproco {

/*
 * Variable registry shared by the formula encoder and the synthesis layers:
 * density variables x^s_v(t) over a bounded horizon, the loop-position
 * binaries l_1..l_{k_p} with their label-tie rows, and auxiliary satisfaction
 * variables. Everything lives in one Model so the pieces compose.
 */
class ConstraintSystem {
public:
  ConstraintSystem(const LabeledGraph &graph, int k_p);

  const LabeledGraph &graph() const { return *graph_; }
  int horizon() const { return k_p_; }
  Model &model() { return model_; }
  const Model &model() const { return model_; }

  /* density variable for sub-swarm s, time t in [0, k_p], node v; [0,1] */
  int density_var(int s, int t, int v);

  struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double offset = 0.0;
  };
  /* label component `row` of node v at time t as an affine expression */
  LinExpr label_expr(int v, int t, int row);

  /*
   * Loop-position binaries with the uniqueness equality and, for every
   * candidate j, node and label component, the two big-M rows tying the
   * label at k_p to the label at j-1 when l_j = 1.
   */
  void encode_loop(double big_m);
  bool loop_encoded() const { return !loop_vars_.empty(); }
  int loop_var(int j) const; /* j in 1..k_p */
  double loop_big_m() const { return big_m_; }

  int add_aux(const std::string &name, bool binary);
  void make_binary(int var);

  int binary_count() const { return model_.binary_count(); }

private:
  const LabeledGraph *graph_;
  int k_p_;
  Model model_;
  std::vector<int> loop_vars_;
  double big_m_ = 0.0;
  std::unordered_map<long long, int> density_;
};

} // namespace gtlproco
