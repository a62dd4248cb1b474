#include "gtlproco/constraint_system.hpp"

#include <map>

namespace gtlproco {

ConstraintSystem::ConstraintSystem(const LabeledGraph &graph, int k_p)
    : graph_(&graph), k_p_(k_p) {
  if (k_p < 1) throw input_error("horizon k_p must be at least 1");
}

int ConstraintSystem::density_var(int s, int t, int v) {
  const int n = graph_->node_count();
  if (s < 0 || s >= graph_->sub_swarm_count() || t < 0 || t > k_p_ || v < 0 ||
      v >= n)
    throw input_error("density variable index out of range");
  const long long key =
      (static_cast<long long>(s) * (k_p_ + 1) + t) * n + v;
  auto it = density_.find(key);
  if (it != density_.end()) return it->second;
  const int var = model_.add_var("x" + std::to_string(s) + "_" +
                                     std::to_string(t) + "_" +
                                     std::to_string(v),
                                 0.0, 1.0);
  density_.emplace(key, var);
  return var;
}

ConstraintSystem::LinExpr ConstraintSystem::label_expr(int v, int t, int row) {
  const AffineLabel &lab = graph_->label(v);
  if (row < 0 || row >= lab.dim())
    throw input_error("label row out of range");
  LinExpr e;
  e.offset = lab.c0(row);
  const int n = graph_->node_count();
  for (int s = 0; s < graph_->sub_swarm_count(); ++s)
    for (int u = 0; u < n; ++u) {
      const double c = lab.C(row, s * n + u);
      if (c != 0.0) e.terms.emplace_back(density_var(s, t, u), c);
    }
  return e;
}

void ConstraintSystem::encode_loop(double big_m) {
  if (loop_encoded()) throw input_error("loop already encoded");
  if (!(big_m > 0.0)) throw input_error("big-M must be positive");
  big_m_ = big_m;
  loop_vars_.reserve(k_p_);
  for (int j = 1; j <= k_p_; ++j)
    loop_vars_.push_back(
        model_.add_var("l" + std::to_string(j), 0.0, 1.0, 0.0, true));
  {
    std::vector<std::pair<int, double>> terms;
    for (int lv : loop_vars_) terms.emplace_back(lv, 1.0);
    model_.add_row(std::move(terms), RowSense::EQ, 1.0, "loop_unique");
  }
  const int n = graph_->node_count();
  for (int j = 1; j <= k_p_; ++j) {
    for (int v = 0; v < n; ++v) {
      const int d = graph_->label(v).dim();
      for (int r = 0; r < d; ++r) {
        LinExpr end = label_expr(v, k_p_, r);
        LinExpr back = label_expr(v, j - 1, r);
        /* diff = g(v, k_p) - g(v, j-1); |diff| <= P (1 - l_j) */
        std::map<int, double> acc;
        for (auto [var, c] : end.terms) acc[var] += c;
        for (auto [var, c] : back.terms) acc[var] -= c;
        const double off = end.offset - back.offset;
        std::vector<std::pair<int, double>> base(acc.begin(), acc.end());
        {
          auto up = base;
          up.emplace_back(loop_vars_[j - 1], big_m);
          model_.add_row(std::move(up), RowSense::LE, big_m - off);
        }
        {
          auto dn = base;
          dn.emplace_back(loop_vars_[j - 1], -big_m);
          model_.add_row(std::move(dn), RowSense::GE, -big_m - off);
        }
      }
    }
  }
}

int ConstraintSystem::loop_var(int j) const {
  if (!loop_encoded()) throw input_error("loop variables not encoded yet");
  if (j < 1 || j > k_p_) throw input_error("loop index out of range");
  return loop_vars_[j - 1];
}

int ConstraintSystem::add_aux(const std::string &name, bool binary) {
  return model_.add_var(name, 0.0, 1.0, 0.0, binary);
}

void ConstraintSystem::make_binary(int var) {
  if (var < 0 || var >= model_.var_count())
    throw input_error("make_binary: variable out of range");
  model_.binary[var] = 1;
}

} // namespace gtlproco
