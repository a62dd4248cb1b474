#include "gtlproco/model.hpp"

#include "gtlproco/graph.hpp"

#include <cmath>

namespace gtlproco {

std::string to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::Optimal: return "optimal";
  case SolveStatus::Infeasible: return "infeasible";
  case SolveStatus::Unbounded: return "unbounded";
  case SolveStatus::IterationLimit: return "iteration-limit";
  case SolveStatus::TimeLimit: return "time-limit";
  case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

int Model::binary_count() const {
  int k = 0;
  for (auto b : binary) k += b ? 1 : 0;
  return k;
}

int Model::add_var(const std::string &name, double lo, double hi, double cost,
                   bool is_binary) {
  var_names.push_back(name);
  lb.push_back(lo);
  ub.push_back(hi);
  obj.push_back(cost);
  binary.push_back(is_binary ? 1 : 0);
  return static_cast<int>(lb.size()) - 1;
}

void Model::add_row(std::vector<std::pair<int, double>> terms, RowSense sense,
                    double rhs, const std::string &name) {
  Row r;
  r.terms = std::move(terms);
  r.sense = sense;
  r.rhs = rhs;
  r.name = name.empty() ? "c" + std::to_string(rows.size()) : name;
  rows.push_back(std::move(r));
}

void Model::validate() const {
  const int n = var_count();
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lb[j]) || std::isnan(ub[j]) || lb[j] > ub[j])
      throw input_error("invalid bounds on variable " + var_names[j]);
    if (binary[j] && (lb[j] < -1e-12 || ub[j] > 1.0 + 1e-12))
      throw input_error("binary variable " + var_names[j] +
                        " has bounds outside [0, 1]");
    if (!std::isfinite(obj[j]))
      throw input_error("non-finite objective on " + var_names[j]);
  }
  for (const auto &r : rows) {
    if (!std::isfinite(r.rhs))
      throw input_error("non-finite right-hand side in row " + r.name);
    for (auto [j, v] : r.terms) {
      if (j < 0 || j >= n)
        throw input_error("row " + r.name + " references unknown variable");
      if (!std::isfinite(v))
        throw input_error("non-finite coefficient in row " + r.name);
    }
  }
}

double Model::row_activity(const Model::Row &row,
                           const Eigen::VectorXd &x) const {
  double a = 0.0;
  for (auto [j, v] : row.terms) a += v * x(j);
  return a;
}

double Model::max_violation(const Eigen::VectorXd &x) const {
  double worst = 0.0;
  for (int j = 0; j < var_count(); ++j) {
    if (std::isfinite(lb[j])) worst = std::max(worst, lb[j] - x(j));
    if (std::isfinite(ub[j])) worst = std::max(worst, x(j) - ub[j]);
  }
  for (const auto &r : rows) {
    const double a = row_activity(r, x);
    switch (r.sense) {
    case RowSense::LE: worst = std::max(worst, a - r.rhs); break;
    case RowSense::GE: worst = std::max(worst, r.rhs - a); break;
    case RowSense::EQ: worst = std::max(worst, std::abs(a - r.rhs)); break;
    }
  }
  return worst;
}

double Model::objective_value(const Eigen::VectorXd &x) const {
  double v = obj_offset;
  for (int j = 0; j < var_count(); ++j) v += obj[j] * x(j);
  return v;
}

} // namespace gtlproco
