#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace gtlproco {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LE, GE, EQ };

enum class SolveStatus {
  Optimal,
  Infeasible,
  Unbounded,
  IterationLimit,
  TimeLimit,
  NumericalFailure
};

std::string to_string(SolveStatus s);

/* Linear program / mixed-binary program in minimization form. */
struct Model {
  struct Row {
    std::vector<std::pair<int, double>> terms;
    RowSense sense = RowSense::LE;
    double rhs = 0.0;
    std::string name;
  };

  std::vector<std::string> var_names;
  std::vector<double> lb;
  std::vector<double> ub;
  std::vector<std::uint8_t> binary;
  std::vector<double> obj;
  double obj_offset = 0.0;
  bool maximize = false;
  std::vector<Row> rows;

  int var_count() const { return static_cast<int>(lb.size()); }
  int row_count() const { return static_cast<int>(rows.size()); }
  int binary_count() const;

  int add_var(const std::string &name, double lo, double hi, double cost = 0.0,
              bool is_binary = false);
  void add_row(std::vector<std::pair<int, double>> terms, RowSense sense,
               double rhs, const std::string &name = "");

  /* checks index ranges, finite rhs, lb <= ub, binary bounds within [0,1] */
  void validate() const;

  double row_activity(const Model::Row &row,
                      const Eigen::VectorXd &x) const;
  /* largest violation of any row or bound at x */
  double max_violation(const Eigen::VectorXd &x) const;
  double objective_value(const Eigen::VectorXd &x) const;
};

struct SolveOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;
  double int_tol = 1e-6;
  double mip_rel_gap = 1e-6;
  long max_iterations = -1; /* -1: automatic */
  long max_nodes = 200000;
  double time_limit_sec = kInf;
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd duals; /* per row; filled by pure LP solves */
  long iterations = 0;
  long nodes = 0;
  double best_bound = -kInf;
  double max_violation = 0.0;
};

} // namespace gtlproco
