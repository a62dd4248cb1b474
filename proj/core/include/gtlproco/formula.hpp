#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace gtlproco {

/* Tightening applied when lowering strict comparisons to non-strict rows. */
inline constexpr double kStrictnessDelta = 1e-6;

enum class Cmp { LE, GE, EQ, LT, GT };

std::string cmp_to_string(Cmp c);

/*
 * Atomic proposition over a node label value y (in R^d). Two surface forms:
 *   y cmp [v_1, ..., v_d]      componentwise comparison
 *   [a_1, ..., a_d] . y cmp c  single affine row
 * Semantics are the conjunction of the lowered rows a.y <= b, with strict
 * comparisons tightened by kStrictnessDelta and equality split in two rows.
 */
struct AtomSpec {
  bool componentwise = true;
  Cmp cmp = Cmp::LE;
  Eigen::VectorXd rhs_vec;    /* componentwise form */
  Eigen::RowVectorXd row;     /* row form */
  double rhs_scalar = 0.0;    /* row form */

  int dim() const {
    return componentwise ? static_cast<int>(rhs_vec.size())
                         : static_cast<int>(row.size());
  }

  struct LoweredRow {
    Eigen::RowVectorXd a;
    double b;
  };
  /* rows a.y <= b equivalent to the atom */
  std::vector<LoweredRow> lowered() const;

  std::string to_string() const;
  bool operator==(const AtomSpec &other) const;
};

enum class FormulaKind {
  True,
  False,
  Atomic,
  Not,
  And,
  Or,
  Next,
  Until,
  Eventually,
  Always,
  EventuallyAlways, /* FG */
  AlwaysEventually, /* GF */
  ExistsN
};

class Formula {
public:
  FormulaKind kind;
  std::unique_ptr<Formula> lhs;
  std::unique_ptr<Formula> rhs;
  AtomSpec atom;     /* Atomic only */
  int count = 0;     /* ExistsN: required number of satisfying neighbors */
  int depth = 0;     /* ExistsN: successor-set iteration depth */

  explicit Formula(FormulaKind k) : kind(k) {}

  static std::unique_ptr<Formula> make_true();
  static std::unique_ptr<Formula> make_false();
  static std::unique_ptr<Formula> make_atom(AtomSpec a);
  static std::unique_ptr<Formula> make_not(std::unique_ptr<Formula> f);
  static std::unique_ptr<Formula> make_and(std::unique_ptr<Formula> a,
                                           std::unique_ptr<Formula> b);
  static std::unique_ptr<Formula> make_or(std::unique_ptr<Formula> a,
                                          std::unique_ptr<Formula> b);
  static std::unique_ptr<Formula> make_next(std::unique_ptr<Formula> f);
  static std::unique_ptr<Formula> make_until(std::unique_ptr<Formula> a,
                                             std::unique_ptr<Formula> b);
  static std::unique_ptr<Formula> make_eventually(std::unique_ptr<Formula> f);
  static std::unique_ptr<Formula> make_always(std::unique_ptr<Formula> f);
  static std::unique_ptr<Formula>
  make_eventually_always(std::unique_ptr<Formula> f);
  static std::unique_ptr<Formula>
  make_always_eventually(std::unique_ptr<Formula> f);
  static std::unique_ptr<Formula> make_exists(int count, int depth,
                                              std::unique_ptr<Formula> f);

  std::unique_ptr<Formula> clone() const;
  std::string to_string() const;
  bool equals(const Formula &other) const;

  bool has_temporal_operator() const;
  /* nesting depth of temporal operators (X, U, F, G, FG, GF) */
  int temporal_depth() const;
  /* label dimension used by atoms; -1 if none; throws on mixed dims */
  int atom_dim() const;
};

} // namespace gtlproco
