#include "gtlproco/formula.hpp"

#include "gtlproco/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gtlproco {

std::string cmp_to_string(Cmp c) {
  switch (c) {
  case Cmp::LE: return "<=";
  case Cmp::GE: return ">=";
  case Cmp::EQ: return "=";
  case Cmp::LT: return "<";
  case Cmp::GT: return ">";
  }
  return "?";
}

static std::string num_to_string(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

std::vector<AtomSpec::LoweredRow> AtomSpec::lowered() const {
  std::vector<LoweredRow> rows;
  const int d = dim();
  auto push = [&](const Eigen::RowVectorXd &a, double b, Cmp c) {
    switch (c) {
    case Cmp::LE: rows.push_back({a, b}); break;
    case Cmp::LT: rows.push_back({a, b - kStrictnessDelta}); break;
    case Cmp::GE: rows.push_back({-a, -b}); break;
    case Cmp::GT: rows.push_back({-a, -b - kStrictnessDelta}); break;
    case Cmp::EQ:
      rows.push_back({a, b});
      rows.push_back({-a, -b});
      break;
    }
  };
  if (componentwise) {
    for (int k = 0; k < d; ++k) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(d);
      e(k) = 1.0;
      push(e, rhs_vec(k), cmp);
    }
  } else {
    push(row, rhs_scalar, cmp);
  }
  return rows;
}

std::string AtomSpec::to_string() const {
  std::ostringstream os;
  if (componentwise) {
    os << "y " << cmp_to_string(cmp) << " [";
    for (int k = 0; k < rhs_vec.size(); ++k) {
      if (k) os << ", ";
      os << num_to_string(rhs_vec(k));
    }
    os << "]";
  } else {
    os << "[";
    for (int k = 0; k < row.size(); ++k) {
      if (k) os << ", ";
      os << num_to_string(row(k));
    }
    os << "] . y " << cmp_to_string(cmp) << " " << num_to_string(rhs_scalar);
  }
  return os.str();
}

bool AtomSpec::operator==(const AtomSpec &other) const {
  if (componentwise != other.componentwise || cmp != other.cmp) return false;
  if (componentwise)
    return rhs_vec.size() == other.rhs_vec.size() && rhs_vec == other.rhs_vec;
  return row.size() == other.row.size() && row == other.row &&
         rhs_scalar == other.rhs_scalar;
}

static std::unique_ptr<Formula> node(FormulaKind k) {
  return std::make_unique<Formula>(k);
}

std::unique_ptr<Formula> Formula::make_true() { return node(FormulaKind::True); }
std::unique_ptr<Formula> Formula::make_false() {
  return node(FormulaKind::False);
}
std::unique_ptr<Formula> Formula::make_atom(AtomSpec a) {
  auto f = node(FormulaKind::Atomic);
  f->atom = std::move(a);
  return f;
}
std::unique_ptr<Formula> Formula::make_not(std::unique_ptr<Formula> c) {
  auto f = node(FormulaKind::Not);
  f->lhs = std::move(c);
  return f;
}
std::unique_ptr<Formula> Formula::make_and(std::unique_ptr<Formula> a,
                                           std::unique_ptr<Formula> b) {
  auto f = node(FormulaKind::And);
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}
std::unique_ptr<Formula> Formula::make_or(std::unique_ptr<Formula> a,
                                          std::unique_ptr<Formula> b) {
  auto f = node(FormulaKind::Or);
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}
std::unique_ptr<Formula> Formula::make_next(std::unique_ptr<Formula> c) {
  auto f = node(FormulaKind::Next);
  f->lhs = std::move(c);
  return f;
}
std::unique_ptr<Formula> Formula::make_until(std::unique_ptr<Formula> a,
                                             std::unique_ptr<Formula> b) {
  auto f = node(FormulaKind::Until);
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}
std::unique_ptr<Formula> Formula::make_eventually(std::unique_ptr<Formula> c) {
  auto f = node(FormulaKind::Eventually);
  f->lhs = std::move(c);
  return f;
}
std::unique_ptr<Formula> Formula::make_always(std::unique_ptr<Formula> c) {
  auto f = node(FormulaKind::Always);
  f->lhs = std::move(c);
  return f;
}
std::unique_ptr<Formula>
Formula::make_eventually_always(std::unique_ptr<Formula> c) {
  auto f = node(FormulaKind::EventuallyAlways);
  f->lhs = std::move(c);
  return f;
}
std::unique_ptr<Formula>
Formula::make_always_eventually(std::unique_ptr<Formula> c) {
  auto f = node(FormulaKind::AlwaysEventually);
  f->lhs = std::move(c);
  return f;
}
std::unique_ptr<Formula> Formula::make_exists(int count, int depth,
                                              std::unique_ptr<Formula> c) {
  if (count < 1) throw input_error("neighbor count must be >= 1");
  if (depth < 1) throw input_error("neighbor depth must be >= 1");
  auto f = node(FormulaKind::ExistsN);
  f->count = count;
  f->depth = depth;
  f->lhs = std::move(c);
  return f;
}

std::unique_ptr<Formula> Formula::clone() const {
  auto f = node(kind);
  f->atom = atom;
  f->count = count;
  f->depth = depth;
  if (lhs) f->lhs = lhs->clone();
  if (rhs) f->rhs = rhs->clone();
  return f;
}

std::string Formula::to_string() const {
  auto paren = [](const Formula &f) {
    std::string s = f.to_string();
    switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      return s;
    default:
      return "(" + s + ")";
    }
  };
  switch (kind) {
  case FormulaKind::True: return "true";
  case FormulaKind::False: return "false";
  case FormulaKind::Atomic: return atom.to_string();
  case FormulaKind::Not: return "!" + paren(*lhs);
  case FormulaKind::And: return paren(*lhs) + " & " + paren(*rhs);
  case FormulaKind::Or: return paren(*lhs) + " | " + paren(*rhs);
  case FormulaKind::Next: return "X" + paren(*lhs);
  case FormulaKind::Until: return paren(*lhs) + " U " + paren(*rhs);
  case FormulaKind::Eventually: return "F" + paren(*lhs);
  case FormulaKind::Always: return "G" + paren(*lhs);
  case FormulaKind::EventuallyAlways: return "FG" + paren(*lhs);
  case FormulaKind::AlwaysEventually: return "GF" + paren(*lhs);
  case FormulaKind::ExistsN: {
    std::string os = "E^" + std::to_string(count) + " ";
    for (int i = 0; i < depth; ++i) os += "o";
    return os + " " + paren(*lhs);
  }
  }
  return "?";
}

bool Formula::equals(const Formula &other) const {
  if (kind != other.kind) return false;
  if (kind == FormulaKind::Atomic && !(atom == other.atom)) return false;
  if (count != other.count || depth != other.depth) return false;
  if ((lhs == nullptr) != (other.lhs == nullptr)) return false;
  if ((rhs == nullptr) != (other.rhs == nullptr)) return false;
  if (lhs && !lhs->equals(*other.lhs)) return false;
  if (rhs && !rhs->equals(*other.rhs)) return false;
  return true;
}

bool Formula::has_temporal_operator() const {
  switch (kind) {
  case FormulaKind::Next:
  case FormulaKind::Until:
  case FormulaKind::Eventually:
  case FormulaKind::Always:
  case FormulaKind::EventuallyAlways:
  case FormulaKind::AlwaysEventually:
    return true;
  default:
    break;
  }
  return (lhs && lhs->has_temporal_operator()) ||
         (rhs && rhs->has_temporal_operator());
}

int Formula::temporal_depth() const {
  int child = 0;
  if (lhs) child = std::max(child, lhs->temporal_depth());
  if (rhs) child = std::max(child, rhs->temporal_depth());
  switch (kind) {
  case FormulaKind::Next:
  case FormulaKind::Until:
  case FormulaKind::Eventually:
  case FormulaKind::Always:
    return child + 1;
  case FormulaKind::EventuallyAlways:
  case FormulaKind::AlwaysEventually:
    return child + 2;
  default:
    return child;
  }
}

int Formula::atom_dim() const {
  int d = -1;
  auto merge = [&](int other) {
    if (other < 0) return;
    if (d < 0) d = other;
    else if (d != other)
      throw input_error("formula mixes atoms of different label dimensions");
  };
  if (kind == FormulaKind::Atomic) merge(atom.dim());
  if (lhs) merge(lhs->atom_dim());
  if (rhs) merge(rhs->atom_dim());
  return d;
}

} // namespace gtlproco
