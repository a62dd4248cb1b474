#include "gtlproco/encoder.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>

namespace gtlproco {

namespace {

using FPtr = std::unique_ptr<Formula>;

Cmp flipped(Cmp c) {
  switch (c) {
  case Cmp::LE: return Cmp::GT;
  case Cmp::GE: return Cmp::LT;
  case Cmp::LT: return Cmp::GE;
  case Cmp::GT: return Cmp::LE;
  default: throw input_error("cannot flip equality directly");
  }
}

FPtr atom_row(Cmp c, const Eigen::RowVectorXd &a, double b) {
  AtomSpec s;
  s.componentwise = false;
  s.cmp = c;
  s.row = a;
  s.rhs_scalar = b;
  return Formula::make_atom(std::move(s));
}

FPtr or_tree(std::vector<FPtr> parts) {
  FPtr acc = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i)
    acc = Formula::make_or(std::move(acc), std::move(parts[i]));
  return acc;
}

/* the complement of a closed/strict atom is again a union of atoms */
FPtr negate_atom(const AtomSpec &s) {
  std::vector<FPtr> parts;
  if (s.componentwise) {
    const int d = s.dim();
    for (int r = 0; r < d; ++r) {
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(d);
      a(r) = 1.0;
      if (s.cmp == Cmp::EQ) {
        parts.push_back(atom_row(Cmp::LT, a, s.rhs_vec(r)));
        parts.push_back(atom_row(Cmp::GT, a, s.rhs_vec(r)));
      } else {
        parts.push_back(atom_row(flipped(s.cmp), a, s.rhs_vec(r)));
      }
    }
  } else if (s.cmp == Cmp::EQ) {
    parts.push_back(atom_row(Cmp::LT, s.row, s.rhs_scalar));
    parts.push_back(atom_row(Cmp::GT, s.row, s.rhs_scalar));
  } else {
    parts.push_back(atom_row(flipped(s.cmp), s.row, s.rhs_scalar));
  }
  return or_tree(std::move(parts));
}

/*
 * Negation normal form. Negations are pushed through every operator except
 * the neighbor-counting one, whose children are polarity-handled in place;
 * negated Until is rewritten with the identity
 * !(a U b) = G !b | (!b U (!a & !b)).
 */
FPtr nnf(const Formula &f, bool neg) {
  switch (f.kind) {
  case FormulaKind::True:
    return neg ? Formula::make_false() : Formula::make_true();
  case FormulaKind::False:
    return neg ? Formula::make_true() : Formula::make_false();
  case FormulaKind::Atomic:
    return neg ? negate_atom(f.atom) : f.clone();
  case FormulaKind::Not:
    return nnf(*f.lhs, !neg);
  case FormulaKind::And:
    return neg ? Formula::make_or(nnf(*f.lhs, true), nnf(*f.rhs, true))
               : Formula::make_and(nnf(*f.lhs, false), nnf(*f.rhs, false));
  case FormulaKind::Or:
    return neg ? Formula::make_and(nnf(*f.lhs, true), nnf(*f.rhs, true))
               : Formula::make_or(nnf(*f.lhs, false), nnf(*f.rhs, false));
  case FormulaKind::Next:
    return Formula::make_next(nnf(*f.lhs, neg));
  case FormulaKind::Until:
    if (neg)
      return Formula::make_or(
          Formula::make_always(nnf(*f.rhs, true)),
          Formula::make_until(nnf(*f.rhs, true),
                              Formula::make_and(nnf(*f.lhs, true),
                                                nnf(*f.rhs, true))));
    return Formula::make_until(nnf(*f.lhs, false), nnf(*f.rhs, false));
  case FormulaKind::Eventually:
    return neg ? Formula::make_always(nnf(*f.lhs, true))
               : Formula::make_eventually(nnf(*f.lhs, false));
  case FormulaKind::Always:
    return neg ? Formula::make_eventually(nnf(*f.lhs, true))
               : Formula::make_always(nnf(*f.lhs, false));
  case FormulaKind::EventuallyAlways:
    return neg ? Formula::make_always_eventually(nnf(*f.lhs, true))
               : Formula::make_eventually_always(nnf(*f.lhs, false));
  case FormulaKind::AlwaysEventually:
    return neg ? Formula::make_eventually_always(nnf(*f.lhs, true))
               : Formula::make_always_eventually(nnf(*f.lhs, false));
  case FormulaKind::ExistsN: {
    FPtr e = Formula::make_exists(f.count, f.depth, nnf(*f.lhs, false));
    return neg ? Formula::make_not(std::move(e)) : std::move(e);
  }
  }
  throw input_error("unknown formula kind");
}

constexpr int kPosSide = 1;
constexpr int kNegSide = 2;

/* channels distinguish the second lasso pass and per-row atom indicators */
constexpr int kChanMain = 0;
constexpr int kChanSecond = 1;
constexpr int kChanAtomRow = 16;

struct InstKey {
  const Formula *f;
  int node;
  int t;
  int chan;
  bool operator<(const InstKey &o) const {
    return std::tie(f, node, t, chan) < std::tie(o.f, o.node, o.t, o.chan);
  }
};

class Encoder {
public:
  explicit Encoder(ConstraintSystem &cs)
      : cs_(cs), kp_(cs.horizon()), big_m_(cs.loop_big_m()) {
    if (!cs.loop_encoded())
      throw input_error("encode the loop before encoding formulas");
  }

  int encode_root(const Formula &f, int v) {
    if (is_forcible(f)) {
      const int r = cs_.add_aux(fresh_name(), false);
      pin(r, 1.0, 1.0);
      force(f, v, 0);
      return r;
    }
    const int w = need(kPosSide, f, v, 0);
    add_ge({{w, 1.0}}, 1.0);
    return w;
  }

private:
  std::string fresh_name() {
    return "w" + std::to_string(cs_.model().var_count());
  }

  void pin(int var, double lo, double hi) {
    cs_.model().lb[var] = lo;
    cs_.model().ub[var] = hi;
  }

  void add_le(std::vector<std::pair<int, double>> terms, double rhs) {
    cs_.model().add_row(std::move(terms), RowSense::LE, rhs);
  }
  void add_ge(std::vector<std::pair<int, double>> terms, double rhs) {
    cs_.model().add_row(std::move(terms), RowSense::GE, rhs);
  }

  int var_at(const Formula &f, int v, int t, int chan) {
    auto [it, inserted] = vars_.try_emplace(InstKey{&f, v, t, chan}, -1);
    if (inserted) it->second = cs_.add_aux(fresh_name(), false);
    return it->second;
  }

  /* combined density-variable expression of a lowered atom row at (v, t) */
  void atom_terms(const AtomSpec::LoweredRow &row, int v, int t,
                  std::vector<std::pair<int, double>> &terms,
                  double &offset) {
    std::map<int, double> acc;
    offset = 0.0;
    for (int r = 0; r < row.a.size(); ++r) {
      if (row.a(r) == 0.0) continue;
      auto e = cs_.label_expr(v, t, r);
      offset += row.a(r) * e.offset;
      for (auto [var, c] : e.terms) acc[var] += row.a(r) * c;
    }
    terms.assign(acc.begin(), acc.end());
  }

  /* ---- positive side: w = 1 certifies truth ---- */

  void emit_atom_pos(const Formula &f, int v, int t, int w) {
    for (const auto &row : f.atom.lowered()) {
      std::vector<std::pair<int, double>> terms;
      double offset;
      atom_terms(row, v, t, terms, offset);
      terms.emplace_back(w, big_m_);
      add_le(std::move(terms), row.b + big_m_ - offset);
    }
  }

  void emit_atom_neg(const Formula &f, int v, int t, int w) {
    const auto rows = f.atom.lowered();
    if (rows.size() == 1) {
      cs_.make_binary(w);
      std::vector<std::pair<int, double>> terms;
      double offset;
      atom_terms(rows[0], v, t, terms, offset);
      terms.emplace_back(w, big_m_);
      add_ge(std::move(terms), rows[0].b + kStrictnessDelta - offset);
      return;
    }
    /* conjunction of rows: one indicator per row, then w >= sum - (m-1) */
    std::vector<std::pair<int, double>> conj{{w, 1.0}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int ri = var_at(f, v, t, kChanAtomRow + static_cast<int>(i));
      cs_.make_binary(ri);
      std::vector<std::pair<int, double>> terms;
      double offset;
      atom_terms(rows[i], v, t, terms, offset);
      terms.emplace_back(ri, big_m_);
      add_ge(std::move(terms), rows[i].b + kStrictnessDelta - offset);
      conj.emplace_back(ri, -1.0);
    }
    add_ge(std::move(conj), 1.0 - static_cast<double>(rows.size()));
  }

  /* loop-gated disjunction: w <= sum_j a_j, a_j <= l_j, a_j <= part(j) */
  template <class PartFn>
  void emit_gated_pos(const Formula &f, int v, int w, PartFn &&part) {
    std::vector<std::pair<int, double>> sum{{w, 1.0}};
    for (int j = 1; j <= kp_; ++j) {
      const int aj = var_at(f, v, j, kChanAtomRow + 64);
      add_le({{aj, 1.0}, {cs_.loop_var(j), -1.0}}, 0.0);
      add_le({{aj, 1.0}, {part(j), -1.0}}, 0.0);
      sum.emplace_back(aj, -1.0);
    }
    add_le(std::move(sum), 0.0);
  }

  template <class PartFn>
  void emit_gated_neg(const Formula &f, int v, int w, PartFn &&part) {
    (void)f;
    (void)v;
    for (int j = 1; j <= kp_; ++j)
      add_ge({{w, 1.0}, {cs_.loop_var(j), -1.0}, {part(j), -1.0}}, -1.0);
  }

  int chain(const Formula &f, int v, int t, int chan, int side);

  int need(int side, const Formula &f, int v, int t) {
    /* Next below the horizon is an alias of its child one step later */
    if (f.kind == FormulaKind::Next && t < kp_)
      return need(side, *f.lhs, v, t + 1);
    if (f.kind == FormulaKind::Until || f.kind == FormulaKind::Eventually ||
        f.kind == FormulaKind::Always)
      return chain(f, v, t, kChanMain, side);
    if (f.kind == FormulaKind::EventuallyAlways ||
        f.kind == FormulaKind::AlwaysEventually)
      t = 0; /* truth is position-independent */

    const int w = var_at(f, v, t, kChanMain);
    const InstKey key{&f, v, t, kChanMain};
    int &mask = emitted_[key];
    if (mask & side) return w;
    mask |= side;

    switch (f.kind) {
    case FormulaKind::True:
      pin(w, 1.0, 1.0);
      break;
    case FormulaKind::False:
      pin(w, 0.0, 0.0);
      break;
    case FormulaKind::Atomic:
      if (side == kPosSide)
        emit_atom_pos(f, v, t, w);
      else
        emit_atom_neg(f, v, t, w);
      break;
    case FormulaKind::And: {
      const int a = need(side, *f.lhs, v, t);
      const int b = need(side, *f.rhs, v, t);
      if (side == kPosSide) {
        add_le({{w, 1.0}, {a, -1.0}}, 0.0);
        add_le({{w, 1.0}, {b, -1.0}}, 0.0);
      } else {
        /* refuting a conjunction is a cover: one summand must be integral */
        cs_.make_binary(a);
        add_ge({{w, 1.0}, {a, -1.0}, {b, -1.0}}, -1.0);
      }
      break;
    }
    case FormulaKind::Or: {
      const int a = need(side, *f.lhs, v, t);
      const int b = need(side, *f.rhs, v, t);
      if (side == kPosSide) {
        /* one integral summand makes the cover certificate exact */
        cs_.make_binary(a);
        add_le({{w, 1.0}, {a, -1.0}, {b, -1.0}}, 0.0);
      } else {
        add_ge({{w, 1.0}, {a, -1.0}}, 0.0);
        add_ge({{w, 1.0}, {b, -1.0}}, 0.0);
      }
      break;
    }
    case FormulaKind::Not: {
      /* w = 1 - c pins c exactly at a bound, so no integrality is needed */
      const int c = need(side == kPosSide ? kNegSide : kPosSide, *f.lhs, v, t);
      if (side == kPosSide)
        add_le({{w, 1.0}, {c, 1.0}}, 1.0);
      else
        add_ge({{w, 1.0}, {c, 1.0}}, 1.0);
      break;
    }
    case FormulaKind::Next: {
      /* t == k_p: the successor position is j when l_j holds */
      if (side == kPosSide)
        emit_gated_pos(f, v, w,
                       [&](int j) { return need(kPosSide, *f.lhs, v, j); });
      else
        emit_gated_neg(f, v, w,
                       [&](int j) { return need(kNegSide, *f.lhs, v, j); });
      break;
    }
    case FormulaKind::EventuallyAlways: {
      if (side == kPosSide)
        emit_gated_pos(f, v, w, [&](int j) {
          return chain(f, v, j - 1, kChanSecond, kPosSide);
        });
      else
        emit_gated_neg(f, v, w, [&](int j) {
          return chain(f, v, j - 1, kChanSecond, kNegSide);
        });
      break;
    }
    case FormulaKind::AlwaysEventually: {
      if (side == kPosSide)
        emit_gated_pos(f, v, w, [&](int j) {
          return chain(f, v, j - 1, kChanSecond, kPosSide);
        });
      else
        emit_gated_neg(f, v, w, [&](int j) {
          return chain(f, v, j - 1, kChanSecond, kNegSide);
        });
      break;
    }
    case FormulaKind::ExistsN: {
      const NodeSet nbrs = neighbor_set(cs_.graph(), NodeSet{v}, f.depth);
      const int size = static_cast<int>(nbrs.size());
      if (size < f.count) {
        pin(w, 0.0, 0.0);
        break;
      }
      cs_.make_binary(w);
      std::vector<std::pair<int, double>> counting{
          {w, -static_cast<double>(size)}};
      for (int u : nbrs) {
        const int z = need(side, *f.lhs, u, t);
        cs_.make_binary(z);
        counting.emplace_back(z, 1.0);
      }
      if (side == kPosSide)
        add_ge(std::move(counting), static_cast<double>(f.count - size));
      else
        add_le(std::move(counting), static_cast<double>(f.count - 1));
      break;
    }
    default:
      throw input_error("unexpected formula kind in encoder");
    }
    return w;
  }

  /* Until / Eventually / Always recursion over positions, two lasso passes */
  bool is_forcible(const Formula &f) const {
    switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Atomic:
    case FormulaKind::And:
    case FormulaKind::Always:
    case FormulaKind::Next:
      return true;
    default:
      return false;
    }
  }

  void force(const Formula &f, int v, int t) {
    if (!forced_.insert(InstKey{&f, v, t, kChanMain}).second) return;
    switch (f.kind) {
    case FormulaKind::True:
      break;
    case FormulaKind::False:
      add_ge({}, 1.0); /* unsatisfiable marker row */
      break;
    case FormulaKind::Atomic:
      for (const auto &row : f.atom.lowered()) {
        std::vector<std::pair<int, double>> terms;
        double offset;
        atom_terms(row, v, t, terms, offset);
        add_le(std::move(terms), row.b - offset);
      }
      break;
    case FormulaKind::And:
      force(*f.lhs, v, t);
      force(*f.rhs, v, t);
      break;
    case FormulaKind::Next:
      if (t < kp_) {
        force(*f.lhs, v, t + 1);
      } else {
        for (int j = 1; j <= kp_; ++j) {
          const int wj = need(kPosSide, *f.lhs, v, j);
          add_ge({{wj, 1.0}, {cs_.loop_var(j), -1.0}}, 0.0);
        }
      }
      break;
    case FormulaKind::Always: {
      for (int u = t; u < kp_; ++u) force(*f.lhs, v, u);
      for (int u = 0; u < t; ++u) {
        /* positions before t matter when the loop jumps back past them */
        const int wu = need(kPosSide, *f.lhs, v, u);
        std::vector<std::pair<int, double>> terms{{wu, 1.0}};
        for (int j = 1; j <= u + 1; ++j)
          terms.emplace_back(cs_.loop_var(j), -1.0);
        add_ge(std::move(terms), 0.0);
      }
      break;
    }
    default: {
      const int w = need(kPosSide, f, v, t);
      add_ge({{w, 1.0}}, 1.0);
      break;
    }
    }
  }

  ConstraintSystem &cs_;
  int kp_;
  double big_m_;
  std::map<InstKey, int> vars_;
  std::map<InstKey, int> emitted_;
  std::set<InstKey> forced_;
};

int Encoder::chain(const Formula &f, int v, int t, int chan, int side) {
  const int w = var_at(f, v, t, chan);
  const InstKey key{&f, v, t, chan};
  int &mask = emitted_[key];
  if (mask & side) return w;
  mask |= side;

  const bool is_until = f.kind == FormulaKind::Until;
  const bool is_ev = f.kind == FormulaKind::Eventually ||
                     f.kind == FormulaKind::AlwaysEventually;
  const bool is_alw = f.kind == FormulaKind::Always ||
                      f.kind == FormulaKind::EventuallyAlways;
  const Formula &hold = is_until ? *f.rhs : *f.lhs; /* the goal child */

  if (t == kp_) {
    if (chan == kChanSecond) {
      /* second pass ends: nothing further for U/F, vacuous truth for G */
      if (is_alw)
        pin(w, 1.0, 1.0);
      else
        pin(w, 0.0, 0.0);
      return w;
    }
    /* wrap: continue at the loop-back position on the second pass */
    if (side == kPosSide)
      emit_gated_pos(f, v, w, [&](int j) {
        return chain(f, v, j - 1, kChanSecond, kPosSide);
      });
    else
      emit_gated_neg(f, v, w, [&](int j) {
        return chain(f, v, j - 1, kChanSecond, kNegSide);
      });
    return w;
  }

  const int y = need(side, hold, v, t);
  const int next = chain(f, v, t + 1, chan, side);
  if (is_alw) {
    if (side == kPosSide) {
      add_le({{w, 1.0}, {y, -1.0}}, 0.0);
      add_le({{w, 1.0}, {next, -1.0}}, 0.0);
    } else {
      cs_.make_binary(y);
      add_ge({{w, 1.0}, {y, -1.0}, {next, -1.0}}, -1.0);
    }
    return w;
  }
  if (is_ev) {
    if (side == kPosSide) {
      cs_.make_binary(y);
      add_le({{w, 1.0}, {y, -1.0}, {next, -1.0}}, 0.0);
    } else {
      add_ge({{w, 1.0}, {y, -1.0}}, 0.0);
      add_ge({{w, 1.0}, {next, -1.0}}, 0.0);
    }
    return w;
  }
  /* Until: w = y2 | (y1 & next) */
  const int y1 = need(side, *f.lhs, v, t);
  if (side == kPosSide) {
    cs_.make_binary(y);
    const int a = var_at(f, v, t, chan + 8); /* conjunction auxiliary */
    add_le({{a, 1.0}, {y1, -1.0}}, 0.0);
    add_le({{a, 1.0}, {next, -1.0}}, 0.0);
    add_le({{w, 1.0}, {y, -1.0}, {a, -1.0}}, 0.0);
  } else {
    cs_.make_binary(y1);
    add_ge({{w, 1.0}, {y, -1.0}}, 0.0);
    add_ge({{w, 1.0}, {y1, -1.0}, {next, -1.0}}, -1.0);
  }
  return w;
}

} // namespace

double choose_big_m(const LabeledGraph &graph, const Formula &phi) {
  /* bound |a.f(x) - b| over the simplex per atomic lowered row */
  double worst = 0.0;
  std::function<void(const Formula &)> walk = [&](const Formula &f) {
    if (f.kind == FormulaKind::Atomic) {
      const int d = f.atom.dim();
      for (const auto &row : f.atom.lowered()) {
        double reach = std::abs(row.b);
        for (int v = 0; v < graph.node_count(); ++v) {
          const AffineLabel &lab = graph.label(v);
          if (lab.dim() != d) continue;
          double offset = 0.0;
          double spread = 0.0;
          for (int r = 0; r < d; ++r) {
            if (row.a(r) == 0.0) continue;
            offset += row.a(r) * lab.c0(r);
            for (int c = 0; c < lab.C.cols(); ++c)
              spread += std::abs(row.a(r) * lab.C(r, c));
          }
          reach = std::max(reach,
                           std::abs(offset) + spread + std::abs(row.b));
        }
        worst = std::max(worst, reach);
      }
    }
    if (f.lhs) walk(*f.lhs);
    if (f.rhs) walk(*f.rhs);
  };
  walk(phi);
  return worst + 1.0;
}

EncodeResult encode_formula(ConstraintSystem &cs, const Formula &phi,
                            const std::vector<int> &nodes) {
  const int dim = phi.atom_dim();
  for (int v : nodes) {
    if (v < 0 || v >= cs.graph().node_count())
      throw input_error("enforced node out of range");
    if (dim >= 0 && cs.graph().label(v).dim() != dim)
      throw input_error("formula dimension does not match the label at node " +
                        std::to_string(v));
  }
  const int before = cs.binary_count();
  FPtr normal = nnf(phi, false);
  Encoder enc(cs);
  EncodeResult out;
  for (int v : nodes) out.root_vars.push_back(enc.encode_root(*normal, v));
  out.binaries_added = cs.binary_count() - before;
  return out;
}

/* ---- independent binary-count predictor (no model mutation) ---- */

namespace {

class Predictor {
public:
  Predictor(const LabeledGraph &g, int kp) : g_(g), kp_(kp) {}

  void root(const Formula &f, int v) {
    if (forcible(f)) {
      force(f, v, 0);
    } else {
      need(kPosSide, f, v, 0);
    }
  }

  int count() const { return static_cast<int>(binaries_.size()); }

private:
  bool forcible(const Formula &f) const {
    switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Atomic:
    case FormulaKind::And:
    case FormulaKind::Always:
    case FormulaKind::Next:
      return true;
    default:
      return false;
    }
  }

  void mark_binary(const InstKey &k) { binaries_.insert(k); }

  InstKey key_of(const Formula &f, int v, int t, int chan) const {
    return InstKey{&f, v, t, chan};
  }

  void force(const Formula &f, int v, int t) {
    if (!forced_.insert(key_of(f, v, t, kChanMain)).second) return;
    switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      break;
    case FormulaKind::Atomic:
      break;
    case FormulaKind::And:
      force(*f.lhs, v, t);
      force(*f.rhs, v, t);
      break;
    case FormulaKind::Next:
      if (t < kp_)
        force(*f.lhs, v, t + 1);
      else
        for (int j = 1; j <= kp_; ++j) need(kPosSide, *f.lhs, v, j);
      break;
    case FormulaKind::Always:
      for (int u = t; u < kp_; ++u) force(*f.lhs, v, u);
      for (int u = 0; u < t; ++u) need(kPosSide, *f.lhs, v, u);
      break;
    default:
      need(kPosSide, f, v, t);
      break;
    }
  }

  void need(int side, const Formula &f, int v, int t) {
    if (f.kind == FormulaKind::Next && t < kp_) {
      need(side, *f.lhs, v, t + 1);
      return;
    }
    if (f.kind == FormulaKind::Until || f.kind == FormulaKind::Eventually ||
        f.kind == FormulaKind::Always) {
      chain(f, v, t, kChanMain, side);
      return;
    }
    if (f.kind == FormulaKind::EventuallyAlways ||
        f.kind == FormulaKind::AlwaysEventually)
      t = 0;
    const InstKey key = key_of(f, v, t, kChanMain);
    int &mask = emitted_[key];
    if (mask & side) return;
    mask |= side;
    switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      break;
    case FormulaKind::Atomic:
      if (side == kNegSide) {
        const auto rows = f.atom.lowered();
        if (rows.size() == 1) {
          mark_binary(key);
        } else {
          for (std::size_t i = 0; i < rows.size(); ++i)
            mark_binary(key_of(f, v, t, kChanAtomRow + static_cast<int>(i)));
        }
      }
      break;
    case FormulaKind::And:
      need(side, *f.lhs, v, t);
      need(side, *f.rhs, v, t);
      if (side == kNegSide) mark_binary(binding_key(*f.lhs, v, t));
      break;
    case FormulaKind::Or:
      need(side, *f.lhs, v, t);
      need(side, *f.rhs, v, t);
      if (side == kPosSide) mark_binary(binding_key(*f.lhs, v, t));
      break;
    case FormulaKind::Not:
      need(side == kPosSide ? kNegSide : kPosSide, *f.lhs, v, t);
      break;
    case FormulaKind::Next:
      for (int j = 1; j <= kp_; ++j)
        need(side, *f.lhs, v, j);
      break;
    case FormulaKind::EventuallyAlways:
    case FormulaKind::AlwaysEventually:
      for (int j = 1; j <= kp_; ++j)
        chain(f, v, j - 1, kChanSecond, side);
      break;
    case FormulaKind::ExistsN: {
      const NodeSet nbrs = neighbor_set(g_, NodeSet{v}, f.depth);
      if (static_cast<int>(nbrs.size()) < f.count) break;
      mark_binary(key);
      for (int u : nbrs) {
        need(side, *f.lhs, u, t);
        mark_binary(binding_key(*f.lhs, u, t));
      }
      break;
    }
    default:
      break;
    }
  }

  /* the key that need() would bind the child's variable to */
  InstKey binding_key(const Formula &f, int v, int t) const {
    const Formula *g = &f;
    while (g->kind == FormulaKind::Next && t < kp_) {
      g = g->lhs.get();
      ++t;
    }
    if (g->kind == FormulaKind::EventuallyAlways ||
        g->kind == FormulaKind::AlwaysEventually)
      t = 0;
    return InstKey{g, v, t, kChanMain};
  }

  void chain(const Formula &f, int v, int t, int chan, int side) {
    const InstKey key = key_of(f, v, t, chan);
    int &mask = emitted_[key];
    if (mask & side) return;
    mask |= side;
    const bool is_until = f.kind == FormulaKind::Until;
    const bool is_ev = f.kind == FormulaKind::Eventually ||
                       f.kind == FormulaKind::AlwaysEventually;
    const bool is_alw = !is_until && !is_ev;
    const Formula &hold = is_until ? *f.rhs : *f.lhs;
    if (t == kp_) {
      if (chan == kChanSecond) return;
      for (int j = 1; j <= kp_; ++j)
        chain(f, v, j - 1, kChanSecond, side);
      return;
    }
    need(side, hold, v, t);
    chain(f, v, t + 1, chan, side);
    if (is_alw) {
      if (side == kNegSide) mark_binary(binding_key(hold, v, t));
      return;
    }
    if (side == kPosSide) mark_binary(binding_key(hold, v, t));
    if (is_until) {
      need(side, *f.lhs, v, t);
      if (side == kNegSide) mark_binary(binding_key(*f.lhs, v, t));
    }
  }

  const LabeledGraph &g_;
  int kp_;
  std::map<InstKey, int> emitted_;
  std::set<InstKey> forced_;
  std::set<InstKey> binaries_;
};

} // namespace

int predict_binary_count(const LabeledGraph &graph, const Formula &phi,
                         const std::vector<int> &nodes, int k_p) {
  FPtr normal = nnf(phi, false);
  Predictor pred(graph, k_p);
  for (int v : nodes) pred.root(*normal, v);
  return pred.count();
}

} // namespace gtlproco
