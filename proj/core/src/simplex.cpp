#include "gtlproco/simplex.hpp"

#include "gtlproco/graph.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gtlproco {

namespace {

enum VStat : std::int8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFree = 3 };

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr int kRefactorEvery = 64;
constexpr int kStallLimit = 400;

} // namespace

struct LpEngine::Impl {
  /* problem data */
  int m = 0;
  int n_str = 0;
  std::vector<std::vector<std::pair<int, double>>> cols; /* structurals */
  Eigen::VectorXd rhs;
  std::vector<double> cost;   /* phase-2 cost for all columns */
  std::vector<double> lb, ub; /* working bounds for all columns */
  std::vector<double> lb0, ub0;
  double obj_offset = 0.0;
  SolveOptions opts;
  std::chrono::steady_clock::time_point deadline{
      std::chrono::steady_clock::time_point::max()};

  /* artificial columns (unit vectors) appended after logicals */
  std::vector<int> art_row;
  std::vector<double> art_cost;

  /* basis state */
  std::vector<std::int8_t> vstat;
  std::vector<int> basic;  /* per row */
  std::vector<int> row_of; /* per column, -1 when nonbasic */
  Eigen::VectorXd xB;
  bool basis_loaded = false;

  /* factorization */
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> luT;
  bool factor_ok = false;
  bool fresh_factor = false;
  struct Eta {
    int r;
    Eigen::VectorXd w;
  };
  std::vector<Eta> etas;

  bool phase1 = false;
  long iters = 0;
  long iter_limit = 0;
  int stall = 0;
  bool bland = false;

  /* scratch */
  Eigen::VectorXd buf_y, buf_w, buf_rho, buf_rhs;

  int n_total() const { return n_str + m + static_cast<int>(art_row.size()); }

  bool is_logical(int j) const { return j >= n_str && j < n_str + m; }
  bool is_artificial(int j) const { return j >= n_str + m; }

  double cost_of(int j) const {
    if (phase1) return is_artificial(j) ? art_cost[j - n_str - m] : 0.0;
    if (is_artificial(j)) return 0.0;
    return cost[j];
  }

  double value_of(int j) const {
    switch (vstat[j]) {
    case kBasic: return xB(row_of[j]);
    case kAtLower: return lb[j];
    case kAtUpper: return ub[j];
    default: return 0.0;
    }
  }

  /* y += coef-wise access helpers */
  template <class F> void for_col(int j, F &&f) const {
    if (j < n_str) {
      for (auto [r, v] : cols[j]) f(r, v);
    } else if (is_logical(j)) {
      f(j - n_str, 1.0);
    } else {
      f(art_row[j - n_str - m], 1.0);
    }
  }

  double col_dot(int j, const Eigen::VectorXd &y) const {
    double s = 0.0;
    for_col(j, [&](int r, double v) { s += v * y(r); });
    return s;
  }

  void scatter_col(int j, Eigen::VectorXd &out) const {
    out.setZero();
    for_col(j, [&](int r, double v) { out(r) += v; });
  }

  bool factorize() {
    if (m == 0) {
      factor_ok = true;
      etas.clear();
      return true;
    }
    Eigen::SparseMatrix<double> B(m, m);
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < m; ++r)
      for_col(basic[r],
              [&](int rr, double v) { trip.emplace_back(rr, r, v); });
    B.setFromTriplets(trip.begin(), trip.end());
    lu.compute(B);
    if (lu.info() != Eigen::Success) {
      factor_ok = false;
      return false;
    }
    Eigen::SparseMatrix<double> Bt = B.transpose();
    luT.compute(Bt);
    if (luT.info() != Eigen::Success) {
      factor_ok = false;
      return false;
    }
    etas.clear();
    factor_ok = true;
    fresh_factor = true;
    return true;
  }

  void push_eta(int r, const Eigen::VectorXd &w) {
    etas.push_back({r, w});
    fresh_factor = false;
  }

  void ftran(Eigen::VectorXd &v) const {
    if (m == 0) return;
    v = lu.solve(v);
    for (const auto &e : etas) {
      const double zr = v(e.r) / e.w(e.r);
      if (zr != 0.0) {
        v -= zr * e.w;
        v(e.r) = zr;
      } else {
        v(e.r) = 0.0;
      }
    }
  }

  void btran(Eigen::VectorXd &v) const {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      const auto &e = *it;
      double s = v(e.r);
      /* (E^-T v)_r = (v_r - sum_{i != r} w_i v_i) / w_r */
      double dot = e.w.dot(v) - e.w(e.r) * v(e.r);
      v(e.r) = (s - dot) / e.w(e.r);
    }
    v = luT.solve(v);
  }

  void compute_xB() {
    buf_rhs = rhs;
    for (int j = 0; j < n_total(); ++j) {
      if (vstat[j] == kBasic) continue;
      const double v = value_of(j);
      if (v != 0.0)
        for_col(j, [&](int r, double c) { buf_rhs(r) -= c * v; });
    }
    ftran(buf_rhs);
    xB = buf_rhs;
  }

  bool time_up() const {
    return std::chrono::steady_clock::now() > deadline;
  }

  /* ---- primal simplex on the current cost vector ---- */
  SolveStatus primal_loop() {
    int retry_after_refactor = 0;
    while (true) {
      if (iters >= iter_limit) return SolveStatus::IterationLimit;
      if ((iters & 63) == 0 && time_up()) return SolveStatus::TimeLimit;
      if (static_cast<int>(etas.size()) >= kRefactorEvery) {
        if (!factorize()) return SolveStatus::NumericalFailure;
        compute_xB();
      }

      /* pricing */
      if (m > 0) {
        buf_y.resize(m);
        for (int r = 0; r < m; ++r) buf_y(r) = cost_of(basic[r]);
        btran(buf_y);
      }
      int q = -1;
      int q_dir = 0;
      double best = 0.0;
      const int N = n_total();
      for (int j = 0; j < N; ++j) {
        if (vstat[j] == kBasic) continue;
        if (lb[j] == ub[j]) continue; /* fixed */
        const double d = cost_of(j) - (m > 0 ? col_dot(j, buf_y) : 0.0);
        int dir = 0;
        double score = 0.0;
        if (vstat[j] == kAtLower && d < -kDualTol) {
          dir = 1;
          score = -d;
        } else if (vstat[j] == kAtUpper && d > kDualTol) {
          dir = -1;
          score = d;
        } else if (vstat[j] == kFree && std::abs(d) > kDualTol) {
          dir = d < 0 ? 1 : -1;
          score = std::abs(d);
        }
        if (dir == 0) continue;
        if (bland) {
          q = j;
          q_dir = dir;
          break;
        }
        if (score > best + 1e-15) {
          best = score;
          q = j;
          q_dir = dir;
        }
      }
      if (q < 0) return SolveStatus::Optimal;

      /* direction through the basis */
      buf_w.resize(m);
      scatter_col(q, buf_w);
      ftran(buf_w);

      /* ratio test: xB changes at rate p = -dir * w per unit step */
      double theta = kInf;
      int leave_row = -1;
      double leave_pivot = 0.0;
      int leave_to = kAtLower;
      const double bound_gap =
          (std::isfinite(lb[q]) && std::isfinite(ub[q])) ? ub[q] - lb[q] : kInf;
      theta = bound_gap;
      for (int r = 0; r < m; ++r) {
        const double p = -q_dir * buf_w(r);
        if (std::abs(p) <= kPivotTol) continue;
        const int bj = basic[r];
        double t, pv;
        int to;
        if (p < 0.0) {
          if (!std::isfinite(lb[bj])) continue;
          t = (xB(r) - lb[bj]) / (-p);
          to = kAtLower;
        } else {
          if (!std::isfinite(ub[bj])) continue;
          t = (ub[bj] - xB(r)) / p;
          to = kAtUpper;
        }
        if (t < 0.0) t = 0.0;
        pv = std::abs(buf_w(r));
        if (t < theta - 1e-12 ||
            (t < theta + 1e-12 && leave_row >= 0 &&
             (bland ? basic[r] < basic[leave_row] : pv > leave_pivot))) {
          theta = t;
          leave_row = r;
          leave_pivot = pv;
          leave_to = to;
        } else if (t < theta && leave_row < 0) {
          theta = t;
          leave_row = r;
          leave_pivot = pv;
          leave_to = to;
        }
      }

      if (!std::isfinite(theta)) {
        if (phase1) return SolveStatus::NumericalFailure;
        return SolveStatus::Unbounded;
      }

      ++iters;
      if (theta <= 1e-12) {
        if (++stall > kStallLimit) bland = true;
      } else {
        stall = 0;
      }

      /* apply step */
      if (leave_row < 0 || (bound_gap <= theta + 1e-12 && bound_gap < kInf &&
                            leave_row < 0)) {
        /* pure bound flip */
        for (int r = 0; r < m; ++r) xB(r) += -q_dir * buf_w(r) * theta;
        vstat[q] = vstat[q] == kAtLower ? kAtUpper : kAtLower;
        continue;
      }
      if (bound_gap < kInf && bound_gap <= theta) {
        /* bound flip beats every row */
        for (int r = 0; r < m; ++r)
          xB(r) += -q_dir * buf_w(r) * bound_gap;
        vstat[q] = vstat[q] == kAtLower ? kAtUpper : kAtLower;
        continue;
      }

      if (std::abs(buf_w(leave_row)) < 1e-11) {
        /* unusable pivot: refresh the factorization and retry */
        if (++retry_after_refactor > 3) return SolveStatus::NumericalFailure;
        if (!factorize()) return SolveStatus::NumericalFailure;
        compute_xB();
        continue;
      }
      retry_after_refactor = 0;

      const int leaving = basic[leave_row];
      const double enter_from = value_of(q);
      for (int r = 0; r < m; ++r) xB(r) += -q_dir * buf_w(r) * theta;
      vstat[leaving] = static_cast<std::int8_t>(leave_to);
      row_of[leaving] = -1;
      basic[leave_row] = q;
      row_of[q] = leave_row;
      vstat[q] = kBasic;
      xB(leave_row) = enter_from + q_dir * theta;
      push_eta(leave_row, buf_w);
    }
  }

  /* ---- dual simplex; assumes dual feasibility of the current basis ---- */
  SolveStatus dual_loop() {
    int retry_after_refactor = 0;
    /* degenerate pivots make no dual progress even when the basic values
       move, so they are counted separately; past the budget the caller
       restarts from scratch rather than risk cycling forever */
    long degen = 0;
    const long degen_give_up = kStallLimit + std::max(2000L, 4L * m);
    while (true) {
      if (iters >= iter_limit) return SolveStatus::IterationLimit;
      if ((iters & 63) == 0 && time_up()) return SolveStatus::TimeLimit;
      if (static_cast<int>(etas.size()) >= kRefactorEvery) {
        if (!factorize()) return SolveStatus::NumericalFailure;
        compute_xB();
      }

      /* leaving row: worst bound violation among basics; under the
         anti-cycling rule, the lowest violated row instead */
      int r_out = -1;
      double worst = opts.feas_tol;
      bool below = false;
      for (int r = 0; r < m; ++r) {
        const int bj = basic[r];
        if (std::isfinite(lb[bj]) && lb[bj] - xB(r) > worst) {
          worst = lb[bj] - xB(r);
          r_out = r;
          below = true;
        }
        if (std::isfinite(ub[bj]) && xB(r) - ub[bj] > worst) {
          worst = xB(r) - ub[bj];
          r_out = r;
          below = false;
        }
        if (bland && r_out >= 0) break;
      }
      if (r_out < 0) return SolveStatus::Optimal;

      if (m > 0) {
        buf_y.resize(m);
        for (int r = 0; r < m; ++r) buf_y(r) = cost_of(basic[r]);
        btran(buf_y);
      }
      buf_rho.resize(m);
      buf_rho.setZero();
      buf_rho(r_out) = 1.0;
      btran(buf_rho);

      /* entering: min |d_j| / |alpha_j| over sign-valid candidates */
      int q = -1;
      double best_ratio = kInf;
      double best_alpha = 0.0;
      const int N = n_total();
      for (int j = 0; j < N; ++j) {
        if (vstat[j] == kBasic) continue;
        if (lb[j] == ub[j]) continue;
        const double alpha = col_dot(j, buf_rho);
        if (std::abs(alpha) <= kPivotTol) continue;
        bool valid;
        if (below)
          valid = (vstat[j] == kAtLower && alpha < 0.0) ||
                  (vstat[j] == kAtUpper && alpha > 0.0) || vstat[j] == kFree;
        else
          valid = (vstat[j] == kAtLower && alpha > 0.0) ||
                  (vstat[j] == kAtUpper && alpha < 0.0) || vstat[j] == kFree;
        if (!valid) continue;
        const double d = cost_of(j) - col_dot(j, buf_y);
        const double ratio = below ? d / (-alpha) : d / alpha;
        const double clamped = std::max(ratio, 0.0);
        if (clamped < best_ratio - 1e-12 ||
            (clamped < best_ratio + 1e-12 &&
             (bland ? (q < 0 || j < q) : std::abs(alpha) > best_alpha))) {
          best_ratio = clamped;
          q = j;
          best_alpha = std::abs(alpha);
        }
      }
      if (q < 0) return SolveStatus::Infeasible;

      buf_w.resize(m);
      scatter_col(q, buf_w);
      ftran(buf_w);
      if (std::abs(buf_w(r_out)) < 1e-11) {
        if (++retry_after_refactor > 3) return SolveStatus::NumericalFailure;
        if (!factorize()) return SolveStatus::NumericalFailure;
        compute_xB();
        continue;
      }
      retry_after_refactor = 0;

      ++iters;
      const int leaving = basic[r_out];
      const double target = below ? lb[leaving] : ub[leaving];
      const double delta = (xB(r_out) - target) / buf_w(r_out);
      const double enter_from = value_of(q);
      for (int r = 0; r < m; ++r) xB(r) -= delta * buf_w(r);
      vstat[leaving] = below ? kAtLower : kAtUpper;
      row_of[leaving] = -1;
      basic[r_out] = q;
      row_of[q] = r_out;
      vstat[q] = kBasic;
      xB(r_out) = enter_from + delta;
      push_eta(r_out, buf_w);

      /* a step is degenerate when either side stands still: tiny primal
         delta, or a near-zero entering reduced cost (best_ratio), which
         leaves the dual objective unchanged no matter how far the basics
         move */
      if (std::abs(delta) <= 1e-12 || best_ratio <= 1e-9) {
        if (++degen > kStallLimit) bland = true;
        if (degen > degen_give_up) return SolveStatus::NumericalFailure;
      } else {
        degen = 0;
        bland = false;
      }
    }
  }

  void clear_artificials() {
    const int base = n_str + m;
    vstat.resize(base);
    row_of.resize(base);
    lb.resize(base);
    ub.resize(base);
    art_row.clear();
    art_cost.clear();
  }

  void setup_initial_basis() {
    clear_artificials();
    basic.resize(m);
    for (int j = 0; j < n_str; ++j) {
      if (std::isfinite(lb[j]))
        vstat[j] = kAtLower;
      else if (std::isfinite(ub[j]))
        vstat[j] = kAtUpper;
      else
        vstat[j] = kFree;
      row_of[j] = -1;
    }
    for (int r = 0; r < m; ++r) {
      const int j = n_str + r;
      vstat[j] = kBasic;
      row_of[j] = r;
      basic[r] = j;
    }
    factorize();
    compute_xB();
    basis_loaded = true;
  }

  /* replace out-of-bound basic logicals by artificials */
  int install_artificials() {
    int added = 0;
    for (int r = 0; r < m; ++r) {
      const int j = basic[r];
      const double v = xB(r);
      if (v >= lb[j] - opts.feas_tol && v <= ub[j] + opts.feas_tol) continue;
      /* park the logical at its zero bound */
      vstat[j] = std::isfinite(lb[j]) ? kAtLower : kAtUpper;
      row_of[j] = -1;
      const int a = n_total();
      art_row.push_back(r);
      if (v >= 0.0) {
        lb.push_back(0.0);
        ub.push_back(kInf);
        art_cost.push_back(1.0);
      } else {
        lb.push_back(-kInf);
        ub.push_back(0.0);
        art_cost.push_back(-1.0);
      }
      vstat.push_back(kBasic);
      row_of.push_back(r);
      basic[r] = a;
      ++added;
    }
    if (added > 0) {
      factorize();
      compute_xB();
    }
    return added;
  }

  double phase1_objective() const {
    double s = 0.0;
    for (std::size_t k = 0; k < art_row.size(); ++k) {
      const int j = n_str + m + static_cast<int>(k);
      s += art_cost[k] * value_of(j);
    }
    return s;
  }

  /* degenerate pivot-out of basic artificials after phase 1 */
  void evict_artificials() {
    for (int r = 0; r < m; ++r) {
      if (!is_artificial(basic[r])) continue;
      buf_rho.resize(m);
      buf_rho.setZero();
      buf_rho(r) = 1.0;
      btran(buf_rho);
      int q = -1;
      double best = kPivotTol;
      for (int j = 0; j < n_str + m; ++j) {
        if (vstat[j] == kBasic || lb[j] == ub[j]) continue;
        const double alpha = std::abs(col_dot(j, buf_rho));
        if (alpha > best) {
          best = alpha;
          q = j;
          if (alpha > 0.1) break;
        }
      }
      if (q < 0) {
        /* dependent row: freeze the artificial in place */
        const int a = basic[r];
        lb[a] = -kInf;
        ub[a] = kInf;
        continue;
      }
      buf_w.resize(m);
      scatter_col(q, buf_w);
      ftran(buf_w);
      if (std::abs(buf_w(r)) < 1e-11) continue;
      const int leaving = basic[r];
      vstat[leaving] = kAtLower;
      lb[leaving] = ub[leaving] = 0.0;
      row_of[leaving] = -1;
      basic[r] = q;
      row_of[q] = r;
      const double enter_val = value_of(q);
      vstat[q] = kBasic;
      push_eta(r, buf_w);
      xB(r) = enter_val; /* degenerate: artificial was at 0 */
    }
    /* freeze all remaining artificial bounds */
    for (std::size_t k = 0; k < art_row.size(); ++k) {
      const int j = n_str + m + static_cast<int>(k);
      if (vstat[j] != kBasic && !(lb[j] == -kInf && ub[j] == kInf)) {
        lb[j] = ub[j] = 0.0;
        vstat[j] = kAtLower;
      }
    }
  }

  Solution package(SolveStatus status) {
    Solution sol;
    sol.status = status;
    sol.iterations = iters;
    sol.x = Eigen::VectorXd::Zero(n_str);
    for (int j = 0; j < n_str; ++j) sol.x(j) = value_of(j);
    if (m > 0 && factor_ok &&
        (status == SolveStatus::Optimal ||
         status == SolveStatus::IterationLimit ||
         status == SolveStatus::TimeLimit)) {
      buf_y.resize(m);
      phase1 = false;
      for (int r = 0; r < m; ++r) buf_y(r) = cost_of(basic[r]);
      btran(buf_y);
      sol.duals = buf_y;
    } else {
      sol.duals = Eigen::VectorXd::Zero(m);
    }
    double v = obj_offset;
    for (int j = 0; j < n_str; ++j) v += cost[j] * sol.x(j);
    sol.objective = v;
    return sol;
  }
};

LpEngine::LpEngine(const Model &model, const SolveOptions &opts)
    : impl_(std::make_unique<Impl>()) {
  model.validate();
  if (model.maximize)
    throw input_error(
        "the simplex engine expects a minimization model; negate the "
        "objective first");
  auto &im = *impl_;
  im.opts = opts;
  im.m = model.row_count();
  im.n_str = model.var_count();
  im.obj_offset = model.obj_offset;
  im.cols.resize(im.n_str);
  im.rhs.resize(im.m);
  im.cost.assign(model.obj.begin(), model.obj.end());
  im.cost.resize(im.n_str + im.m, 0.0);
  im.lb.assign(model.lb.begin(), model.lb.end());
  im.ub.assign(model.ub.begin(), model.ub.end());
  for (int r = 0; r < im.m; ++r) {
    const auto &row = model.rows[r];
    for (auto [j, v] : row.terms)
      if (v != 0.0) im.cols[j].emplace_back(r, v);
    im.rhs(r) = row.rhs;
    switch (row.sense) {
    case RowSense::LE:
      im.lb.push_back(0.0);
      im.ub.push_back(kInf);
      break;
    case RowSense::GE:
      im.lb.push_back(-kInf);
      im.ub.push_back(0.0);
      break;
    case RowSense::EQ:
      im.lb.push_back(0.0);
      im.ub.push_back(0.0);
      break;
    }
  }
  im.lb0 = im.lb;
  im.ub0 = im.ub;
  im.vstat.assign(im.n_str + im.m, kAtLower);
  im.row_of.assign(im.n_str + im.m, -1);
  im.iter_limit = opts.max_iterations > 0
                      ? opts.max_iterations
                      : std::max<long>(20000, 60L * (im.m + im.n_str));
}

LpEngine::~LpEngine() = default;

void LpEngine::set_deadline(std::chrono::steady_clock::time_point tp) {
  impl_->deadline = tp;
}

void LpEngine::set_bounds(int var, double lo, double hi) {
  if (var < 0 || var >= impl_->n_str)
    throw input_error("set_bounds: variable out of range");
  impl_->lb[var] = lo;
  impl_->ub[var] = hi;
}

void LpEngine::reset_bounds() {
  auto &im = *impl_;
  for (int j = 0; j < im.n_str + im.m; ++j) {
    im.lb[j] = im.lb0[j];
    im.ub[j] = im.ub0[j];
  }
}

LpEngine::Basis LpEngine::basis() const {
  /* canonical snapshot without phase-1 artificials: a basic artificial
     carries the column e_r of its install row, identical to that row's
     logical column, so the swap leaves the basis matrix unchanged */
  auto &im = *impl_;
  Basis b{im.vstat, im.basic};
  b.vstat.resize(im.n_str + im.m);
  for (int r = 0; r < im.m; ++r) {
    const int j = b.basic[r];
    if (j >= im.n_str + im.m) {
      const int jl = im.n_str + im.art_row[j - im.n_str - im.m];
      b.basic[r] = jl;
      b.vstat[jl] = kBasic;
    }
  }
  return b;
}

bool LpEngine::has_valid_basis() const {
  return impl_->basis_loaded && impl_->factor_ok;
}

void LpEngine::load_basis(const Basis &b) {
  auto &im = *impl_;
  if (static_cast<int>(b.vstat.size()) != im.n_str + im.m ||
      static_cast<int>(b.basic.size()) != im.m)
    throw input_error("basis shape does not match the engine state");
  im.vstat = b.vstat;
  /* artificial columns appended after the snapshot was taken: park each
     at its finite (zero) bound, where it contributes nothing */
  for (int j = static_cast<int>(b.vstat.size()); j < im.n_total(); ++j)
    im.vstat.push_back(std::isfinite(im.lb[j]) ? kAtLower : kAtUpper);
  im.basic = b.basic;
  std::fill(im.row_of.begin(), im.row_of.end(), -1);
  im.row_of.resize(im.n_total(), -1);
  for (int r = 0; r < im.m; ++r) im.row_of[im.basic[r]] = r;
  im.basis_loaded = true;
  im.fresh_factor = false;
}

Solution LpEngine::solve() {
  auto &im = *impl_;
  im.iters = 0;
  im.stall = 0;
  im.bland = false;
  im.setup_initial_basis();
  if (!im.factor_ok) return im.package(SolveStatus::NumericalFailure);

  if (im.install_artificials() > 0 || true) {
    /* phase 1 (cheap no-op when already feasible) */
    im.phase1 = true;
    SolveStatus st = im.primal_loop();
    im.phase1 = false;
    if (st == SolveStatus::TimeLimit || st == SolveStatus::IterationLimit ||
        st == SolveStatus::NumericalFailure)
      return im.package(st);
    const double scale = 1.0 + im.rhs.cwiseAbs().maxCoeff();
    if (im.phase1_objective() > im.opts.feas_tol * scale)
      return im.package(SolveStatus::Infeasible);
    im.evict_artificials();
  }

  im.stall = 0;
  im.bland = false;
  SolveStatus st = im.primal_loop();
  if (st != SolveStatus::Optimal) return im.package(st);

  /* verify against accumulated numerical drift */
  if (!im.factorize()) return im.package(SolveStatus::NumericalFailure);
  im.compute_xB();
  bool clean = true;
  for (int r = 0; r < im.m; ++r) {
    const int j = im.basic[r];
    if (im.xB(r) < im.lb[j] - im.opts.feas_tol ||
        im.xB(r) > im.ub[j] + im.opts.feas_tol)
      clean = false;
  }
  if (!clean) {
    im.phase1 = true;
    if (im.install_artificials() > 0) {
      SolveStatus st1 = im.primal_loop();
      im.phase1 = false;
      if (st1 != SolveStatus::Optimal) return im.package(st1);
      const double scale = 1.0 + im.rhs.cwiseAbs().maxCoeff();
      if (im.phase1_objective() > im.opts.feas_tol * scale)
        return im.package(SolveStatus::Infeasible);
      im.evict_artificials();
    } else {
      im.phase1 = false;
    }
    st = im.primal_loop();
    if (st != SolveStatus::Optimal) return im.package(st);
  }
  return im.package(SolveStatus::Optimal);
}

Solution LpEngine::resolve() {
  auto &im = *impl_;
  if (!im.basis_loaded) return solve();
  im.iters = 0;
  im.stall = 0;
  im.bland = false;
  /* nonbasic statuses may reference bounds that moved or vanished */
  for (int j = 0; j < im.n_total(); ++j) {
    if (im.vstat[j] == kBasic) continue;
    if (im.vstat[j] == kAtLower && !std::isfinite(im.lb[j]))
      im.vstat[j] = std::isfinite(im.ub[j]) ? kAtUpper : kFree;
    else if (im.vstat[j] == kAtUpper && !std::isfinite(im.ub[j]))
      im.vstat[j] = std::isfinite(im.lb[j]) ? kAtLower : kFree;
  }
  if (!(im.fresh_factor && im.etas.empty())) {
    if (!im.factorize()) return solve();
  }
  im.compute_xB();

  /* quick dual feasibility audit; fall back to a cold solve when stale */
  if (im.m > 0) {
    im.buf_y.resize(im.m);
    for (int r = 0; r < im.m; ++r) im.buf_y(r) = im.cost_of(im.basic[r]);
    im.btran(im.buf_y);
    for (int j = 0; j < im.n_total(); ++j) {
      if (im.vstat[j] == kBasic || im.lb[j] == im.ub[j]) continue;
      const double d = im.cost_of(j) - im.col_dot(j, im.buf_y);
      const bool bad = (im.vstat[j] == kAtLower && d < -1e-6) ||
                       (im.vstat[j] == kAtUpper && d > 1e-6) ||
                       (im.vstat[j] == kFree && std::abs(d) > 1e-6);
      if (bad) return solve();
    }
  }

  SolveStatus st = im.dual_loop();
  if (st == SolveStatus::IterationLimit || st == SolveStatus::NumericalFailure)
    return solve();
  if (st != SolveStatus::Optimal) return im.package(st);
  if (!im.factorize()) return im.package(SolveStatus::NumericalFailure);
  im.compute_xB();
  for (int r = 0; r < im.m; ++r) {
    const int j = im.basic[r];
    if (im.xB(r) < im.lb[j] - im.opts.feas_tol ||
        im.xB(r) > im.ub[j] + im.opts.feas_tol)
      return solve();
  }
  return im.package(SolveStatus::Optimal);
}

Solution solve_lp(const Model &model, const SolveOptions &opts) {
  if (model.maximize) {
    Model flipped = model;
    flipped.maximize = false;
    for (double &c : flipped.obj) c = -c;
    flipped.obj_offset = -flipped.obj_offset;
    Solution sol = solve_lp(flipped, opts);
    sol.objective = -sol.objective;
    sol.best_bound = -sol.best_bound;
    sol.duals = -sol.duals;
    return sol;
  }
  LpEngine engine(model, opts);
  if (std::isfinite(opts.time_limit_sec))
    engine.set_deadline(std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(opts.time_limit_sec)));
  Solution sol = engine.solve();
  if (sol.status == SolveStatus::Optimal) {
    sol.max_violation = model.max_violation(sol.x);
    if (sol.max_violation > opts.feas_tol * 10.0)
      sol.status = SolveStatus::NumericalFailure;
  }
  return sol;
}

} // namespace gtlproco
