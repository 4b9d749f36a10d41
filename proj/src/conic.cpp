#include "bellvol/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "bellvol/errors.hpp"

// Homogeneous self-dual interior point method over a product of the
// nonnegative orthant and PSD cones, with Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps.
//
// The user program is handled in its "dual" standard form
//   maximize b'y  s.t.  s = c - A'y in K,
// whose conic dual is
//   minimize <c,x>  s.t.  A x = b, x in K.
// Equality rows are eliminated before the iteration starts.

namespace bellvol::conic {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::Unbounded:
      return "Unbounded";
    case SolveStatus::IterLimit:
      return "IterLimit";
    case SolveStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "NumericalFailure";
}

void ConicProgram::validate() const {
  if (num_vars < 0) throw DomainError("negative variable count");
  if (static_cast<int>(objective.size()) != num_vars) {
    throw DomainError("objective length does not match variable count");
  }
  auto check_var = [&](int v) {
    if (v != kConstant && (v < 0 || v >= num_vars)) {
      throw DomainError("term references undeclared variable " + std::to_string(v));
    }
  };
  for (const auto& rows : {&nonneg_rows, &eq_rows}) {
    for (const auto& row : *rows) {
      for (const auto& t : row.terms) {
        if (t.var == kConstant) throw DomainError("row terms must name a variable");
        check_var(t.var);
      }
    }
  }
  for (const auto& b : psd_blocks) {
    if (b.size <= 0) throw DomainError("PSD block of non-positive size");
    for (const auto& t : b.terms) {
      check_var(t.var);
      if (t.row < 0 || t.col < 0 || t.row >= b.size || t.col >= b.size || t.row > t.col) {
        throw DomainError("PSD term outside the upper triangle of its block");
      }
    }
  }
}

int ConicProgram::total_psd_dimension() const {
  int total = 0;
  for (const auto& b : psd_blocks) total += b.size;
  return total;
}

Eigen::MatrixXd evaluate_block(const PsdBlock& block, const std::vector<double>& y) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(block.size, block.size);
  for (const auto& t : block.terms) {
    const double val = t.var == kConstant ? t.coef : t.coef * y[t.var];
    f(t.row, t.col) += val;
    if (t.row != t.col) f(t.col, t.row) += val;
  }
  return f;
}

double evaluate_row(const AffineRow& row, const std::vector<double>& y) {
  double v = row.constant;
  for (const auto& t : row.terms) v += t.coef * y[t.var];
  return v;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Entry {
  int p;
  int q;
  double v;
};

// A_i = -F_i for each variable touching the block, stored as full symmetric
// entry lists.
struct Block {
  int n = 0;
  int original_index = 0;
  double scale = 1.0;
  MatrixXd c;
  std::vector<int> vars;
  std::vector<std::vector<Entry>> entries;
};

// y_original = offset + map(z) where z is the reduced variable vector.
struct VariableMap {
  int reduced = 0;
  VectorXd offset;
  // >= 0: reduced index; -1: fixed at offset; -2: row u_row[var] of null_basis.
  std::vector<int> index;
  std::vector<int> u_row;
  MatrixXd null_basis;
  int null_start = 0;

  template <typename Fn>
  void expand(int var, double coef, double& constant, Fn&& add) const {
    constant += coef * offset[var];
    const int k = index[var];
    if (k >= 0) {
      add(k, coef);
    } else if (k == -2) {
      const int r = u_row[var];
      for (int j = 0; j < null_basis.cols(); ++j) {
        const double a = null_basis(r, j);
        if (a != 0.0) add(null_start + j, coef * a);
      }
    }
  }

  VectorXd lift(const VectorXd& z) const {
    VectorXd y = offset;
    for (int v = 0; v < static_cast<int>(index.size()); ++v) {
      if (index[v] >= 0) {
        y[v] += z[index[v]];
      } else if (index[v] == -2) {
        y[v] += null_basis.row(u_row[v]).dot(z.segment(null_start, null_basis.cols()));
      }
    }
    return y;
  }
};

struct Presolved {
  VariableMap map;
  VectorXd b;
  double objective_offset = 0.0;
  MatrixXd a_lp;  // m x n_lp
  VectorXd c_lp;
  VectorXd lp_scale;
  std::vector<int> lp_original;  // original nonneg row index per kept row
  std::vector<Block> blocks;
  std::string infeasible;  // non-empty when presolve proved infeasibility
};

double inf_norm(const std::map<int, double>& coefs) {
  double m = 0.0;
  for (const auto& [v, c] : coefs) m = std::max(m, std::abs(c));
  return m;
}

// Eliminates equality rows: singleton rows fix variables, the remainder is
// resolved through an orthonormal null-space basis.
bool eliminate_equalities(const ConicProgram& p, VariableMap& map, std::string& why) {
  const int n = p.num_vars;
  map.offset = VectorXd::Zero(n);
  map.index.assign(n, 0);
  map.u_row.assign(n, -1);

  struct Row {
    double constant;
    std::map<int, double> coefs;
  };
  std::vector<Row> rows;
  for (const auto& r : p.eq_rows) {
    Row row{r.constant, {}};
    for (const auto& t : r.terms) row.coefs[t.var] += t.coef;
    std::erase_if(row.coefs, [](const auto& kv) { return kv.second == 0.0; });
    const double s = inf_norm(row.coefs);
    if (s == 0.0) {
      if (std::abs(row.constant) > 1e-12) {
        why = "constant equality row violated";
        return false;
      }
      continue;
    }
    row.constant /= s;
    for (auto& [v, c] : row.coefs) c /= s;
    rows.push_back(std::move(row));
  }

  std::vector<bool> fixed(n, false);
  bool changed = true;
  std::vector<bool> used(rows.size(), false);
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (used[r]) continue;
      int free_var = -1;
      int free_count = 0;
      double rhs = -rows[r].constant;
      for (const auto& [v, c] : rows[r].coefs) {
        if (fixed[v]) {
          rhs -= c * map.offset[v];
        } else {
          free_var = v;
          ++free_count;
        }
      }
      if (free_count == 0) {
        used[r] = true;
        if (std::abs(rhs) > 1e-9) {
          why = "inconsistent fixed equalities";
          return false;
        }
      } else if (free_count == 1) {
        used[r] = true;
        fixed[free_var] = true;
        map.offset[free_var] = rhs / rows[r].coefs.at(free_var);
        changed = true;
      }
    }
  }

  std::vector<int> u_vars;
  std::vector<std::size_t> general;
  {
    std::vector<bool> in_u(n, false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (used[r]) continue;
      general.push_back(r);
      for (const auto& [v, c] : rows[r].coefs) {
        if (!fixed[v] && !in_u[v]) {
          in_u[v] = true;
          u_vars.push_back(v);
        }
      }
    }
    std::sort(u_vars.begin(), u_vars.end());
  }

  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (fixed[v]) {
      map.index[v] = -1;
    } else if (std::find(u_vars.begin(), u_vars.end(), v) == u_vars.end()) {
      map.index[v] = next++;
    }
  }
  map.null_start = next;
  if (general.empty()) {
    map.reduced = next;
    return true;
  }

  const int k = static_cast<int>(general.size());
  const int u = static_cast<int>(u_vars.size());
  MatrixXd e = MatrixXd::Zero(k, u);
  VectorXd rhs(k);
  for (int v = 0; v < u; ++v) map.u_row[u_vars[v]] = v;
  for (int i = 0; i < k; ++i) {
    const Row& row = rows[general[i]];
    rhs[i] = -row.constant;
    for (const auto& [v, c] : row.coefs) {
      if (fixed[v]) {
        rhs[i] -= c * map.offset[v];
      } else {
        e(i, map.u_row[v]) = c;
      }
    }
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(e);
  const VectorXd y0 = cod.solve(rhs);
  if ((e * y0 - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
    why = "equality rows are inconsistent";
    return false;
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(e.transpose());
  qr.setThreshold(1e-11);
  const int rank = static_cast<int>(qr.rank());
  const MatrixXd q = qr.householderQ();
  map.null_basis = q.rightCols(u - rank);
  for (int v = 0; v < u; ++v) {
    map.index[u_vars[v]] = -2;
    map.offset[u_vars[v]] = y0[v];
  }
  map.reduced = next + (u - rank);
  return true;
}

Presolved presolve(const ConicProgram& p) {
  Presolved out;
  if (!eliminate_equalities(p, out.map, out.infeasible)) return out;
  const VariableMap& map = out.map;
  const int m = map.reduced;

  out.b = VectorXd::Zero(m);
  for (int v = 0; v < p.num_vars; ++v) {
    if (p.objective[v] == 0.0) continue;
    map.expand(v, p.objective[v], out.objective_offset, [&](int k, double c) { out.b[k] += c; });
  }

  // Linear rows: s_r = g0 + g'z >= 0  ->  c_r = g0, column r of A = -g.
  std::vector<VectorXd> cols;
  std::vector<double> consts;
  std::vector<double> scales;
  for (std::size_t r = 0; r < p.nonneg_rows.size(); ++r) {
    const auto& row = p.nonneg_rows[r];
    double g0 = row.constant;
    VectorXd g = VectorXd::Zero(m);
    for (const auto& t : row.terms) map.expand(t.var, t.coef, g0, [&](int k, double c) { g[k] += c; });
    const double s = m > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
    if (s == 0.0) {
      if (g0 < -1e-12) {
        out.infeasible = "constant nonnegative row violated";
        return out;
      }
      continue;
    }
    cols.push_back(-g / s);
    consts.push_back(g0 / s);
    scales.push_back(1.0 / s);
    out.lp_original.push_back(static_cast<int>(r));
  }
  const int n_lp = static_cast<int>(cols.size());
  out.a_lp.resize(m, n_lp);
  out.c_lp.resize(n_lp);
  out.lp_scale.resize(n_lp);
  for (int r = 0; r < n_lp; ++r) {
    out.a_lp.col(r) = cols[r];
    out.c_lp[r] = consts[r];
    out.lp_scale[r] = scales[r];
  }

  for (std::size_t bi = 0; bi < p.psd_blocks.size(); ++bi) {
    const auto& pb = p.psd_blocks[bi];
    const int n = pb.size;
    MatrixXd c = MatrixXd::Zero(n, n);
    std::unordered_map<int, std::map<std::pair<int, int>, double>> per_var;
    for (const auto& t : pb.terms) {
      double constant = 0.0;
      if (t.var == kConstant) {
        constant = t.coef;
      } else {
        map.expand(t.var, t.coef, constant,
                   [&](int k, double a) { per_var[k][{t.row, t.col}] += a; });
      }
      c(t.row, t.col) += constant;
      if (t.row != t.col) c(t.col, t.row) += constant;
    }
    double s = 0.0;
    for (auto& [k, coefs] : per_var) {
      std::erase_if(coefs, [](const auto& kv) { return kv.second == 0.0; });
      for (const auto& [pos, a] : coefs) s = std::max(s, std::abs(a));
    }
    if (s == 0.0) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(c, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-9 * (1.0 + c.norm())) {
        out.infeasible = "constant PSD block is not PSD";
        return out;
      }
      continue;
    }
    Block blk;
    blk.n = n;
    blk.original_index = static_cast<int>(bi);
    blk.scale = 1.0 / s;
    blk.c = c / s;
    std::vector<int> keys;
    for (const auto& [k, coefs] : per_var) {
      if (!coefs.empty()) keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    for (int k : keys) {
      std::vector<Entry> list;
      for (const auto& [pos, a] : per_var[k]) {
        const double val = -a / s;
        list.push_back({pos.first, pos.second, val});
        if (pos.first != pos.second) list.push_back({pos.second, pos.first, val});
      }
      blk.vars.push_back(k);
      blk.entries.push_back(std::move(list));
    }
    out.blocks.push_back(std::move(blk));
  }
  return out;
}

// Point in the cone: orthant part plus one symmetric matrix per block.
struct ConeVec {
  VectorXd lp;
  std::vector<MatrixXd> psd;

  double dot(const ConeVec& o) const {
    double d = lp.dot(o.lp);
    for (std::size_t k = 0; k < psd.size(); ++k) d += psd[k].cwiseProduct(o.psd[k]).sum();
    return d;
  }
  double norm() const { return std::sqrt(dot(*this)); }
  void axpy(double a, const ConeVec& o) {
    lp += a * o.lp;
    for (std::size_t k = 0; k < psd.size(); ++k) psd[k] += a * o.psd[k];
  }
};

ConeVec operator-(const ConeVec& a, const ConeVec& b) {
  ConeVec r = a;
  r.axpy(-1.0, b);
  return r;
}

class Solver {
 public:
  Solver(const Presolved& ps, const SolverOptions& opt) : ps_(ps), opt_(opt) {
    m_ = static_cast<int>(ps.b.size());
    n_lp_ = static_cast<int>(ps.c_lp.size());
    nu_ = n_lp_;
    for (const auto& b : ps.blocks) nu_ += b.n;
    c_.lp = ps.c_lp;
    for (const auto& b : ps.blocks) c_.psd.push_back(b.c);
  }

  SolveReport run();

  VectorXd y_;
  ConeVec x_;
  double tau_ = 1.0;

 private:
  struct Scaling {
    MatrixXd r;
    MatrixXd rinv;
    MatrixXd w;
    VectorXd lambda;
  };
  struct Direction {
    ConeVec dx;
    ConeVec ds;
    VectorXd dy;
    double dtau = 0.0;
    double dkappa = 0.0;
  };

  VectorXd apply_a(const ConeVec& x) const {
    VectorXd out = ps_.a_lp * x.lp;
    for (std::size_t k = 0; k < ps_.blocks.size(); ++k) {
      const Block& blk = ps_.blocks[k];
      const MatrixXd& xm = x.psd[k];
      for (std::size_t i = 0; i < blk.vars.size(); ++i) {
        double acc = 0.0;
        for (const Entry& e : blk.entries[i]) acc += e.v * xm(e.p, e.q);
        out[blk.vars[i]] += acc;
      }
    }
    return out;
  }

  ConeVec apply_at(const VectorXd& y) const {
    ConeVec out;
    out.lp = ps_.a_lp.transpose() * y;
    for (const Block& blk : ps_.blocks) {
      MatrixXd m = MatrixXd::Zero(blk.n, blk.n);
      for (std::size_t i = 0; i < blk.vars.size(); ++i) {
        const double yi = y[blk.vars[i]];
        if (yi == 0.0) continue;
        for (const Entry& e : blk.entries[i]) m(e.p, e.q) += e.v * yi;
      }
      out.psd.push_back(std::move(m));
    }
    return out;
  }

  ConeVec apply_theta(const ConeVec& v) const {
    ConeVec out;
    out.lp = theta_lp_.cwiseProduct(v.lp);
    for (std::size_t k = 0; k < v.psd.size(); ++k) {
      const MatrixXd& w = scal_[k].w;
      out.psd.push_back(w * v.psd[k] * w);
    }
    return out;
  }

  bool compute_scaling();
  bool factor_schur();
  VectorXd solve_schur(const VectorXd& rhs) const;
  Direction direction(const VectorXd& r1, const ConeVec& r2, double r3, double r4,
                      const ConeVec& rc_x) const;
  double max_step(const Direction& d) const;
  double psd_step(const MatrixXd& lambda_scaled_dir, const VectorXd& lambda) const;

  const Presolved& ps_;
  SolverOptions opt_;
  int m_ = 0;
  int n_lp_ = 0;
  int nu_ = 0;
  ConeVec c_;
  ConeVec s_;
  double kappa_ = 1.0;

  std::vector<Scaling> scal_;
  VectorXd theta_lp_;
  Eigen::LLT<MatrixXd> llt_;
  Eigen::LDLT<MatrixXd> ldlt_;
  bool use_ldlt_ = false;
  VectorXd q_;
  ConeVec at_q_;
  ConeVec v_dir_;
  double v_den_ = 0.0;
};

bool Solver::compute_scaling() {
  scal_.resize(ps_.blocks.size());
  for (std::size_t k = 0; k < ps_.blocks.size(); ++k) {
    const MatrixXd& x = x_.psd[k];
    const MatrixXd& s = s_.psd[k];
    Eigen::LLT<MatrixXd> lx(x);
    if (lx.info() != Eigen::Success) return false;
    const MatrixXd l = lx.matrixL();
    const MatrixXd z = l.transpose() * s * l;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(z);
    if (eig.info() != Eigen::Success) return false;
    const VectorXd omega = eig.eigenvalues();
    if (omega.minCoeff() <= 0.0 || !std::isfinite(omega.maxCoeff())) return false;
    Scaling sc;
    sc.lambda = omega.cwiseSqrt();
    const VectorXd inv_sqrt_lambda = sc.lambda.cwiseSqrt().cwiseInverse();
    sc.r = l * eig.eigenvectors() * inv_sqrt_lambda.asDiagonal();
    // R^{-1} = Lambda^{1/2} V' L^{-1}
    const MatrixXd vt_linv =
        l.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(eig.eigenvectors().transpose());
    sc.rinv = sc.lambda.cwiseSqrt().asDiagonal() * vt_linv;
    sc.w = sc.r * sc.r.transpose();
    scal_[k] = std::move(sc);
  }
  theta_lp_ = x_.lp.cwiseQuotient(s_.lp);
  return true;
}

bool Solver::factor_schur() {
  MatrixXd schur = ps_.a_lp * theta_lp_.asDiagonal() * ps_.a_lp.transpose();
  for (std::size_t k = 0; k < ps_.blocks.size(); ++k) {
    const Block& blk = ps_.blocks[k];
    const MatrixXd& w = scal_[k].w;
    const std::size_t nv = blk.vars.size();
    // <A_a, W A_b W> either entry pair by entry pair or through W A_b W formed densely.
    const double n = blk.n;
    double total = 0.0, pairs = 0.0, dense = 0.0;
    for (const auto& e : blk.entries) total += static_cast<double>(e.size());
    for (const auto& e : blk.entries) {
      const double kb = static_cast<double>(e.size());
      pairs += 0.5 * kb * total;
      dense += std::min(kb * n * n, 0.25 * n * n * n + kb * n) * 0.25 + total;
    }
    if (pairs <= dense) {
      for (std::size_t a = 0; a < nv; ++a) {
        const auto& ea = blk.entries[a];
        for (std::size_t b = a; b < nv; ++b) {
          const auto& eb = blk.entries[b];
          double sum = 0.0;
          for (const Entry& e : ea) {
            for (const Entry& f : eb) sum += e.v * f.v * w(e.q, f.p) * w(f.q, e.p);
          }
          const int i = blk.vars[a];
          const int j = blk.vars[b];
          schur(i, j) += sum;
          if (i != j) schur(j, i) += sum;
        }
      }
      continue;
    }
    MatrixXd m(blk.n, blk.n), t(blk.n, blk.n);
    for (std::size_t b = 0; b < nv; ++b) {
      const auto& eb = blk.entries[b];
      if (static_cast<double>(eb.size()) * n < 0.25 * n * n) {
        m.setZero();
        for (const Entry& f : eb) m.noalias() += f.v * w.col(f.p) * w.row(f.q);
      } else {
        t.setZero();
        for (const Entry& f : eb) t.col(f.q) += f.v * w.col(f.p);
        m.noalias() = t * w;
      }
      const int j = blk.vars[b];
      for (std::size_t a = 0; a <= b; ++a) {
        double sum = 0.0;
        for (const Entry& e : blk.entries[a]) sum += e.v * m(e.p, e.q);
        const int i = blk.vars[a];
        schur(i, j) += sum;
        if (i != j) schur(j, i) += sum;
      }
    }
  }
  use_ldlt_ = false;
  llt_.compute(schur);
  if (llt_.info() == Eigen::Success) return true;
  const double reg = 1e-12 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
  schur.diagonal().array() += reg;
  ldlt_.compute(schur);
  use_ldlt_ = true;
  return ldlt_.info() == Eigen::Success;
}

VectorXd Solver::solve_schur(const VectorXd& rhs) const {
  if (m_ == 0) return VectorXd();
  return use_ldlt_ ? VectorXd(ldlt_.solve(rhs)) : VectorXd(llt_.solve(rhs));
}

Solver::Direction Solver::direction(const VectorXd& r1, const ConeVec& r2, double r3, double r4,
                                    const ConeVec& rc_x) const {
  Direction d;
  ConeVec t = rc_x - apply_theta(r2);
  const VectorXd p = solve_schur(r1 - apply_a(t));
  const ConeVec at_p = apply_at(p);
  ConeVec u = t;
  u.axpy(1.0, apply_theta(at_p));
  d.dtau = (r3 - c_.dot(u) + ps_.b.dot(p) - r4 / tau_) / v_den_;
  d.dy = p + q_ * d.dtau;
  d.dx = u;
  d.dx.axpy(d.dtau, v_dir_);
  d.ds = r2;
  d.ds.axpy(-1.0, at_p);
  d.ds.axpy(-d.dtau, at_q_);
  d.ds.axpy(d.dtau, c_);
  d.dkappa = (r4 - kappa_ * d.dtau) / tau_;
  return d;
}

double Solver::psd_step(const MatrixXd& scaled_dir, const VectorXd& lambda) const {
  const VectorXd isl = lambda.cwiseSqrt().cwiseInverse();
  const MatrixXd m = isl.asDiagonal() * scaled_dir * isl.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double mn = eig.eigenvalues().minCoeff();
  return mn < 0.0 ? -1.0 / mn : std::numeric_limits<double>::infinity();
}

double Solver::max_step(const Direction& d) const {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_lp_; ++i) {
    if (d.dx.lp[i] < 0.0) alpha = std::min(alpha, -x_.lp[i] / d.dx.lp[i]);
    if (d.ds.lp[i] < 0.0) alpha = std::min(alpha, -s_.lp[i] / d.ds.lp[i]);
  }
  for (std::size_t k = 0; k < scal_.size(); ++k) {
    const Scaling& sc = scal_[k];
    alpha = std::min(alpha, psd_step(sc.rinv * d.dx.psd[k] * sc.rinv.transpose(), sc.lambda));
    alpha = std::min(alpha, psd_step(sc.r.transpose() * d.ds.psd[k] * sc.r, sc.lambda));
  }
  if (d.dtau < 0.0) alpha = std::min(alpha, -tau_ / d.dtau);
  if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa_ / d.dkappa);
  return alpha;
}

SolveReport Solver::run() {
  SolveReport rep;
  y_ = VectorXd::Zero(m_);
  x_.lp = VectorXd::Ones(n_lp_);
  s_.lp = VectorXd::Ones(n_lp_);
  for (const auto& b : ps_.blocks) {
    x_.psd.push_back(MatrixXd::Identity(b.n, b.n));
    s_.psd.push_back(MatrixXd::Identity(b.n, b.n));
  }
  tau_ = 1.0;
  kappa_ = 1.0;

  const double norm_b = ps_.b.norm();
  const double norm_c = c_.norm();
  rep.status = SolveStatus::IterLimit;

  for (int it = 0; it <= opt_.max_iterations; ++it) {
    rep.iterations = it;
    const VectorXd ax = apply_a(x_);
    const VectorXd r_p = ax - ps_.b * tau_;
    const ConeVec at_y = apply_at(y_);
    ConeVec r_d = at_y;
    r_d.axpy(1.0, s_);
    r_d.axpy(-tau_, c_);
    const double cx = c_.dot(x_);
    const double by = ps_.b.dot(y_);
    const double r_g = cx - by + kappa_;
    const double mu = (x_.dot(s_) + tau_ * kappa_) / (nu_ + 1);

    const double pres = r_p.norm() / tau_ / (1.0 + norm_b);
    const double dres = r_d.norm() / tau_ / (1.0 + norm_c);
    const double pobj = cx / tau_;
    const double dobj = by / tau_;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(dobj));
    rep.max_primal_residual = dres;
    rep.max_dual_residual = pres;
    rep.duality_gap = gap;
    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "non-finite iterate";
      break;
    }
    if (pres <= opt_.tolerance && dres <= opt_.tolerance && gap <= opt_.tolerance) {
      rep.status = SolveStatus::Optimal;
      break;
    }
    if (tau_ < kappa_) {
      // Farkas certificates of the homogeneous model.
      const double tol = opt_.tolerance;
      if (cx < 0.0 && ax.norm() <= tol * -cx) {
        rep.status = SolveStatus::Infeasible;
        rep.message = "certificate of infeasibility";
        break;
      }
      ConeVec ray = at_y;
      ray.axpy(1.0, s_);
      if (by > 0.0 && ray.norm() <= tol * by) {
        rep.status = SolveStatus::Unbounded;
        rep.message = "certificate of unboundedness";
        break;
      }
    }
    rep.message.clear();
    if (it == opt_.max_iterations) break;

    if (!compute_scaling()) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "iterate left the cone";
      break;
    }
    if (!factor_schur()) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "Schur complement factorization failed";
      break;
    }
    // Shared second right-hand side of the reduced system.
    ConeVec theta_c = apply_theta(c_);
    q_ = solve_schur(ps_.b + apply_a(theta_c));
    at_q_ = apply_at(q_);
    v_dir_ = apply_theta(at_q_);
    v_dir_.axpy(-1.0, theta_c);
    v_den_ = c_.dot(v_dir_) - ps_.b.dot(q_) - kappa_ / tau_;

    // Predictor.
    ConeVec rc_aff;
    rc_aff.lp = -x_.lp;  // (-x.s)/s
    for (const auto& sc : scal_) {
      // R (Lambda diamond -Lambda^2) R' = -R Lambda R' = -X
      rc_aff.psd.push_back(-(sc.r * sc.lambda.asDiagonal() * sc.r.transpose()));
    }
    ConeVec neg_rd = r_d;
    neg_rd.lp = -neg_rd.lp;
    for (auto& m : neg_rd.psd) m = -m;
    const Direction aff = direction(-r_p, neg_rd, -r_g, -tau_ * kappa_, rc_aff);
    const double alpha_aff = std::min(1.0, max_step(aff));

    ConeVec xa = x_;
    xa.axpy(alpha_aff, aff.dx);
    ConeVec sa = s_;
    sa.axpy(alpha_aff, aff.ds);
    const double mu_aff =
        (xa.dot(sa) + (tau_ + alpha_aff * aff.dtau) * (kappa_ + alpha_aff * aff.dkappa)) / (nu_ + 1);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);
    const double eta = 1.0 - sigma;

    // Corrector.
    ConeVec rc;
    rc.lp = (VectorXd::Constant(n_lp_, sigma * mu) - x_.lp.cwiseProduct(s_.lp) -
             aff.dx.lp.cwiseProduct(aff.ds.lp))
                .cwiseQuotient(s_.lp);
    for (std::size_t k = 0; k < scal_.size(); ++k) {
      const Scaling& sc = scal_[k];
      const int n = static_cast<int>(sc.lambda.size());
      const MatrixXd dxs = sc.rinv * aff.dx.psd[k] * sc.rinv.transpose();
      const MatrixXd dss = sc.r.transpose() * aff.ds.psd[k] * sc.r;
      MatrixXd target = -0.5 * (dxs * dss + dss * dxs);
      for (int i = 0; i < n; ++i) target(i, i) += sigma * mu - sc.lambda[i] * sc.lambda[i];
      MatrixXd e(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) e(i, j) = 2.0 * target(i, j) / (sc.lambda[i] + sc.lambda[j]);
      }
      rc.psd.push_back(sc.r * e * sc.r.transpose());
    }
    ConeVec rd_target = neg_rd;
    rd_target.lp *= eta;
    for (auto& m : rd_target.psd) m *= eta;
    const Direction dir = direction(-eta * r_p, rd_target, -eta * r_g,
                                    sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa, rc);
    const double alpha = std::min(1.0, opt_.step_fraction * max_step(dir));
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "zero step length";
      break;
    }
    x_.axpy(alpha, dir.dx);
    s_.axpy(alpha, dir.ds);
    for (auto& m : x_.psd) m = 0.5 * (m + m.transpose()).eval();
    for (auto& m : s_.psd) m = 0.5 * (m + m.transpose()).eval();
    y_ += alpha * dir.dy;
    tau_ += alpha * dir.dtau;
    kappa_ += alpha * dir.dkappa;
  }
  // Degenerate problems often stall just short of the tolerance; the last
  // accepted iterate is still usable.
  if ((rep.status == SolveStatus::NumericalFailure || rep.status == SolveStatus::IterLimit) &&
      rep.message != "non-finite iterate" && rep.max_primal_residual <= opt_.near_optimal_tolerance &&
      rep.max_dual_residual <= opt_.near_optimal_tolerance && rep.duality_gap <= opt_.near_optimal_tolerance) {
    rep.status = SolveStatus::Optimal;
    rep.message = "near optimal: " + (rep.message.empty() ? std::string("iteration limit") : rep.message);
  }
  return rep;
}

}  // namespace

SolveReport solve(const ConicProgram& program, const SolverOptions& options) {
  SolveReport rep;
  try {
    program.validate();
  } catch (const Error& e) {
    rep.status = SolveStatus::NumericalFailure;
    rep.message = e.what();
    return rep;
  }
  if (program.total_psd_dimension() > options.max_psd_dimension) {
    rep.status = SolveStatus::NumericalFailure;
    rep.message = "total PSD dimension exceeds the configured cap";
    return rep;
  }
  const Presolved ps = presolve(program);
  if (!ps.infeasible.empty()) {
    rep.status = SolveStatus::Infeasible;
    rep.message = ps.infeasible;
    return rep;
  }

  Solver solver(ps, options);
  rep = solver.run();

  const double tau = solver.tau_;
  const VectorXd y = ps.map.lift(solver.y_ / tau);
  rep.y.assign(y.data(), y.data() + y.size());
  rep.objective_value = 0.0;
  for (int v = 0; v < program.num_vars; ++v) rep.objective_value += program.objective[v] * y[v];

  rep.nonneg_multipliers.assign(program.nonneg_rows.size(), 0.0);
  for (std::size_t r = 0; r < ps.lp_original.size(); ++r) {
    rep.nonneg_multipliers[ps.lp_original[r]] = solver.x_.lp[r] / tau * ps.lp_scale[r];
  }
  rep.psd_multipliers.clear();
  for (const auto& b : program.psd_blocks) rep.psd_multipliers.push_back(MatrixXd::Zero(b.size, b.size));
  double dual = 0.0;
  for (std::size_t k = 0; k < ps.blocks.size(); ++k) {
    const Block& blk = ps.blocks[k];
    rep.psd_multipliers[blk.original_index] = solver.x_.psd[k] / tau * blk.scale;
    dual += blk.c.cwiseProduct(solver.x_.psd[k]).sum() / tau;
  }
  dual += ps.c_lp.dot(solver.x_.lp) / tau;
  rep.dual_objective = dual + ps.objective_offset;
  return rep;
}

void write_program(std::ostream& os, const ConicProgram& p) {
  const auto old = os.precision(17);
  os << "bellvol-conic 1\n";
  os << "vars " << p.num_vars << '\n';
  int nz = 0;
  for (double c : p.objective) nz += c != 0.0;
  os << "objective " << nz << '\n';
  for (int v = 0; v < p.num_vars; ++v) {
    if (p.objective[v] != 0.0) os << v << ' ' << p.objective[v] << '\n';
  }
  auto write_rows = [&](const char* tag, const std::vector<AffineRow>& rows) {
    os << tag << ' ' << rows.size() << '\n';
    for (const auto& r : rows) {
      os << r.constant << ' ' << r.terms.size();
      for (const auto& t : r.terms) os << ' ' << t.var << ' ' << t.coef;
      os << '\n';
    }
  };
  write_rows("nonneg", p.nonneg_rows);
  write_rows("eq", p.eq_rows);
  os << "psd " << p.psd_blocks.size() << '\n';
  for (const auto& b : p.psd_blocks) {
    os << "block " << b.size << ' ' << b.terms.size() << '\n';
    for (const auto& t : b.terms) os << t.var << ' ' << t.row << ' ' << t.col << ' ' << t.coef << '\n';
  }
  os << "end\n";
  os.precision(old);
}

ConicProgram read_program(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word) throw ConfigError("conic program: expected '" + word + "'");
  };
  ConicProgram p;
  expect("bellvol-conic");
  int version = 0;
  is >> version;
  if (version != 1) throw ConfigError("conic program: unsupported version");
  expect("vars");
  is >> p.num_vars;
  p.objective.assign(p.num_vars, 0.0);
  expect("objective");
  int nz = 0;
  is >> nz;
  for (int i = 0; i < nz; ++i) {
    int v = 0;
    double c = 0.0;
    is >> v >> c;
    if (v < 0 || v >= p.num_vars) throw ConfigError("conic program: objective index out of range");
    p.objective[v] = c;
  }
  auto read_rows = [&](const std::string& tag, std::vector<AffineRow>& rows) {
    expect(tag);
    std::size_t n = 0;
    is >> n;
    rows.resize(n);
    for (auto& r : rows) {
      std::size_t k = 0;
      is >> r.constant >> k;
      r.terms.resize(k);
      for (auto& t : r.terms) is >> t.var >> t.coef;
    }
  };
  read_rows("nonneg", p.nonneg_rows);
  read_rows("eq", p.eq_rows);
  expect("psd");
  std::size_t nb = 0;
  is >> nb;
  p.psd_blocks.resize(nb);
  for (auto& b : p.psd_blocks) {
    expect("block");
    std::size_t k = 0;
    is >> b.size >> k;
    b.terms.resize(k);
    for (auto& t : b.terms) is >> t.var >> t.row >> t.col >> t.coef;
  }
  expect("end");
  if (!is) throw ConfigError("conic program: truncated input");
  p.validate();
  return p;
}

}  // namespace bellvol::conic
