#include "bellvol/local_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "bellvol/errors.hpp"
#include "bellvol/rng.hpp"

namespace bellvol {

namespace {

std::int64_t ipow(std::int64_t base, int exp, std::int64_t cap) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > cap / base + 1) return cap + 1;
    r *= base;
  }
  return r;
}

}  // namespace

VertexTable::VertexTable(const BellScenario& s, std::int64_t cap) : scenario_(s) {
  per_party_ = ipow(s.outcomes(), s.settings(), std::numeric_limits<std::int64_t>::max() / 4);
  count_ = ipow(s.outcomes(), 2 * s.settings(), cap);
  if (count_ > cap) {
    throw TooManyVertices("scenario " + s.to_string() + " has more than " + std::to_string(cap) +
                          " local vertices");
  }
  if (count_ * s.cg_dim() <= kDenseLimit) {
    dense_ = Eigen::MatrixXd::Zero(count_, s.cg_dim());
    for (std::int64_t k = 0; k < count_; ++k) {
      for (int j : support(k)) dense_(k, j) = 1.0;
    }
  }
}

void VertexTable::decode(std::int64_t k, std::vector<int>& alice, std::vector<int>& bob) const {
  const int ns = scenario_.settings();
  const int no = scenario_.outcomes();
  alice.resize(ns);
  bob.resize(ns);
  for (int x = 0; x < ns; ++x) {
    alice[x] = static_cast<int>(k % no) + 1;
    k /= no;
  }
  for (int y = 0; y < ns; ++y) {
    bob[y] = static_cast<int>(k % no) + 1;
    k /= no;
  }
}

std::int64_t VertexTable::encode(const std::vector<int>& alice, const std::vector<int>& bob) const {
  const int ns = scenario_.settings();
  const int no = scenario_.outcomes();
  std::int64_t k = 0;
  for (int y = ns - 1; y >= 0; --y) k = k * no + (bob[y] - 1);
  for (int x = ns - 1; x >= 0; --x) k = k * no + (alice[x] - 1);
  return k;
}

std::vector<int> VertexTable::support(std::int64_t k) const {
  std::vector<int> fa;
  std::vector<int> fb;
  decode(k, fa, fb);
  const int ns = scenario_.settings();
  const int no = scenario_.outcomes();
  std::vector<int> out;
  for (int x = 1; x <= ns; ++x) {
    if (fa[x - 1] < no) out.push_back(scenario_.alice_index(fa[x - 1], x));
  }
  for (int y = 1; y <= ns; ++y) {
    if (fb[y - 1] < no) out.push_back(scenario_.bob_index(fb[y - 1], y));
  }
  for (int x = 1; x <= ns; ++x) {
    for (int y = 1; y <= ns; ++y) {
      if (fa[x - 1] < no && fb[y - 1] < no) out.push_back(scenario_.joint_index(fa[x - 1], fb[y - 1], x, y));
    }
  }
  return out;
}

Eigen::VectorXd VertexTable::vertex(std::int64_t k) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(scenario_.cg_dim());
  for (int j : support(k)) v[j] = 1.0;
  return v;
}

VertexTable enumerate_vertices(const BellScenario& s, std::int64_t cap) { return VertexTable(s, cap); }

namespace {

// Restricted Bell-functional form of the visibility LP over `cols`:
//   maximize -(beta.w + mu + cap tau)
//   s.t. beta.D_k + mu >= 0 (k in cols), tau - beta.(c - w) - 1 >= 0, tau >= 0.
// Multipliers of the vertex rows are the mixture weights, that of the second
// row is v.
conic::SolveReport solve_master(const Correlation& c, const Correlation& w, const VertexTable& vt,
                                const std::vector<std::int64_t>& cols, const conic::SolverOptions& opt) {
  const int d = c.scenario.cg_dim();
  conic::ConicProgram p;
  p.num_vars = d + 2;
  p.objective.assign(p.num_vars, 0.0);
  for (int j = 0; j < d; ++j) p.objective[j] = -w.coords[j];
  p.objective[d] = -1.0;
  p.objective[d + 1] = -kVisibilityCap;
  p.nonneg_rows.reserve(cols.size() + 2);
  for (std::int64_t k : cols) {
    conic::AffineRow row;
    for (int j : vt.support(k)) row.terms.push_back({j, 1.0});
    row.terms.push_back({d, 1.0});
    p.nonneg_rows.push_back(std::move(row));
  }
  conic::AffineRow vrow;
  vrow.constant = -1.0;
  for (int j = 0; j < d; ++j) {
    const double diff = c.coords[j] - w.coords[j];
    if (diff != 0.0) vrow.terms.push_back({j, -diff});
  }
  vrow.terms.push_back({d + 1, 1.0});
  p.nonneg_rows.push_back(std::move(vrow));
  p.nonneg_rows.push_back({0.0, {{d + 1, 1.0}}});
  return conic::solve(p, opt);
}

// Most negative reduced costs beta.D_k + mu, found exactly by fixing Alice's
// strategy and minimizing Bob's setting by setting.
std::vector<std::pair<double, std::int64_t>> price(const VertexTable& vt, const std::vector<double>& y,
                                                   double threshold) {
  const BellScenario& s = vt.scenario();
  const int ns = s.settings();
  const int no = s.outcomes();
  const int d = s.cg_dim();
  const double mu = y[d];
  std::vector<std::pair<double, std::int64_t>> found;
  std::vector<int> fa(ns, 1);
  std::vector<int> fb(ns, 1);
  for (std::int64_t ka = 0; ka < vt.strategies_per_party(); ++ka) {
    std::int64_t t = ka;
    for (int x = 0; x < ns; ++x) {
      fa[x] = static_cast<int>(t % no) + 1;
      t /= no;
    }
    double total = mu;
    for (int x = 1; x <= ns; ++x) {
      if (fa[x - 1] < no) total += y[s.alice_index(fa[x - 1], x)];
    }
    for (int yy = 1; yy <= ns; ++yy) {
      double best = 0.0;  // outcome n_o contributes nothing
      int arg = no;
      for (int b = 1; b < no; ++b) {
        double cost = y[s.bob_index(b, yy)];
        for (int x = 1; x <= ns; ++x) {
          if (fa[x - 1] < no) cost += y[s.joint_index(fa[x - 1], b, x, yy)];
        }
        if (cost < best) {
          best = cost;
          arg = b;
        }
      }
      total += best;
      fb[yy - 1] = arg;
    }
    if (total < threshold) found.emplace_back(total, vt.encode(fa, fb));
  }
  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace

LocalSolution solve_local_visibility(const Correlation& c, const VertexTable& vt, const LocalOptions& opt) {
  if (!(c.scenario == vt.scenario())) throw DomainError("correlation and vertex table disagree on scenario");
  if (static_cast<int>(c.coords.size()) != c.scenario.cg_dim()) throw DomainError("wrong coordinate count");
  const Correlation w = white_noise(c.scenario);
  const int d = c.scenario.cg_dim();
  const int no = c.scenario.outcomes();

  std::vector<std::int64_t> cols;
  const bool generate = vt.size() > opt.direct_limit;
  if (!generate) {
    cols.resize(vt.size());
    for (std::int64_t k = 0; k < vt.size(); ++k) cols[k] = k;
  } else {
    // Constant strategies reproduce white noise, so the master is never
    // infeasible; the rest is a random subset.
    std::unordered_set<std::int64_t> chosen;
    const int ns = c.scenario.settings();
    for (int i = 1; i <= no; ++i) {
      for (int j = 1; j <= no; ++j) {
        const std::int64_t k = vt.encode(std::vector<int>(ns, i), std::vector<int>(ns, j));
        if (chosen.insert(k).second) cols.push_back(k);
      }
    }
    Rng rng(opt.seed);
    const std::int64_t target = std::min<std::int64_t>(vt.size(), opt.initial_columns);
    while (static_cast<std::int64_t>(cols.size()) < target) {
      const auto k = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(vt.size())));
      if (chosen.insert(k).second) cols.push_back(k);
    }
    std::sort(cols.begin(), cols.end());
  }

  LocalSolution sol;
  conic::SolveReport rep;
  for (int round = 0;; ++round) {
    rep = solve_master(c, w, vt, cols, opt.solver);
    sol.pricing_rounds = round;
    if (!generate || rep.status != conic::SolveStatus::Optimal) break;
    double scale = 1.0;
    for (int j = 0; j <= d; ++j) scale = std::max(scale, std::abs(rep.y[j]));
    const auto cand = price(vt, rep.y, -1e-7 * scale);
    std::vector<std::int64_t> fresh;
    for (const auto& [cost, k] : cand) {
      if (!std::binary_search(cols.begin(), cols.end(), k)) fresh.push_back(k);
      if (static_cast<int>(fresh.size()) >= opt.columns_per_round) break;
    }
    if (fresh.empty()) break;
    if (round + 1 >= opt.max_rounds) {
      rep.status = conic::SolveStatus::IterLimit;
      rep.message = "column generation did not converge";
      break;
    }
    cols.insert(cols.end(), fresh.begin(), fresh.end());
    std::sort(cols.begin(), cols.end());
  }

  sol.result.status = rep.status;
  sol.result.iterations = rep.iterations;
  sol.result.message = rep.message;
  if (rep.status == conic::SolveStatus::Optimal) {
    sol.result.v_star = -rep.objective_value;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const double q = rep.nonneg_multipliers[i];
      if (q > 1e-12) sol.weights.emplace_back(cols[i], q);
    }
  }
  return sol;
}

VisibilityResult visibility_to_L(const Correlation& c, const VertexTable& vt, const LocalOptions& opt) {
  return solve_local_visibility(c, vt, opt).result;
}

}  // namespace bellvol
