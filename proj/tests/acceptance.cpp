// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "bellvol/local_set.hpp"
#include "bellvol/membership.hpp"
#include "bellvol/polytope.hpp"
#include "bellvol/selftest.hpp"
#include "bellvol/volume.hpp"

using namespace bellvol;

namespace {

// Tolerances and sample sizes, fixed before any run.
constexpr double kAnchor22 = 16.0 / 17.0;
constexpr double kAnchor22Tol = 0.010;
constexpr double kAnchor32 = 18176.0 / 29205.0;
constexpr double kAnchor32Tol = 0.015;
constexpr double kAnchor23 = 0.9382;
constexpr double kAnchor23Tol = 0.015;

constexpr double kRvQ1_22 = 0.9980, kRvQt1_22 = 0.9925, kRvQt2_22 = 0.9917, kRv22Tol = 0.005;
constexpr double kRvQ1_32 = 0.9723, kRvQt1_32 = 0.9211, kRvQ32Tol = 0.01;
constexpr double kRvL_32 = 0.6218, kRvL32Tol = 0.02;

constexpr double kPrLocal = 0.5, kPrLocalTol = 1e-6;
constexpr double kTsirelson = 0.70711, kTsirelsonTol = 1e-4;
constexpr double kChainSlack = 1e-7;
constexpr double kMomentTol = 0.01;
constexpr double kRvL42 = 0.211, kRvL42Tol = 0.04;
constexpr double kNaive = 0.5795, kNaiveTol = 5e-4;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Report {
  int failed = 0;
  void line(int id, bool pass, const std::string& what) {
    std::printf("%s %d %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
};

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100 * x);
  return buf;
}

std::string num(double x, int digits = 8) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

Eigen::MatrixXd draw(const BellScenario& s, std::int64_t n, std::uint64_t seed) {
  return sample_uniform(ns_polytope(s), n, seed);
}

// Every target genuinely solved for every sample.
std::vector<MembershipVerdict> solve_all(const BellScenario& s, const Eigen::MatrixXd& x, const std::string& targets) {
  const MembershipTester mt(s, parse_targets(targets));
  BatteryOptions bo;
  bo.need_vstar.assign(mt.targets().size(), true);
  return run_batteries(mt, x, bo, workers());
}

RVEstimate rv_of(const std::vector<MembershipVerdict>& vs, const char* tag) {
  const VerdictTable table(vs);
  return estimate_rv(table.column(*table.find(TargetSet::parse(tag))));
}

std::string rv_detail(const RVEstimate& e, double expected, double tol) {
  return e.target.tag() + " " + pct(e.rv) + " (expected " + pct(expected) + " +- " + pct(tol) + ", n=" +
         std::to_string(e.n_total) + ", failed " + std::to_string(e.n_failed) + ")";
}

bool within(const RVEstimate& e, double expected, double tol) {
  return e.n_failed == 0 && std::abs(e.rv - expected) <= tol;
}

using Clock = std::chrono::steady_clock;

void timed(const char* name, const std::function<void()>& f) {
  const auto t0 = Clock::now();
  f();
  std::fprintf(stderr, "[%s took %.1f s]\n", name, std::chrono::duration<double>(Clock::now() - t0).count());
}

}  // namespace

int main() {
  Report r;

  timed("criterion 1", [&] {
    const BellScenario s22(2, 2), s32(3, 2), s23(2, 3);
    const RVEstimate a = rv_of(solve_all(s22, draw(s22, 20000, 101), "L"), "L");
    const RVEstimate b = rv_of(solve_all(s32, draw(s32, 10000, 102), "L"), "L");
    const RVEstimate c = rv_of(solve_all(s23, draw(s23, 10000, 103), "L"), "L");
    const bool pass = within(a, kAnchor22, kAnchor22Tol) && within(b, kAnchor32, kAnchor32Tol) &&
                      within(c, kAnchor23, kAnchor23Tol);
    r.line(1, pass,
           "RV(L) anchors: (2,2) " + rv_detail(a, kAnchor22, kAnchor22Tol) + "; (3,2) " +
               rv_detail(b, kAnchor32, kAnchor32Tol) + "; (2,3) " + rv_detail(c, kAnchor23, kAnchor23Tol));
  });

  // Criteria 2 and 4 share one (2,2) sample set.
  timed("criteria 2 and 4", [&] {
    const BellScenario s(2, 2);
    const auto vs = solve_all(s, draw(s, 10000, 201), "L,Q1,Qt1,Qt2,P1");
    const RVEstimate q1 = rv_of(vs, "Q1"), qt1 = rv_of(vs, "Qt1"), qt2 = rv_of(vs, "Qt2");
    r.line(2, within(q1, kRvQ1_22, kRv22Tol) && within(qt1, kRvQt1_22, kRv22Tol) && within(qt2, kRvQt2_22, kRv22Tol),
           "(2,2) hierarchy RVs: " + rv_detail(q1, kRvQ1_22, kRv22Tol) + "; " + rv_detail(qt1, kRvQt1_22, kRv22Tol) +
               "; " + rv_detail(qt2, kRvQt2_22, kRv22Tol));

    const VerdictTable table(vs);
    const std::size_t l = *table.find(TargetSet::parse("L")), p = *table.find(TargetSet::parse("P1"));
    std::int64_t p_not_l = 0, l_not_p = 0, undecided = 0;
    for (std::size_t k = 0; k < table.sample_ids().size(); ++k) {
      const auto* vl = table.at(k, l);
      const auto* vp = table.at(k, p);
      if (!vl->solved() || !vp->solved()) {
        ++undecided;
        continue;
      }
      p_not_l += vp->inside && !vl->inside;
      l_not_p += vl->inside && !vp->inside;
    }
    r.line(4, p_not_l == 0 && l_not_p == 0 && undecided == 0,
           "(2,2) P1 vs L on 10000 samples: inside P1 but outside L = " + std::to_string(p_not_l) +
               ", inside L but outside P1 = " + std::to_string(l_not_p) + ", unsolved = " +
               std::to_string(undecided));
  });

  timed("criterion 3", [&] {
    const BellScenario s(3, 2);
    const auto vs = solve_all(s, draw(s, 5000, 301), "L,Q1,Qt1");
    const RVEstimate l = rv_of(vs, "L"), q1 = rv_of(vs, "Q1"), qt1 = rv_of(vs, "Qt1");
    r.line(3, within(q1, kRvQ1_32, kRvQ32Tol) && within(qt1, kRvQt1_32, kRvQ32Tol) && within(l, kRvL_32, kRvL32Tol),
           "(3,2) RVs: " + rv_detail(q1, kRvQ1_32, kRvQ32Tol) + "; " + rv_detail(qt1, kRvQt1_32, kRvQ32Tol) + "; " +
               rv_detail(l, kRvL_32, kRvL32Tol));
  });

  timed("criterion 5", [&] {
    bool pass = true;
    std::string detail;
    {
      const BellScenario s(2, 2);
      const MembershipTester mt(s, parse_targets("L,Q1"));
      const MembershipVerdict vl = mt.test(pr_box(s), 0), vq = mt.test(pr_box(s), 1);
      pass = pass && vl.solved() && std::abs(vl.v_star - kPrLocal) <= kPrLocalTol && !vl.inside;
      pass = pass && vq.solved() && std::abs(vq.v_star - kTsirelson) <= kTsirelsonTol && !vq.inside;
      detail = "PR box v*(L) = " + num(vl.v_star) + ", v*(Q1) = " + num(vq.v_star);
    }
    int points = 0, outside = 0;
    for (const auto& [ns, no, targets] : {std::tuple{2, 2, "L,Q1,Q2,Qt1,Qt2,P1,M1,M2"},
                                          std::tuple{2, 3, "L,Q1,Qt1,P1,M1"}, std::tuple{3, 2, "L,Q1,Qt1,P1,M1"}}) {
      const BellScenario s(ns, no);
      const MembershipTester mt(s, parse_targets(targets));
      const VertexTable vt = enumerate_vertices(s);
      std::vector<Correlation> pts{white_noise(s)};
      for (std::int64_t k = 0; k < vt.size(); ++k) {
        Correlation c{s, std::vector<double>(s.cg_dim())};
        const Eigen::VectorXd v = vt.vertex(k);
        for (int i = 0; i < s.cg_dim(); ++i) c.coords[i] = v[i];
        pts.push_back(c);
      }
      for (const Correlation& c : pts) {
        for (std::size_t t = 0; t < mt.targets().size(); ++t) {
          ++points;
          outside += mt.test(c, t).inside ? 0 : 1;
        }
      }
    }
    pass = pass && outside == 0;
    r.line(5, pass,
           detail + "; deterministic vertices and white noise vs every target: " + std::to_string(points - outside) +
               "/" + std::to_string(points) + " inside");
  });

  timed("criteria 6 and 7", [&] {
    int bad = 0;
    std::string first;
    const auto sizes = size_self_test();
    for (const CheckLine& l : sizes) {
      if (!l.pass && first.empty()) first = "; first failure: " + l.name + " " + l.detail;
      bad += l.pass ? 0 : 1;
    }
    r.line(6, bad == 0,
           "moment matrix sizes: " + std::to_string(sizes.size() - bad) + "/" + std::to_string(sizes.size()) +
               " golden values reproduced" + first);
    const auto dist = distance_self_test(Mutation::None, 1e-12);
    bad = 0;
    for (const CheckLine& l : dist) bad += l.pass ? 0 : 1;
    r.line(7, bad == 0,
           "extreme point distances (2,2)..(2,7): " + std::to_string(dist.size() - bad) + "/" +
               std::to_string(dist.size()) + " within 1e-12");
  });

  timed("criterion 8", [&] {
    const BellScenario s(2, 2);
    // Q** for (2,2) is the smaller-RV quantum relaxation measured in criterion 2.
    const MembershipTester mt(s, parse_targets("L,Q1,Qt1,P1,Qt2,M1"));
    BatteryOptions bo;
    bo.need_vstar.assign(mt.targets().size(), true);
    bo.mes_gate = TargetSet::parse("Qt2");
    const auto vs = run_batteries(mt, draw(s, 1000, 801), bo, workers());
    const std::size_t nt = mt.targets().size();
    std::int64_t violations = 0, unsolved = 0, gated = 0;
    double worst = -INFINITY;
    auto check = [&](double lo, double hi) {
      worst = std::max(worst, lo - hi);
      violations += lo > hi + kChainSlack ? 1 : 0;
    };
    for (std::size_t k = 0; k * nt < vs.size(); ++k) {
      const MembershipVerdict* v = &vs[k * nt];
      bool ok = true;
      for (std::size_t t = 0; t + 1 < nt; ++t) ok = ok && v[t].solved();
      if (!ok) {
        ++unsolved;
        continue;
      }
      check(v[2].v_star, v[1].v_star);  // Qt1 <= Q1
      check(v[0].v_star, v[3].v_star);  // L <= P1
      if (v[4].inside) {
        if (!v[5].solved()) {
          ++unsolved;
          continue;
        }
        ++gated;
        check(v[0].v_star, v[5].v_star);  // L <= M1
      }
    }
    r.line(8, violations == 0 && unsolved == 0,
           "inclusion chain on 1000 (2,2) samples: " + std::to_string(violations) + " violations, " +
               std::to_string(unsolved) + " unsolved, " + std::to_string(gated) + " Qt2-passers tested against M1, " +
               "largest excess " + num(worst, 10));
  });

  timed("criterion 9", [&] {
    constexpr int d = 5;
    constexpr std::int64_t n = 100000;
    const Eigen::MatrixXd cube = sample_uniform(unit_hypercube(d), n, 901);
    const Eigen::MatrixXd simplex = sample_uniform(unit_simplex(d), n, 902);
    double worst_cube = 0.0, worst_simplex = 0.0;
    for (int j = 0; j < d; ++j) {
      worst_cube = std::max(worst_cube, std::abs(cube.col(j).mean() - 0.5));
      worst_simplex = std::max(worst_simplex, std::abs(simplex.col(j).mean() - 1.0 / (d + 1)));
    }
    const BellScenario s(2, 3);
    const Eigen::MatrixXd a = draw(s, 2000, 903), b = draw(s, 2000, 903);
    const bool identical = std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
    r.line(9, worst_cube <= kMomentTol && worst_simplex <= kMomentTol && identical,
           "sampler: max |mean - 1/2| on the 5-cube " + num(worst_cube, 5) + ", max |mean - 1/6| on the 5-simplex " +
               num(worst_simplex, 5) + " (n=100000, tolerance 0.01); rerun bitwise identical: " +
               (identical ? "yes" : "no"));
  });

  timed("criterion 10", [&] {
    const BellScenario s(4, 2);
    const RVEstimate e = rv_of(solve_all(s, draw(s, 1000, 1001), "L"), "L");
    r.line(10, within(e, kRvL42, kRvL42Tol),
           "desk-scale substitute, (4,2) smoke run: " + rv_detail(e, kRvL42, kRvL42Tol) +
               "; full-scale tables are supported by the CLI but not run here");
  });

  {
    const double b = naive_subcorrelation_bound(16.0 / 17.0, 2, 3);
    r.line(11, std::abs(b - kNaive) <= kNaiveTol, "naive bound (16/17)^9 = " + num(b, 6));
  }

  std::printf("%d of 11 criteria passed\n", 11 - r.failed);
  return r.failed == 0 ? 0 : 1;
}
