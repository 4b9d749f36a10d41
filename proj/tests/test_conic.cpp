#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bellvol/conic.hpp"

using namespace bellvol::conic;

namespace {

ConicProgram two_by_two() {
  // maximize v  s.t. [[1, v], [v, 1]] PSD
  ConicProgram p;
  p.num_vars = 1;
  p.objective = {1.0};
  PsdBlock b;
  b.size = 2;
  b.terms = {{kConstant, 0, 0, 1.0}, {kConstant, 1, 1, 1.0}, {0, 0, 1, 1.0}};
  p.psd_blocks.push_back(b);
  return p;
}

void check_certificate(const ConicProgram& p, const SolveReport& r) {
  ASSERT_EQ(r.status, SolveStatus::Optimal) << r.message;
  EXPECT_LE(r.objective_value, r.dual_objective + 1e-7);
  for (const auto& b : p.psd_blocks) {
    const Eigen::MatrixXd m = evaluate_block(b, r.y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * (1.0 + m.norm()));
  }
  for (const auto& row : p.nonneg_rows) EXPECT_GE(evaluate_row(row, r.y), -1e-7);
  for (const auto& row : p.eq_rows) EXPECT_NEAR(evaluate_row(row, r.y), 0.0, 1e-7);
}

}  // namespace

TEST(Conic, TwoByTwoPsd) {
  const ConicProgram p = two_by_two();
  const SolveReport r = solve(p);
  check_certificate(p, r);
  EXPECT_NEAR(r.objective_value, 1.0, 1e-7);
  EXPECT_NEAR(r.y[0], 1.0, 1e-7);
}

TEST(Conic, SmallLp) {
  // maximize x + y  s.t. x >= 0, y >= 0, x + 2y <= 4, 3x + y <= 6
  ConicProgram p;
  p.num_vars = 2;
  p.objective = {1.0, 1.0};
  p.nonneg_rows = {{0.0, {{0, 1.0}}},
                   {0.0, {{1, 1.0}}},
                   {4.0, {{0, -1.0}, {1, -2.0}}},
                   {6.0, {{0, -3.0}, {1, -1.0}}}};
  const SolveReport r = solve(p);
  check_certificate(p, r);
  EXPECT_NEAR(r.y[0], 1.6, 1e-7);
  EXPECT_NEAR(r.y[1], 1.2, 1e-7);
  EXPECT_NEAR(r.objective_value, 2.8, 1e-7);
  // Multipliers of the two binding rows: 0.4 and 0.2.
  EXPECT_NEAR(r.nonneg_multipliers[2], 0.4, 1e-6);
  EXPECT_NEAR(r.nonneg_multipliers[3], 0.2, 1e-6);
}

TEST(Conic, EqualityElimination) {
  // maximize x0 + x1 + x2  s.t. x0 + x1 = 1, x2 = 0.5, x1 - x0 = 0.2, all >= 0
  ConicProgram p;
  p.num_vars = 3;
  p.objective = {1.0, 1.0, 1.0};
  p.eq_rows = {{-1.0, {{0, 1.0}, {1, 1.0}}}, {-0.5, {{2, 1.0}}}, {-0.2, {{1, 1.0}, {0, -1.0}}}};
  for (int i = 0; i < 3; ++i) p.nonneg_rows.push_back({0.0, {{i, 1.0}}});
  const SolveReport r = solve(p);
  check_certificate(p, r);
  EXPECT_NEAR(r.y[0], 0.4, 1e-9);
  EXPECT_NEAR(r.y[1], 0.6, 1e-9);
  EXPECT_NEAR(r.y[2], 0.5, 1e-9);
}

TEST(Conic, DetectsInfeasible) {
  ConicProgram p;
  p.num_vars = 1;
  p.objective = {1.0};
  p.nonneg_rows = {{-1.0, {{0, 1.0}}}, {0.0, {{0, -1.0}}}};  // x >= 1, x <= 0
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);

  ConicProgram q = two_by_two();
  q.nonneg_rows = {{-2.0, {{0, 1.0}}}};  // v >= 2 conflicts with |v| <= 1
  EXPECT_EQ(solve(q).status, SolveStatus::Infeasible);

  ConicProgram e;
  e.num_vars = 2;
  e.objective = {1.0, 0.0};
  e.eq_rows = {{-1.0, {{0, 1.0}, {1, 1.0}}}, {-2.0, {{0, 1.0}, {1, 1.0}}}};
  EXPECT_EQ(solve(e).status, SolveStatus::Infeasible);
}

TEST(Conic, DetectsUnbounded) {
  ConicProgram p;
  p.num_vars = 1;
  p.objective = {1.0};
  p.nonneg_rows = {{0.0, {{0, 1.0}}}};
  EXPECT_EQ(solve(p).status, SolveStatus::Unbounded);
}

TEST(Conic, LargerPsdAgainstEigenvalue) {
  // maximize -t s.t. t I - C PSD  =>  -lambda_max(C)
  Eigen::MatrixXd c(4, 4);
  c << 2, 1, 0, 0.5, 1, 3, -1, 0, 0, -1, 1, 0.2, 0.5, 0, 0.2, -1;
  ConicProgram p;
  p.num_vars = 1;
  p.objective = {-1.0};
  PsdBlock b;
  b.size = 4;
  for (int i = 0; i < 4; ++i) {
    b.terms.push_back({0, i, i, 1.0});
    for (int j = i; j < 4; ++j) b.terms.push_back({kConstant, i, j, -c(i, j)});
  }
  p.psd_blocks.push_back(b);
  const SolveReport r = solve(p);
  check_certificate(p, r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  EXPECT_NEAR(r.y[0], eig.eigenvalues().maxCoeff(), 1e-7);
}

TEST(Conic, ScalingRobustness) {
  ConicProgram p;
  p.num_vars = 3;
  p.objective = {1.0, 1.0, 1.0};
  p.eq_rows = {{-1.0, {{0, 1.0}, {1, 1.0}}}, {-0.2, {{1, 1.0}, {0, -1.0}}}};
  for (int i = 0; i < 3; ++i) p.nonneg_rows.push_back({0.0, {{i, 1.0}}});
  p.nonneg_rows.push_back({2.0, {{2, -1.0}, {0, -1.0}}});
  const double base = solve(p).objective_value;
  for (auto& row : p.eq_rows) {
    row.constant *= 1e3;
    for (auto& t : row.terms) t.coef *= 1e3;
  }
  EXPECT_NEAR(solve(p).objective_value, base, 1e-6);
}

TEST(Conic, ExchangeFormatRoundTrip) {
  ConicProgram p = two_by_two();
  p.nonneg_rows = {{0.25, {{0, -1.0 / 3.0}}}};
  p.eq_rows = {};
  std::stringstream ss;
  write_program(ss, p);
  const ConicProgram q = read_program(ss);
  std::stringstream again;
  write_program(again, q);
  std::stringstream first;
  write_program(first, p);
  EXPECT_EQ(first.str(), again.str());
  EXPECT_NEAR(solve(q).objective_value, solve(p).objective_value, 1e-12);
}

TEST(Conic, RejectsMalformed) {
  ConicProgram p = two_by_two();
  p.psd_blocks[0].terms.push_back({3, 0, 0, 1.0});
  EXPECT_EQ(solve(p).status, SolveStatus::NumericalFailure);
}
