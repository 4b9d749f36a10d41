#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bellvol/errors.hpp"
#include "bellvol/scenario.hpp"

using namespace bellvol;

namespace {

// Independent Euclidean distance, summed straight from table definitions.
double distance_to_uniform(const BellScenario& s, auto&& p) {
  const int ns = s.settings();
  const int no = s.outcomes();
  double sum = 0.0;
  for (int x = 1; x <= ns; ++x)
    for (int y = 1; y <= ns; ++y)
      for (int a = 1; a <= no; ++a)
        for (int b = 1; b <= no; ++b) {
          const double d = p(a, b, x, y) - 1.0 / (no * no);
          sum += d * d;
        }
  return std::sqrt(sum);
}

}  // namespace

TEST(Scenario, CgDimExamples) {
  EXPECT_EQ(BellScenario(2, 2).cg_dim(), 8);
  EXPECT_EQ(BellScenario(3, 3).cg_dim(), 48);
  EXPECT_EQ(BellScenario(1, 2).cg_dim(), 3);
  EXPECT_EQ(cg_dim(BellScenario(5, 4)), 255);
}

TEST(Scenario, CgDimMatchesLocalPolytopeDimensionTable) {
  // (n_s, n_o) -> dimension column of the size table.
  const int table[][3] = {{2, 2, 8},   {2, 3, 24},  {2, 4, 48},  {2, 5, 80},  {2, 6, 120},
                          {2, 7, 168}, {2, 8, 224}, {2, 9, 288}, {3, 2, 15},  {3, 3, 48},
                          {3, 4, 99},  {3, 5, 168}, {4, 2, 24},  {4, 3, 80},  {4, 4, 168},
                          {5, 2, 35},  {5, 3, 120}, {5, 4, 255}, {6, 2, 48},  {6, 3, 168}};
  for (const auto& row : table) EXPECT_EQ(BellScenario(row[0], row[1]).cg_dim(), row[2]);
  for (int ns = 1; ns <= 6; ++ns) {
    for (int no = 2; no <= 9; ++no) {
      // Independent count: joints over omitted-free outcomes plus the marginals.
      int count = 0;
      for (int x = 1; x <= ns; ++x)
        for (int a = 1; a < no; ++a) count += 2;
      for (int x = 1; x <= ns; ++x)
        for (int y = 1; y <= ns; ++y) count += (no - 1) * (no - 1);
      EXPECT_EQ(BellScenario(ns, no).cg_dim(), count);
    }
  }
}

TEST(Scenario, RejectsInvalid) {
  EXPECT_THROW(BellScenario(0, 2), ConfigError);
  EXPECT_THROW(BellScenario(2, 1), ConfigError);
  EXPECT_THROW(BellScenario::parse("2"), ConfigError);
  EXPECT_THROW(BellScenario::parse("2,x"), ConfigError);
  EXPECT_EQ(BellScenario::parse("(3,4)"), BellScenario(3, 4));
  EXPECT_EQ(BellScenario::parse("3,4").to_string(), "3,4");
}

TEST(Scenario, WhiteNoise) {
  for (auto [ns, no] : {std::pair{2, 2}, {2, 3}, {3, 4}}) {
    const BellScenario s(ns, no);
    const Correlation w = white_noise(s);
    const int marg = 2 * ns * (no - 1);
    for (int i = 0; i < s.cg_dim(); ++i) {
      EXPECT_DOUBLE_EQ(w.coords[i], i < marg ? 1.0 / no : 1.0 / (no * no));
    }
    const FullDistribution f = to_full(w);
    for (double p : f.table()) EXPECT_NEAR(p, 1.0 / (no * no), 1e-15);
  }
}

TEST(Scenario, DeterministicVertexToFull) {
  const BellScenario s(2, 2);
  const FullDistribution f = to_full(deterministic_point(s, {1, 1}, {1, 1}));
  for (int x = 1; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y)
      for (int a = 1; a <= 2; ++a)
        for (int b = 1; b <= 2; ++b) EXPECT_DOUBLE_EQ(f.at(a, b, x, y), a == 1 && b == 1 ? 1.0 : 0.0);
}

TEST(Scenario, PrBoxRoundTrip) {
  const BellScenario s(2, 2);
  const FullDistribution f = to_full(pr_box(s));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          EXPECT_NEAR(f.at(a + 1, b + 1, x + 1, y + 1), ((a ^ b) == x * y) ? 0.5 : 0.0, 1e-15);
  const Correlation back = from_full(f);
  const Correlation pr = pr_box(s);
  for (int i = 0; i < s.cg_dim(); ++i) EXPECT_NEAR(back.coords[i], pr.coords[i], 1e-15);
}

TEST(Scenario, SignalingTableRejected) {
  const BellScenario s(2, 2);
  FullDistribution f = to_full(white_noise(s));
  // Alice's marginal for x=1 now depends on y.
  f.at(1, 1, 1, 2) += 0.1;
  f.at(2, 1, 1, 2) -= 0.1;
  EXPECT_THROW(from_full(f), SignalingInput);
}

TEST(Scenario, RoundTripOnMixturesOfVertices) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const BellScenario s(3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Correlation c = white_noise(s);
    for (double& v : c.coords) v *= 0.3;
    double left = 0.7;
    for (int k = 0; k < 4; ++k) {
      const double w = k == 3 ? left : left * u(rng);
      left -= w;
      const Correlation d = deterministic_point(s, {pick(rng), pick(rng), pick(rng)},
                                                {pick(rng), pick(rng), pick(rng)});
      for (int i = 0; i < s.cg_dim(); ++i) c.coords[i] += w * d.coords[i];
    }
    const FullDistribution f = to_full(c);
    EXPECT_LT(f.normalization_residual(), 1e-12);
    EXPECT_LT(f.signaling_residual(), 1e-12);
    const Correlation back = from_full(f);
    for (int i = 0; i < s.cg_dim(); ++i) EXPECT_NEAR(back.coords[i], c.coords[i], 1e-12);
    const FullDistribution again = to_full(back);
    EXPECT_LT(full_distance(f, again), 1e-12);
  }
}

TEST(Scenario, LocalVertexDistance) {
  EXPECT_NEAR(dist_local_vertex_to_noise(BellScenario(2, 2)), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(dist_local_vertex_to_noise(BellScenario(1, 2)), std::sqrt(3.0) / 2.0, 1e-12);
  std::mt19937_64 rng(11);
  for (int no = 2; no <= 7; ++no) {
    const BellScenario s(2, no);
    std::uniform_int_distribution<int> pick(1, no);
    for (int rep = 0; rep < 10; ++rep) {
      const std::vector<int> fa{pick(rng), pick(rng)};
      const std::vector<int> fb{pick(rng), pick(rng)};
      const double direct = distance_to_uniform(s, [&](int a, int b, int x, int y) {
        return (a == fa[x - 1] && b == fb[y - 1]) ? 1.0 : 0.0;
      });
      EXPECT_NEAR(direct, dist_local_vertex_to_noise(s), 1e-12);
    }
  }
}

TEST(Scenario, NonlocalVertexDistance) {
  EXPECT_NEAR(dist_ns_vertex_to_noise(BellScenario(2, 2), 2), 1.0, 1e-12);
  EXPECT_NEAR(dist_ns_vertex_to_noise(BellScenario(2, 3), 3), 2.0 * std::sqrt(2.0 / 9.0), 1e-12);
  for (int no = 2; no <= 7; ++no) {
    const BellScenario s(2, no);
    for (int k = 2; k <= no; ++k) {
      // Direct summation over an independently built table.
      const double direct = distance_to_uniform(s, [&](int a, int b, int x, int y) {
        const int a0 = a - 1, b0 = b - 1;
        if (a0 >= k || b0 >= k) return 0.0;
        return (((b0 - a0) % k + k) % k == (x - 1) * (y - 1)) ? 1.0 / k : 0.0;
      });
      EXPECT_NEAR(direct, dist_ns_vertex_to_noise(s, k), 1e-12);
      const FullDistribution f = ns_extreme_point(s, k);
      EXPECT_NEAR(full_distance(f, to_full(white_noise(s))), direct, 1e-12);
      EXPECT_LT(dist_ns_vertex_to_noise(s, k), dist_local_vertex_to_noise(s));
    }
  }
  EXPECT_THROW(dist_ns_vertex_to_noise(BellScenario(3, 3), 2), DomainError);
  EXPECT_THROW(dist_ns_vertex_to_noise(BellScenario(2, 3), 4), DomainError);
  EXPECT_THROW(dist_ns_vertex_to_noise(BellScenario(2, 3), 1), DomainError);
}
