#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bellvol {

// A symmetric bipartite Bell scenario: each party picks one of `settings`
// measurements, each with `outcomes` results. Labels are 1-based everywhere in
// the public interface.
class BellScenario {
 public:
  BellScenario(int settings, int outcomes);

  int settings() const { return n_s_; }
  int outcomes() const { return n_o_; }

  // Dimension of the nonsignaling subspace (Collins-Gisin coordinate count).
  int cg_dim() const;
  // Number of entries P(a,b|x,y) of a full conditional table.
  int full_dim() const { return n_s_ * n_s_ * n_o_ * n_o_; }

  // Collins-Gisin coordinate positions (0-based offsets), 1-based labels with
  // a, b in 1..n_o-1 and x, y in 1..n_s.
  int alice_index(int a, int x) const;
  int bob_index(int b, int y) const;
  int joint_index(int a, int b, int x, int y) const;

  // Human-readable name of coordinate i, e.g. "PA(1|2)" or "PAB(1,1|2,1)".
  std::string coordinate_name(int i) const;

  // "(n_s,n_o)" spelled as "n_s,n_o".
  std::string to_string() const;
  // Accepts "3,4" or "(3,4)"; throws ConfigError on malformed or invalid input.
  static BellScenario parse(std::string_view text);

  friend bool operator==(const BellScenario&, const BellScenario&) = default;

 private:
  int n_s_;
  int n_o_;
};

int cg_dim(const BellScenario& s);

// A point of the nonsignaling subspace in Collins-Gisin coordinates: Alice's
// marginals, then Bob's, then joints in lexicographic (x,y,a,b) order.
struct Correlation {
  BellScenario scenario;
  std::vector<double> coords;

  double alice(int a, int x) const { return coords[scenario.alice_index(a, x)]; }
  double bob(int b, int y) const { return coords[scenario.bob_index(b, y)]; }
  double joint(int a, int b, int x, int y) const {
    return coords[scenario.joint_index(a, b, x, y)];
  }
};

// Full table P(a,b|x,y) with a, b in 1..n_o and x, y in 1..n_s.
class FullDistribution {
 public:
  explicit FullDistribution(BellScenario s);

  const BellScenario& scenario() const { return scenario_; }
  double& at(int a, int b, int x, int y);
  double at(int a, int b, int x, int y) const;
  const std::vector<double>& table() const { return table_; }

  // Largest |sum_{a,b} P(a,b|x,y) - 1| over all (x,y).
  double normalization_residual() const;
  // Largest violation of the nonsignaling equalities.
  double signaling_residual() const;

 private:
  std::size_t offset(int a, int b, int x, int y) const;

  BellScenario scenario_;
  std::vector<double> table_;
};

Correlation white_noise(const BellScenario& s);

// Reconstructs the full table, completing the omitted outcome a = n_o and/or
// b = n_o from normalization and nonsignaling. Negative entries are allowed.
FullDistribution to_full(const Correlation& c);

// Throws SignalingInput when the table violates nonsignaling by more than 1e-9.
Correlation from_full(const FullDistribution& f);

// Euclidean distance between two full tables.
double full_distance(const FullDistribution& p, const FullDistribution& q);

// Distance from a local deterministic vertex to the uniform distribution.
double dist_local_vertex_to_noise(const BellScenario& s);

// Distance from the (2, n_o) nonlocal extreme point family with parameter k to
// the uniform distribution. Requires n_s = 2 and 2 <= k <= n_o.
double dist_ns_vertex_to_noise(const BellScenario& s, int k);

// Nonlocal extreme point P(a,b|x,y) = [(b - a) mod k == x*y] / k with 0-based
// labels, entries vanishing for a or b >= k. Requires n_s = 2.
FullDistribution ns_extreme_point(const BellScenario& s, int k);

// The PR box in CG coordinates (the k = 2 member of the family above).
Correlation pr_box(const BellScenario& s);

// Local deterministic point with Alice answering alice_outcomes[x-1] and Bob
// bob_outcomes[y-1] (1-based outcomes).
Correlation deterministic_point(const BellScenario& s, const std::vector<int>& alice_outcomes,
                                const std::vector<int>& bob_outcomes);

}  // namespace bellvol
