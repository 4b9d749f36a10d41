#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bellvol/scenario.hpp"
#include "bellvol/visibility.hpp"

namespace bellvol {

// Local deterministic strategies of a scenario. Vertex k encodes Alice's
// response function in its low base-n_o digits (setting 1 least significant)
// and Bob's in the high digits.
class VertexTable {
 public:
  static constexpr std::int64_t kDefaultCap = 2'000'000;
  // Above this many stored reals the table stays implicit.
  static constexpr std::int64_t kDenseLimit = 20'000'000;

  VertexTable(const BellScenario& s, std::int64_t cap = kDefaultCap);

  const BellScenario& scenario() const { return scenario_; }
  std::int64_t size() const { return count_; }
  std::int64_t strategies_per_party() const { return per_party_; }

  // 1-based outcomes per setting.
  void decode(std::int64_t k, std::vector<int>& alice, std::vector<int>& bob) const;
  std::int64_t encode(const std::vector<int>& alice, const std::vector<int>& bob) const;
  // CG coordinates of vertex k (entries are 0 or 1).
  Eigen::VectorXd vertex(std::int64_t k) const;
  // Positions of the unit entries of vertex k.
  std::vector<int> support(std::int64_t k) const;

  bool dense() const { return dense_.size() > 0; }
  // count x cg_dim matrix; only available when dense().
  const Eigen::MatrixXd& matrix() const { return dense_; }

 private:
  BellScenario scenario_;
  std::int64_t per_party_ = 0;
  std::int64_t count_ = 0;
  Eigen::MatrixXd dense_;
};

// Throws TooManyVertices when n_o^(2 n_s) exceeds cap.
VertexTable enumerate_vertices(const BellScenario& s, std::int64_t cap = VertexTable::kDefaultCap);

struct LocalOptions {
  // Tables larger than this are handled by column generation.
  std::int64_t direct_limit = 10'000;
  std::int64_t initial_columns = 10'000;
  int max_rounds = 60;
  // Columns added per pricing round.
  int columns_per_round = 200;
  std::uint64_t seed = 0x5eed;
  conic::SolverOptions solver;
};

struct LocalSolution {
  VisibilityResult result;
  // Nonzero mixture weights of the optimal local decomposition.
  std::vector<std::pair<std::int64_t, double>> weights;
  int pricing_rounds = 0;
};

// Largest v <= kVisibilityCap with v c + (1 - v) white noise local.
LocalSolution solve_local_visibility(const Correlation& c, const VertexTable& vt,
                                     const LocalOptions& opt = {});

VisibilityResult visibility_to_L(const Correlation& c, const VertexTable& vt,
                                 const LocalOptions& opt = {});

}  // namespace bellvol
