#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bellvol/rng.hpp"
#include "bellvol/scenario.hpp"

namespace bellvol {

// Polytope {x : a x <= b}.
struct PolytopeH {
  int dim = 0;
  Eigen::MatrixXd a;  // rows x dim
  Eigen::VectorXd b;

  int rows() const { return static_cast<int>(b.size()); }
  Eigen::VectorXd slack(const Eigen::VectorXd& x) const { return b - a * x; }
  bool strictly_inside(const Eigen::VectorXd& x) const;
};

// Nonsignaling polytope in CG coordinates: one row per full-table probability
// being nonnegative. Row order: CG entries, omitted-outcome marginals, then
// omitted-outcome joints.
PolytopeH ns_polytope(const BellScenario& s);

// [0,1]^dim and {x >= 0, sum x <= 1}.
PolytopeH unit_hypercube(int dim);
PolytopeH unit_simplex(int dim);

// Center of the largest inscribed ball. Throws Infeasible when the polytope is
// empty or has no interior.
Eigen::VectorXd chebyshev_center(const PolytopeH& p, double* radius = nullptr);

struct ChainState {
  Eigen::VectorXd x;
  Rng rng;
  std::uint64_t steps_taken = 0;

  ChainState(Eigen::VectorXd start, std::uint64_t seed) : x(std::move(start)), rng(seed) {}
};

// Exact feasible chord [lo, hi] through x along coordinate `coord`.
std::pair<double, double> feasible_interval(const PolytopeH& p, const Eigen::VectorXd& x, int coord);

// Resamples x[coord] uniformly on its feasible chord. Throws DegenerateInterval
// when the chord is shorter than 1e-14 (state unchanged).
void gibbs_step(const PolytopeH& p, ChainState& st, int coord);

struct SamplerOptions {
  int burn_in = 1000;  // sweeps
  int thinning = 5;    // sweeps between recorded points
};

// Streams n points of a coordinate-Gibbs chain started at the Chebyshev
// center. Each sweep visits every coordinate once in a fresh random order.
void sample_stream(const PolytopeH& p, std::int64_t n, std::uint64_t seed, const SamplerOptions& opt,
                   const std::function<void(std::int64_t, const Eigen::VectorXd&)>& sink);

// n x dim matrix of samples.
Eigen::MatrixXd sample_uniform(const PolytopeH& p, std::int64_t n, std::uint64_t seed,
                               const SamplerOptions& opt = {});

// CSV with a header of CG coordinate names and shortest round-trip decimals.
// Streaming pieces of write_samples_csv.
void write_samples_header(std::ostream& os, const BellScenario& s);
void write_sample_row(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& x);
void write_samples_csv(std::ostream& os, const BellScenario& s, const Eigen::MatrixXd& samples);
Eigen::MatrixXd read_samples_csv(std::istream& is, const BellScenario& s);

// RFC 4180 quoting of one field, and the inverse split of one line.
std::string csv_field(const std::string& text);
std::vector<std::string> split_csv_line(const std::string& line);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace bellvol
