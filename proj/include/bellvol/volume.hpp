#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bellvol/membership.hpp"

namespace bellvol {

// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ99);

struct RVEstimate {
  TargetSet target;
  std::int64_t n_total = 0;  // decided verdicts
  std::int64_t n_inside = 0;
  std::int64_t n_failed = 0;
  std::int64_t n_not_tested = 0;
  double rv = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 1.0;

  double failure_rate() const;
};

// All verdicts must share one target. Throws DomainError when nothing was decided.
RVEstimate estimate_rv(const std::vector<MembershipVerdict>& verdicts, double z = kZ99);

// Verdicts grouped per sample, samples sorted by id.
class VerdictTable {
 public:
  // Throws DomainError on a repeated (sample, target) pair.
  explicit VerdictTable(const std::vector<MembershipVerdict>& verdicts);

  const std::vector<TargetSet>& targets() const { return targets_; }
  const std::vector<std::int64_t>& sample_ids() const { return ids_; }
  std::optional<std::size_t> find(const TargetSet& t) const;
  // Verdict of sample row k for target column t; null when absent.
  const MembershipVerdict* at(std::size_t k, std::size_t t) const;
  // Column in sample-id order, absent entries skipped.
  std::vector<MembershipVerdict> column(std::size_t t) const;

 private:
  std::vector<TargetSet> targets_;
  std::vector<std::int64_t> ids_;
  std::vector<std::optional<MembershipVerdict>> cells_;
};

struct NonlocalFraction {
  TargetSet target;
  std::int64_t n_nonlocal = 0;      // decided outside L and decided for T
  std::int64_t n_target_only = 0;   // of those, inside T
  double f = 0.0;
};

// (rv_T - rv_L) / (1 - rv_L); throws DomainError when rv_L == 1.
double nonlocal_fraction(const RVEstimate& rv_t, const RVEstimate& rv_l);
// Same quantity counted sample by sample on the samples decided for both sets.
NonlocalFraction nonlocal_fraction(const VerdictTable& table, const TargetSet& t, const TargetSet& local);

struct VisibilityStats {
  std::string population;
  TargetSet reference;
  std::int64_t count = 0;
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double sigma = 0.0;  // population standard deviation
  double within_one_sigma = 0.0;
};

// Throws DomainError on an empty population.
VisibilityStats visibility_stats(const std::vector<double>& values);

// Samples inside every `inside` target and outside every `outside` target,
// measured by their solved v* to `reference`.
struct PopulationFilter {
  std::vector<TargetSet> inside;
  std::vector<TargetSet> outside;

  std::string label() const;
};

VisibilityStats visibility_stats(const VerdictTable& table, const PopulationFilter& pop, const TargetSet& reference);

struct ConvergencePoint {
  std::int64_t n = 0;
  double rv = 0.0;
};

// Prefix estimates at log-spaced counts of decided verdicts, last point = all.
std::vector<ConvergencePoint> convergence_series(const std::vector<MembershipVerdict>& ordered,
                                                 int points_per_decade = 10);

// p^(binom(n_s', n_s)^2)
double naive_subcorrelation_bound(double p, int n_s, int n_s_prime);

// Index of the smallest-RV target among the Q and Qt estimates.
std::optional<std::size_t> select_q_star(const std::vector<RVEstimate>& estimates);

// Report CSVs.
void write_rv_table(std::ostream& os, const BellScenario& s, const std::vector<RVEstimate>& estimates);
void write_nonlocal_fractions(std::ostream& os, const BellScenario& s, const std::vector<NonlocalFraction>& rows);
void write_visibility_stats(std::ostream& os, const BellScenario& s, const std::vector<VisibilityStats>& rows);
inline constexpr const char* kConvergenceHeader = "scenario,target,n,rv_n,rv_n_minus_total";
// Rows only; a file starts with kConvergenceHeader.
void write_convergence(std::ostream& os, const BellScenario& s, const TargetSet& t,
                       const std::vector<ConvergencePoint>& series);

}  // namespace bellvol
