#pragma once

#include <string>
#include <vector>

namespace bellvol {

// Deliberate faults used to check that the self-test notices them.
enum class Mutation { None, SizeOffByOne, DistanceScale };

// Throws ConfigError on unknown names; "none", "size-off-by-one", "distance-scale".
Mutation parse_mutation(const std::string& name);

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct GoldenSize {
  int settings;
  int outcomes;
  const char* target;  // tag with level
  long long size;
};

// Reference moment-matrix orders, integer and fractional levels.
const std::vector<GoldenSize>& golden_sizes();

// Closed-form orders (and compiled orders for small problems) against golden_sizes().
std::vector<CheckLine> size_self_test(Mutation m = Mutation::None);
// Direct full-table distances against the closed forms for (2,2)..(2,7).
std::vector<CheckLine> distance_self_test(Mutation m = Mutation::None, double tolerance = 1e-12);

}  // namespace bellvol
