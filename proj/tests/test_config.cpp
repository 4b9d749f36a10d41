#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "bellvol/config.hpp"
#include "bellvol/errors.hpp"

using namespace bellvol;

TEST(Config, RoundTrip) {
  RunConfig c;
  c.scenario = BellScenario(3, 2);
  c.n_samples = 5000;
  c.seed = 18446744073709551615ull;
  c.burn_in = 250;
  c.thinning = 3;
  c.targets = parse_targets("L,Q1,Qt1.25,M1");
  c.vstar_targets = parse_targets("L");
  c.mes_gate = TargetSet::parse("Qt1.25");
  c.output_dir = "runs/a b";
  c.workers = 3;
  c.solver_tolerance = 1e-9;
  std::stringstream ss;
  write_config(ss, c);
  const std::string first = ss.str();
  const RunConfig back = read_config(ss);
  EXPECT_EQ(back, c);
  std::ostringstream again;
  write_config(again, back);
  EXPECT_EQ(again.str(), first);
}

TEST(Config, DefaultsAndPartialFiles) {
  std::istringstream in("[run]\nscenario=2,3\n");
  const RunConfig c = read_config(in);
  EXPECT_EQ(c.scenario, BellScenario(2, 3));
  EXPECT_EQ(c.burn_in, 1000);
  EXPECT_EQ(c.thinning, 5);
  EXPECT_FALSE(c.mes_gate.has_value());
  std::istringstream empty("");
  EXPECT_EQ(read_config(empty), RunConfig{});
}

TEST(Config, Rejections) {
  for (const char* text : {"[run]\nscenario=2,1\n", "[run]\nsamples=0\n", "[run]\nsamples=ten\n",
                           "[run]\ncolour=blue\n", "[membership]\ntargets=L,Z3\n", "[sampler]\nthinning=0\n",
                           "[run\n", "stray=1\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_config(in), ConfigError) << text;
  }
  EXPECT_THROW(load_config("/nonexistent/bellvol.ini"), ConfigError);
}

TEST(Config, WorkersEnvironmentOverride) {
  RunConfig c;
  c.workers = 2;
  unsetenv("BELLVOL_WORKERS");
  EXPECT_EQ(resolve_workers(c), 2);
  setenv("BELLVOL_WORKERS", "5", 1);
  EXPECT_EQ(resolve_workers(c), 5);
  setenv("BELLVOL_WORKERS", "x", 1);
  EXPECT_THROW(resolve_workers(c), ConfigError);
  unsetenv("BELLVOL_WORKERS");
  c.workers = 0;
  EXPECT_GE(resolve_workers(c), 1);
}
