// bellvol command line front end.
//
// Exit codes: 0 success, 1 verify found a failing check, 2 bad configuration or
// input, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "bellvol/config.hpp"
#include "bellvol/conic.hpp"
#include "bellvol/errors.hpp"
#include "bellvol/hierarchy.hpp"
#include "bellvol/membership.hpp"
#include "bellvol/polytope.hpp"
#include "bellvol/rng.hpp"
#include "bellvol/selftest.hpp"
#include "bellvol/volume.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace bellvol;

namespace {

constexpr const char* kVersion = "1.0.0";

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return in;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

fs::path manifest_path(const fs::path& data) {
  fs::path p = data;
  p.replace_extension(".manifest.json");
  return p;
}

std::string tags(const std::vector<TargetSet>& ts) {
  std::string out;
  for (const TargetSet& t : ts) out += (out.empty() ? "" : ",") + t.tag();
  return out;
}

json run_json(const RunConfig& c) {
  return {{"scenario", c.scenario.to_string()},
          {"samples", c.n_samples},
          {"seed", c.seed},
          {"rng", Rng::kName},
          {"burn_in", c.burn_in},
          {"thinning", c.thinning}};
}

MembershipOptions membership_options(const RunConfig& c) {
  MembershipOptions m;
  m.solver.tolerance = c.solver_tolerance;
  m.solver.max_iterations = c.max_iterations;
  m.local.solver = m.solver;
  return m;
}

// Options shared by every subcommand that reads a RunConfig.
struct ConfigFlags {
  std::string config_path;
  std::string scenario;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  int burn_in = 0;
  int thinning = 0;
  std::string targets;
  std::string vstar;
  std::string gate;
  std::string output_dir;
  int workers = 0;
  double tolerance = 0.0;
  int max_iterations = 0;

  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool sampling, bool battery) {
    opts["config"] = app->add_option("-c,--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    opts["scenario"] = app->add_option("-s,--scenario", scenario, "Scenario n_s,n_o, e.g. 2,2");
    opts["output_dir"] = app->add_option("--output-dir", output_dir, "Directory for default output paths");
    if (sampling) {
      opts["samples"] = app->add_option("-n,--samples", samples, "Number of samples")->check(CLI::PositiveNumber);
      opts["seed"] = app->add_option("--seed", seed, "Sampler seed");
      opts["burn_in"] = app->add_option("--burn-in", burn_in, "Burn-in sweeps")->check(CLI::NonNegativeNumber);
      opts["thinning"] = app->add_option("--thinning", thinning, "Sweeps between samples")->check(CLI::PositiveNumber);
    }
    if (battery) {
      opts["targets"] = app->add_option("-t,--targets", targets, "Target list, e.g. L,Q1,Qt1,P1,M1");
      opts["vstar"] = app->add_option("--vstar", vstar, "Targets whose v* is always solved");
      opts["gate"] = app->add_option("--gate", gate, "M targets are tested only inside this target");
      opts["workers"] = app->add_option("-j,--workers", workers, "Worker threads (0 = all cores)")
                            ->check(CLI::NonNegativeNumber);
      opts["tolerance"] = app->add_option("--tolerance", tolerance, "Solver tolerance")->check(CLI::PositiveNumber);
      opts["max_iterations"] =
          app->add_option("--max-iterations", max_iterations, "Solver iteration cap")->check(CLI::PositiveNumber);
    }
  }

  bool set(const std::string& key) const {
    const auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (set("scenario")) c.scenario = BellScenario::parse(scenario);
    if (set("samples")) c.n_samples = samples;
    if (set("seed")) c.seed = seed;
    if (set("burn_in")) c.burn_in = burn_in;
    if (set("thinning")) c.thinning = thinning;
    if (set("targets")) c.targets = parse_targets(targets);
    if (set("vstar")) c.vstar_targets = vstar.empty() ? std::vector<TargetSet>{} : parse_targets(vstar);
    if (set("gate")) c.mes_gate = gate.empty() ? std::nullopt : std::optional<TargetSet>(TargetSet::parse(gate));
    if (set("output_dir")) c.output_dir = output_dir;
    if (set("workers")) c.workers = workers;
    if (set("tolerance")) c.solver_tolerance = tolerance;
    if (set("max_iterations")) c.max_iterations = max_iterations;
    return c;
  }
};

int cmd_sample(const RunConfig& c, std::string out_path) {
  const fs::path path = out_path.empty() ? fs::path(c.output_dir) / "samples.csv" : fs::path(out_path);
  const PolytopeH p = ns_polytope(c.scenario);
  SamplerOptions opt;
  opt.burn_in = c.burn_in;
  opt.thinning = c.thinning;
  {
    auto out = open_out(path);
    write_samples_header(out, c.scenario);
    sample_stream(p, c.n_samples, c.seed, opt,
                  [&](std::int64_t, const Eigen::VectorXd& x) { write_sample_row(out, x.transpose()); });
    if (!out) throw ConfigError("write to " + path.string() + " failed");
  }
  json m = {{"tool", "bellvol"}, {"version", kVersion}, {"command", "sample"}, {"run", run_json(c)}};
  m["output"] = path.filename().string();
  m["cg_dim"] = c.scenario.cg_dim();
  m["constraint_rows"] = p.rows();
  write_json(manifest_path(path), m);
  std::cerr << "wrote " << c.n_samples << " samples to " << path.string() << '\n';
  return 0;
}

int cmd_membership(const RunConfig& c, const std::string& samples_path, std::string out_path, std::int64_t first_id) {
  const fs::path path = out_path.empty() ? fs::path(c.output_dir) / "verdicts.csv" : fs::path(out_path);
  auto in = open_in(samples_path);
  const Eigen::MatrixXd x = read_samples_csv(in, c.scenario);
  if (x.rows() == 0) throw ConfigError("no samples in " + samples_path);

  const MembershipTester tester(c.scenario, c.targets, membership_options(c));
  BatteryOptions bo;
  for (const TargetSet& t : c.targets) {
    bo.need_vstar.push_back(std::find(c.vstar_targets.begin(), c.vstar_targets.end(), t) != c.vstar_targets.end());
  }
  bo.mes_gate = c.mes_gate;
  const int workers = resolve_workers(c);
  std::cerr << "testing " << x.rows() << " samples against " << tags(c.targets) << " with " << workers
            << " workers\n";
  const auto verdicts = run_batteries(tester, x, bo, workers, first_id);
  {
    auto out = open_out(path);
    write_verdicts_csv(out, verdicts);
  }

  json per_target = json::object();
  bool qa = true;
  for (std::size_t i = 0; i < c.targets.size(); ++i) {
    std::int64_t solved = 0, derived = 0, not_tested = 0, failed = 0, inside = 0;
    for (std::size_t k = i; k < verdicts.size(); k += c.targets.size()) {
      const MembershipVerdict& v = verdicts[k];
      solved += v.solved();
      derived += v.status == VerdictStatus::DerivedByInclusion;
      not_tested += v.status == VerdictStatus::NotTested;
      failed += v.failed();
      inside += v.inside;
    }
    const double rate = static_cast<double>(failed) / static_cast<double>(std::max<std::int64_t>(1, solved + derived + failed));
    qa = qa && rate <= 1e-3;
    per_target[c.targets[i].tag()] = {{"solved", solved},     {"derived", derived}, {"not_tested", not_tested},
                                      {"failed", failed},     {"inside", inside},   {"failure_rate", rate}};
  }
  json m = {{"tool", "bellvol"}, {"version", kVersion}, {"command", "membership"}};
  m["scenario"] = c.scenario.to_string();
  m["samples_file"] = fs::path(samples_path).filename().string();
  m["samples"] = x.rows();
  m["first_sample_id"] = first_id;
  m["targets"] = tags(c.targets);
  m["vstar"] = tags(c.vstar_targets);
  m["gate"] = c.mes_gate ? c.mes_gate->tag() : "";
  m["visibility_cap"] = kVisibilityCap;
  m["membership_tolerance"] = kMembershipTolerance;
  m["solver_tolerance"] = c.solver_tolerance;
  m["max_iterations"] = c.max_iterations;
  m["per_target"] = per_target;
  m["qa_pass"] = qa;
  write_json(manifest_path(path), m);
  std::cerr << "wrote " << verdicts.size() << " verdicts to " << path.string() << (qa ? "" : " (QA: failure rate above 0.1%)")
            << '\n';
  return 0;
}

int cmd_report(const RunConfig& c, const std::vector<std::string>& inputs, std::string out_dir, int per_decade,
               bool strict) {
  const fs::path dir = out_dir.empty() ? fs::path(c.output_dir) : fs::path(out_dir);
  std::vector<MembershipVerdict> all;
  for (const std::string& p : inputs) {
    auto in = open_in(p);
    auto v = read_verdicts_csv(in);
    all.insert(all.end(), v.begin(), v.end());
  }
  if (all.empty()) throw ConfigError("no verdicts to report");
  const VerdictTable table(all);

  std::vector<RVEstimate> estimates;
  for (std::size_t t = 0; t < table.targets().size(); ++t) {
    try {
      estimates.push_back(estimate_rv(table.column(t)));
    } catch (const DomainError& e) {
      std::cerr << "skipping " << table.targets()[t].tag() << ": " << e.what() << '\n';
    }
  }
  if (estimates.empty()) throw ConfigError("no target has decided verdicts");
  {
    auto out = open_out(dir / "rv_table.csv");
    write_rv_table(out, c.scenario, estimates);
  }

  const TargetSet local{};
  const auto q_star = select_q_star(estimates);
  std::vector<NonlocalFraction> fractions;
  std::vector<VisibilityStats> stats;
  if (table.find(local)) {
    for (const TargetSet& t : table.targets()) {
      if (t == local) continue;
      try {
        fractions.push_back(nonlocal_fraction(table, t, local));
      } catch (const DomainError&) {
      }
    }
    if (q_star) {
      const PopulationFilter pop{{estimates[*q_star].target}, {local}};
      for (const TargetSet& ref : table.targets()) {
        try {
          stats.push_back(visibility_stats(table, pop, ref));
        } catch (const DomainError&) {
        }
      }
    }
  }
  {
    auto out = open_out(dir / "nonlocal_fractions.csv");
    write_nonlocal_fractions(out, c.scenario, fractions);
  }
  {
    auto out = open_out(dir / "visibility_stats.csv");
    write_visibility_stats(out, c.scenario, stats);
  }
  {
    auto out = open_out(dir / "convergence.csv");
    out << kConvergenceHeader << '\n';
    for (std::size_t t = 0; t < table.targets().size(); ++t) {
      write_convergence(out, c.scenario, table.targets()[t], convergence_series(table.column(t), per_decade));
    }
  }

  bool qa = true;
  json rv = json::object();
  for (const RVEstimate& e : estimates) {
    qa = qa && e.failure_rate() <= 1e-3;
    rv[e.target.tag()] = {{"n_total", e.n_total}, {"n_inside", e.n_inside},         {"n_failed", e.n_failed},
                          {"rv", e.rv},           {"wilson_low", e.wilson_low},     {"wilson_high", e.wilson_high},
                          {"failure_rate", e.failure_rate()}};
  }
  json m = {{"tool", "bellvol"}, {"version", kVersion}, {"command", "rv"}};
  m["scenario"] = c.scenario.to_string();
  json files = json::array();
  for (const std::string& p : inputs) files.push_back(fs::path(p).filename().string());
  m["verdict_files"] = files;
  m["samples"] = table.sample_ids().size();
  m["confidence"] = 0.99;
  m["wilson_z"] = kZ99;
  m["membership_tolerance"] = kMembershipTolerance;
  m["q_star"] = q_star ? estimates[*q_star].target.tag() : "";
  m["estimates"] = rv;
  m["qa_pass"] = qa;
  write_json(dir / "manifest.json", m);

  for (const RVEstimate& e : estimates) {
    std::printf("%-6s RV %.4f%%  99%% CI [%.4f%%, %.4f%%]  n=%lld failed=%lld\n", e.target.tag().c_str(), 100 * e.rv,
                100 * e.wilson_low, 100 * e.wilson_high, static_cast<long long>(e.n_total),
                static_cast<long long>(e.n_failed));
  }
  if (strict && !qa) {
    std::cerr << "QA failed: solver failure rate above 0.1%\n";
    return 3;
  }
  return 0;
}

int cmd_verify(const std::string& mutation, bool quiet) {
  const Mutation m = parse_mutation(mutation);
  int failed = 0, total = 0;
  for (const auto& lines : {size_self_test(m), distance_self_test(m)}) {
    for (const CheckLine& l : lines) {
      ++total;
      failed += l.pass ? 0 : 1;
      if (!quiet || !l.pass) std::printf("%s %s (%s)\n", l.pass ? "PASS" : "FAIL", l.name.c_str(), l.detail.c_str());
    }
  }
  std::printf("%d/%d checks passed\n", total - failed, total);
  return failed == 0 ? 0 : 1;
}

Correlation pick_point(const BellScenario& s, const std::string& point, const std::string& samples_path,
                       std::int64_t row) {
  if (!samples_path.empty()) {
    auto in = open_in(samples_path);
    const Eigen::MatrixXd x = read_samples_csv(in, s);
    if (row < 0 || row >= x.rows()) throw ConfigError("row " + std::to_string(row) + " out of range");
    Correlation c{s, std::vector<double>(s.cg_dim())};
    for (int i = 0; i < s.cg_dim(); ++i) c.coords[i] = x(row, i);
    return c;
  }
  if (point == "noise") return white_noise(s);
  if (point == "pr") return pr_box(s);
  if (point == "vertex") return deterministic_point(s, std::vector<int>(s.settings(), 1), std::vector<int>(s.settings(), 1));
  throw ConfigError("unknown point '" + point + "' (noise, pr, vertex)");
}

int cmd_export(const RunConfig& c, const std::string& target, const std::string& format, const std::string& point,
               const std::string& samples_path, std::int64_t row, const std::string& out_path) {
  const TargetSet t = TargetSet::parse(target);
  if (t.kind == TargetKind::Local) throw ConfigError("export-sdp needs a relaxation target, not L");
  const MembershipTester tester(c.scenario, {t}, membership_options(c));
  const MomentProblem& mp = *tester.moment_problem(0);
  std::ostringstream os;
  if (format == "moments") {
    write_moment_problem(os, mp);
  } else if (format == "conic") {
    conic::write_program(os, visibility_program(mp, pick_point(c.scenario, point, samples_path, row)));
  } else {
    throw ConfigError("unknown format '" + format + "' (conic, moments)");
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << os.str();
  } else {
    auto out = open_out(out_path);
    out << os.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bellvol: relative volumes of subsets of the bipartite nonsignaling polytope"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ConfigFlags sample_flags, member_flags, report_flags, export_flags;

  auto* sample = app.add_subcommand("sample", "Draw uniform samples from the nonsignaling polytope");
  sample_flags.add(sample, true, false);
  std::string sample_out;
  sample->add_option("-o,--output", sample_out, "Sample CSV (default <output-dir>/samples.csv)");

  auto* member = app.add_subcommand("membership", "Run membership batteries on a sample file");
  member_flags.add(member, false, true);
  std::string member_in, member_out;
  std::int64_t first_id = 0;
  member->add_option("-i,--input", member_in, "Sample CSV")->required()->check(CLI::ExistingFile);
  member->add_option("-o,--output", member_out, "Verdict CSV (default <output-dir>/verdicts.csv)");
  member->add_option("--first-id", first_id, "Sample id of the first row (for sharded runs)");

  auto* report = app.add_subcommand("rv", "Relative volumes and statistics from verdict files");
  report_flags.add(report, false, false);
  std::vector<std::string> report_in;
  std::string report_out;
  int per_decade = 10;
  bool strict = false;
  report->add_option("-i,--input", report_in, "Verdict CSV files (shards are merged)")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("-o,--output", report_out, "Report directory (default <output-dir>)");
  report->add_option("--points-per-decade", per_decade, "Convergence series density")->check(CLI::PositiveNumber);
  report->add_flag("--strict", strict, "Exit 3 when a solver failure rate exceeds 0.1%");

  auto* verify = app.add_subcommand("verify", "Self-test of moment matrix sizes and extreme point distances");
  std::string mutation = "none";
  bool quiet = false;
  verify->add_option("--mutate", mutation, "Inject a fault: none, size-off-by-one, distance-scale");
  verify->add_flag("-q,--quiet", quiet, "Print failing checks only");

  auto* exp = app.add_subcommand("export-sdp", "Dump a moment problem or visibility program");
  export_flags.add(exp, false, false);
  std::string exp_target, exp_format = "conic", exp_point = "pr", exp_samples, exp_out;
  std::int64_t exp_row = 0;
  exp->add_option("-t,--target", exp_target, "Relaxation target, e.g. Q1 or P1.25")->required();
  exp->add_option("-f,--format", exp_format, "conic (visibility program) or moments (compiled relaxation)");
  exp->add_option("--point", exp_point, "Correlation: pr, noise or vertex");
  exp->add_option("--samples", exp_samples, "Take the correlation from this sample CSV")->check(CLI::ExistingFile);
  exp->add_option("--row", exp_row, "Row of --samples");
  exp->add_option("-o,--output", exp_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sample) return cmd_sample(sample_flags.resolve(), sample_out);
    if (*member) return cmd_membership(member_flags.resolve(), member_in, member_out, first_id);
    if (*report) return cmd_report(report_flags.resolve(), report_in, report_out, per_decade, strict);
    if (*verify) return cmd_verify(mutation, quiet);
    if (*exp) return cmd_export(export_flags.resolve(), exp_target, exp_format, exp_point, exp_samples, exp_row, exp_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SignalingInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedLevel& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const TooManyVertices& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
