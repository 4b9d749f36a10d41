#include "bellvol/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "bellvol/errors.hpp"
#include "bellvol/polytope.hpp"

namespace bellvol {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKnownKeys = {
    "run.scenario",        "run.samples",    "run.seed",          "run.output_dir", "run.workers",
    "sampler.burn_in",     "sampler.thinning", "membership.targets", "membership.vstar",
    "membership.gate",     "solver.tolerance", "solver.max_iterations",
};

std::string join(const std::vector<TargetSet>& ts) {
  std::string out;
  for (const TargetSet& t : ts) out += (out.empty() ? "" : ",") + t.tag();
  return out;
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(key, '.'));
  if (!node) return fallback;
  const auto value = node->get_value_optional<T>();
  if (!value) throw ConfigError("bad value for " + key + ": '" + node->data() + "'");
  return *value;
}

}  // namespace

RunConfig read_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!kKnownKeys.count(section + "." + key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
  }
  RunConfig c;
  c.scenario = BellScenario::parse(get<std::string>(tree, "run.scenario", c.scenario.to_string()));
  c.n_samples = get<std::int64_t>(tree, "run.samples", c.n_samples);
  c.seed = get<std::uint64_t>(tree, "run.seed", c.seed);
  c.output_dir = get<std::string>(tree, "run.output_dir", c.output_dir);
  c.workers = get<int>(tree, "run.workers", c.workers);
  c.burn_in = get<int>(tree, "sampler.burn_in", c.burn_in);
  c.thinning = get<int>(tree, "sampler.thinning", c.thinning);
  c.targets = parse_targets(get<std::string>(tree, "membership.targets", join(c.targets)));
  const std::string vstar = get<std::string>(tree, "membership.vstar", "");
  if (!vstar.empty()) c.vstar_targets = parse_targets(vstar);
  const std::string gate = get<std::string>(tree, "membership.gate", "");
  if (!gate.empty()) c.mes_gate = TargetSet::parse(gate);
  c.solver_tolerance = get<double>(tree, "solver.tolerance", c.solver_tolerance);
  c.max_iterations = get<int>(tree, "solver.max_iterations", c.max_iterations);

  if (c.n_samples < 1) throw ConfigError("config: run.samples must be positive");
  if (c.burn_in < 0 || c.thinning < 1) throw ConfigError("config: need burn_in >= 0 and thinning >= 1");
  if (c.workers < 0) throw ConfigError("config: run.workers must be >= 0");
  if (!(c.solver_tolerance > 0.0) || c.max_iterations < 1) throw ConfigError("config: bad solver settings");
  if (c.output_dir.empty()) throw ConfigError("config: run.output_dir is empty");
  return c;
}

void write_config(std::ostream& os, const RunConfig& c) {
  os << "[run]\n"
     << "scenario=" << c.scenario.settings() << ',' << c.scenario.outcomes() << '\n'
     << "samples=" << c.n_samples << '\n'
     << "seed=" << c.seed << '\n'
     << "output_dir=" << c.output_dir << '\n'
     << "workers=" << c.workers << "\n\n"
     << "[sampler]\n"
     << "burn_in=" << c.burn_in << '\n'
     << "thinning=" << c.thinning << "\n\n"
     << "[membership]\n"
     << "targets=" << join(c.targets) << '\n'
     << "vstar=" << join(c.vstar_targets) << '\n'
     << "gate=" << (c.mes_gate ? c.mes_gate->tag() : "") << "\n\n"
     << "[solver]\n"
     << "tolerance=" << format_double(c.solver_tolerance) << '\n'
     << "max_iterations=" << c.max_iterations << '\n';
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return read_config(in);
}

int resolve_workers(const RunConfig& c) {
  if (const char* env = std::getenv("BELLVOL_WORKERS"); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096) throw ConfigError(std::string("bad BELLVOL_WORKERS '") + env + "'");
    return static_cast<int>(n);
  }
  if (c.workers > 0) return c.workers;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace bellvol
