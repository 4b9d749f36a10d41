#include "bellvol/polytope.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "bellvol/conic.hpp"
#include "bellvol/errors.hpp"

namespace bellvol {

bool PolytopeH::strictly_inside(const Eigen::VectorXd& x) const {
  return (slack(x).array() > 0.0).all();
}

PolytopeH ns_polytope(const BellScenario& s) {
  const int ns = s.settings();
  const int no = s.outcomes();
  const int d = s.cg_dim();
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto add = [&](Eigen::VectorXd a, double b) {
    rows.push_back(std::move(a));
    rhs.push_back(b);
  };
  // CG entries themselves are probabilities.
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
    a[i] = -1.0;
    add(a, 0.0);
  }
  // P(n_o|x) and P(n_o|y).
  for (int x = 1; x <= ns; ++x) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
    for (int o = 1; o < no; ++o) a[s.alice_index(o, x)] = 1.0;
    add(a, 1.0);
  }
  for (int y = 1; y <= ns; ++y) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
    for (int o = 1; o < no; ++o) a[s.bob_index(o, y)] = 1.0;
    add(a, 1.0);
  }
  // Joints with at least one omitted outcome.
  for (int x = 1; x <= ns; ++x) {
    for (int y = 1; y <= ns; ++y) {
      for (int a = 1; a < no; ++a) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
        r[s.alice_index(a, x)] = -1.0;
        for (int b = 1; b < no; ++b) r[s.joint_index(a, b, x, y)] = 1.0;
        add(r, 0.0);
      }
      for (int b = 1; b < no; ++b) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
        r[s.bob_index(b, y)] = -1.0;
        for (int a = 1; a < no; ++a) r[s.joint_index(a, b, x, y)] = 1.0;
        add(r, 0.0);
      }
      Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
      for (int a = 1; a < no; ++a) r[s.alice_index(a, x)] = 1.0;
      for (int b = 1; b < no; ++b) r[s.bob_index(b, y)] = 1.0;
      for (int a = 1; a < no; ++a)
        for (int b = 1; b < no; ++b) r[s.joint_index(a, b, x, y)] = -1.0;
      add(r, 1.0);
    }
  }
  PolytopeH p;
  p.dim = d;
  p.a.resize(static_cast<int>(rows.size()), d);
  p.b.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    p.a.row(static_cast<int>(i)) = rows[i].transpose();
    p.b[static_cast<int>(i)] = rhs[i];
  }
  return p;
}

PolytopeH unit_hypercube(int dim) {
  PolytopeH p;
  p.dim = dim;
  p.a = Eigen::MatrixXd::Zero(2 * dim, dim);
  p.b = Eigen::VectorXd::Zero(2 * dim);
  for (int i = 0; i < dim; ++i) {
    p.a(2 * i, i) = -1.0;
    p.a(2 * i + 1, i) = 1.0;
    p.b[2 * i + 1] = 1.0;
  }
  return p;
}

PolytopeH unit_simplex(int dim) {
  PolytopeH p;
  p.dim = dim;
  p.a = Eigen::MatrixXd::Zero(dim + 1, dim);
  p.b = Eigen::VectorXd::Zero(dim + 1);
  for (int i = 0; i < dim; ++i) p.a(i, i) = -1.0;
  p.a.row(dim).setOnes();
  p.b[dim] = 1.0;
  return p;
}

Eigen::VectorXd chebyshev_center(const PolytopeH& p, double* radius) {
  // maximize r  s.t.  b_i - a_i x - r |a_i| >= 0
  conic::ConicProgram prog;
  prog.num_vars = p.dim + 1;
  prog.objective.assign(prog.num_vars, 0.0);
  prog.objective[p.dim] = 1.0;
  for (int i = 0; i < p.rows(); ++i) {
    conic::AffineRow row;
    row.constant = p.b[i];
    for (int j = 0; j < p.dim; ++j) {
      if (p.a(i, j) != 0.0) row.terms.push_back({j, -p.a(i, j)});
    }
    row.terms.push_back({p.dim, -p.a.row(i).norm()});
    prog.nonneg_rows.push_back(std::move(row));
  }
  const conic::SolveReport rep = conic::solve(prog);
  if (rep.status == conic::SolveStatus::Infeasible) throw Infeasible("polytope is empty");
  if (rep.status == conic::SolveStatus::Unbounded) throw DomainError("polytope is unbounded");
  if (rep.status != conic::SolveStatus::Optimal) {
    throw Infeasible("Chebyshev center LP failed: " + conic::to_string(rep.status));
  }
  const double r = rep.y[p.dim];
  if (!(r > 0.0)) throw Infeasible("polytope has empty interior");
  if (radius != nullptr) *radius = r;
  Eigen::VectorXd x(p.dim);
  for (int j = 0; j < p.dim; ++j) x[j] = rep.y[j];
  return x;
}

namespace {

std::pair<double, double> chord(const PolytopeH& p, const Eigen::VectorXd& slack, double xj, int coord) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const auto col = p.a.col(coord);
  for (int i = 0; i < p.rows(); ++i) {
    const double aij = col[i];
    if (aij > 0.0) {
      hi = std::min(hi, xj + slack[i] / aij);
    } else if (aij < 0.0) {
      lo = std::max(lo, xj + slack[i] / aij);
    }
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("polytope is unbounded along a coordinate");
  return {lo, hi};
}

// Moves along one coordinate, keeping the slack vector current.
bool step(const PolytopeH& p, Eigen::VectorXd& x, Eigen::VectorXd& slack, Rng& rng, int coord) {
  const auto [lo, hi] = chord(p, slack, x[coord], coord);
  if (hi - lo < 1e-14) return false;
  const double next = lo + rng.uniform_open() * (hi - lo);
  const double delta = next - x[coord];
  x[coord] = next;
  slack.noalias() -= delta * p.a.col(coord);
  return true;
}

}  // namespace

std::pair<double, double> feasible_interval(const PolytopeH& p, const Eigen::VectorXd& x, int coord) {
  return chord(p, p.slack(x), x[coord], coord);
}

void gibbs_step(const PolytopeH& p, ChainState& st, int coord) {
  if (coord < 0 || coord >= p.dim) throw DomainError("coordinate out of range");
  Eigen::VectorXd slack = p.slack(st.x);
  if (!step(p, st.x, slack, st.rng, coord)) {
    throw DegenerateInterval("feasible chord collapsed along coordinate " + std::to_string(coord));
  }
  ++st.steps_taken;
}

void sample_stream(const PolytopeH& p, std::int64_t n, std::uint64_t seed, const SamplerOptions& opt,
                   const std::function<void(std::int64_t, const Eigen::VectorXd&)>& sink) {
  if (n < 1) throw DomainError("sample count must be positive");
  if (opt.burn_in < 0 || opt.thinning < 1) throw ConfigError("burn_in >= 0 and thinning >= 1 required");
  Eigen::VectorXd x = chebyshev_center(p);
  Rng rng(seed);
  std::vector<int> order(p.dim);
  for (int j = 0; j < p.dim; ++j) order[j] = j;
  auto sweep = [&]() {
    // Recomputing the slack once per sweep keeps rounding drift bounded.
    Eigen::VectorXd slack = p.slack(x);
    rng.shuffle(order);
    for (int j : order) step(p, x, slack, rng, j);
  };
  for (int s = 0; s < opt.burn_in; ++s) sweep();
  for (std::int64_t k = 0; k < n; ++k) {
    for (int s = 0; s < opt.thinning; ++s) sweep();
    sink(k, x);
  }
}

Eigen::MatrixXd sample_uniform(const PolytopeH& p, std::int64_t n, std::uint64_t seed,
                               const SamplerOptions& opt) {
  Eigen::MatrixXd out(n, p.dim);
  sample_stream(p, n, seed, opt, [&](std::int64_t k, const Eigen::VectorXd& x) { out.row(k) = x.transpose(); });
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  return fields;
}

void write_samples_header(std::ostream& os, const BellScenario& s) {
  for (int j = 0; j < s.cg_dim(); ++j) os << (j ? "," : "") << csv_field(s.coordinate_name(j));
  os << '\n';
}

void write_sample_row(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  for (Eigen::Index j = 0; j < x.size(); ++j) os << (j ? "," : "") << format_double(x[j]);
  os << '\n';
}

void write_samples_csv(std::ostream& os, const BellScenario& s, const Eigen::MatrixXd& samples) {
  if (samples.cols() != s.cg_dim()) throw DomainError("sample width does not match the scenario");
  write_samples_header(os, s);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) write_sample_row(os, samples.row(i));
}

Eigen::MatrixXd read_samples_csv(std::istream& is, const BellScenario& s) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("sample file is empty");
  const std::vector<std::string> names = split_csv_line(line);
  bool header_ok = static_cast<int>(names.size()) == s.cg_dim();
  for (int j = 0; header_ok && j < s.cg_dim(); ++j) header_ok = names[j] == s.coordinate_name(j);
  if (!header_ok) throw ConfigError("sample header does not match scenario " + s.to_string());
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    while (ptr < end) {
      double v = 0.0;
      const auto r = std::from_chars(ptr, end, v);
      if (r.ec != std::errc{}) throw ConfigError("malformed number in sample file");
      row.push_back(v);
      ptr = r.ptr;
      if (ptr < end) {
        if (*ptr != ',') throw ConfigError("malformed sample row");
        ++ptr;
      }
    }
    if (static_cast<int>(row.size()) != s.cg_dim()) throw ConfigError("sample row has wrong width");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), s.cg_dim());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < s.cg_dim(); ++j) out(static_cast<Eigen::Index>(i), j) = rows[i][j];
  return out;
}

}  // namespace bellvol
