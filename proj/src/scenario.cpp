#include "bellvol/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "bellvol/errors.hpp"

namespace bellvol {

BellScenario::BellScenario(int settings, int outcomes) : n_s_(settings), n_o_(outcomes) {
  if (settings < 1) throw ConfigError("scenario needs n_s >= 1, got " + std::to_string(settings));
  if (outcomes < 2) throw ConfigError("scenario needs n_o >= 2, got " + std::to_string(outcomes));
}

int BellScenario::cg_dim() const {
  const int m = n_o_ - 1;
  return m * m * n_s_ * n_s_ + 2 * n_s_ * m;
}

int BellScenario::alice_index(int a, int x) const { return (x - 1) * (n_o_ - 1) + (a - 1); }

int BellScenario::bob_index(int b, int y) const {
  return n_s_ * (n_o_ - 1) + (y - 1) * (n_o_ - 1) + (b - 1);
}

int BellScenario::joint_index(int a, int b, int x, int y) const {
  const int m = n_o_ - 1;
  return 2 * n_s_ * m + (((x - 1) * n_s_ + (y - 1)) * m + (a - 1)) * m + (b - 1);
}

std::string BellScenario::coordinate_name(int i) const {
  const int m = n_o_ - 1;
  std::ostringstream os;
  if (i < n_s_ * m) {
    os << "PA(" << i % m + 1 << '|' << i / m + 1 << ')';
  } else if (i < 2 * n_s_ * m) {
    const int j = i - n_s_ * m;
    os << "PB(" << j % m + 1 << '|' << j / m + 1 << ')';
  } else {
    int j = i - 2 * n_s_ * m;
    const int b = j % m + 1;
    j /= m;
    const int a = j % m + 1;
    j /= m;
    const int y = j % n_s_ + 1;
    const int x = j / n_s_ + 1;
    os << "PAB(" << a << ',' << b << '|' << x << ',' << y << ')';
  }
  return os.str();
}

std::string BellScenario::to_string() const {
  return std::to_string(n_s_) + "," + std::to_string(n_o_);
}

BellScenario BellScenario::parse(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (ch != '(' && ch != ')' && ch != ' ') s.push_back(ch);
  }
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("scenario must be spelled n_s,n_o: '" + std::string(text) + "'");
  int ns = 0;
  int no = 0;
  const auto r1 = std::from_chars(s.data(), s.data() + comma, ns);
  const auto r2 = std::from_chars(s.data() + comma + 1, s.data() + s.size(), no);
  if (r1.ec != std::errc{} || r1.ptr != s.data() + comma || r2.ec != std::errc{} ||
      r2.ptr != s.data() + s.size()) {
    throw ConfigError("scenario must be spelled n_s,n_o: '" + std::string(text) + "'");
  }
  return BellScenario(ns, no);
}

int cg_dim(const BellScenario& s) { return s.cg_dim(); }

FullDistribution::FullDistribution(BellScenario s)
    : scenario_(s), table_(static_cast<std::size_t>(s.full_dim()), 0.0) {}

std::size_t FullDistribution::offset(int a, int b, int x, int y) const {
  const int ns = scenario_.settings();
  const int no = scenario_.outcomes();
  return static_cast<std::size_t>((((x - 1) * ns + (y - 1)) * no + (a - 1)) * no + (b - 1));
}

double& FullDistribution::at(int a, int b, int x, int y) { return table_[offset(a, b, x, y)]; }
double FullDistribution::at(int a, int b, int x, int y) const { return table_[offset(a, b, x, y)]; }

double FullDistribution::normalization_residual() const {
  const int ns = scenario_.settings();
  const int no = scenario_.outcomes();
  double worst = 0.0;
  for (int x = 1; x <= ns; ++x) {
    for (int y = 1; y <= ns; ++y) {
      double sum = 0.0;
      for (int a = 1; a <= no; ++a) {
        for (int b = 1; b <= no; ++b) sum += at(a, b, x, y);
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  return worst;
}

double FullDistribution::signaling_residual() const {
  const int ns = scenario_.settings();
  const int no = scenario_.outcomes();
  double worst = 0.0;
  // Alice's marginal must not depend on y.
  for (int x = 1; x <= ns; ++x) {
    for (int a = 1; a <= no; ++a) {
      double ref = 0.0;
      for (int b = 1; b <= no; ++b) ref += at(a, b, x, 1);
      for (int y = 2; y <= ns; ++y) {
        double m = 0.0;
        for (int b = 1; b <= no; ++b) m += at(a, b, x, y);
        worst = std::max(worst, std::abs(m - ref));
      }
    }
  }
  for (int y = 1; y <= ns; ++y) {
    for (int b = 1; b <= no; ++b) {
      double ref = 0.0;
      for (int a = 1; a <= no; ++a) ref += at(a, b, 1, y);
      for (int x = 2; x <= ns; ++x) {
        double m = 0.0;
        for (int a = 1; a <= no; ++a) m += at(a, b, x, y);
        worst = std::max(worst, std::abs(m - ref));
      }
    }
  }
  return worst;
}

Correlation white_noise(const BellScenario& s) {
  Correlation c{s, std::vector<double>(static_cast<std::size_t>(s.cg_dim()))};
  const double no = s.outcomes();
  const int marginals = 2 * s.settings() * (s.outcomes() - 1);
  for (int i = 0; i < s.cg_dim(); ++i) c.coords[i] = i < marginals ? 1.0 / no : 1.0 / (no * no);
  return c;
}

FullDistribution to_full(const Correlation& c) {
  const BellScenario& s = c.scenario;
  const int ns = s.settings();
  const int no = s.outcomes();
  FullDistribution f(s);
  for (int x = 1; x <= ns; ++x) {
    for (int y = 1; y <= ns; ++y) {
      double sum_pa = 0.0;
      double sum_pb = 0.0;
      double sum_j = 0.0;
      for (int a = 1; a < no; ++a) sum_pa += c.alice(a, x);
      for (int b = 1; b < no; ++b) sum_pb += c.bob(b, y);
      for (int a = 1; a < no; ++a) {
        double row = 0.0;
        for (int b = 1; b < no; ++b) {
          const double p = c.joint(a, b, x, y);
          f.at(a, b, x, y) = p;
          row += p;
        }
        f.at(a, no, x, y) = c.alice(a, x) - row;
        sum_j += row;
      }
      for (int b = 1; b < no; ++b) {
        double col = 0.0;
        for (int a = 1; a < no; ++a) col += c.joint(a, b, x, y);
        f.at(no, b, x, y) = c.bob(b, y) - col;
      }
      f.at(no, no, x, y) = 1.0 - sum_pa - sum_pb + sum_j;
    }
  }
  return f;
}

Correlation from_full(const FullDistribution& f) {
  const double residual = f.signaling_residual();
  if (residual > 1e-9) {
    throw SignalingInput("table violates nonsignaling by " + std::to_string(residual));
  }
  const BellScenario& s = f.scenario();
  const int ns = s.settings();
  const int no = s.outcomes();
  Correlation c{s, std::vector<double>(static_cast<std::size_t>(s.cg_dim()))};
  // Marginals are averaged over the other party's setting; for a nonsignaling
  // table every term is identical.
  for (int x = 1; x <= ns; ++x) {
    for (int a = 1; a < no; ++a) {
      double m = 0.0;
      for (int y = 1; y <= ns; ++y) {
        for (int b = 1; b <= no; ++b) m += f.at(a, b, x, y);
      }
      c.coords[s.alice_index(a, x)] = m / ns;
    }
  }
  for (int y = 1; y <= ns; ++y) {
    for (int b = 1; b < no; ++b) {
      double m = 0.0;
      for (int x = 1; x <= ns; ++x) {
        for (int a = 1; a <= no; ++a) m += f.at(a, b, x, y);
      }
      c.coords[s.bob_index(b, y)] = m / ns;
    }
  }
  for (int x = 1; x <= ns; ++x) {
    for (int y = 1; y <= ns; ++y) {
      for (int a = 1; a < no; ++a) {
        for (int b = 1; b < no; ++b) c.coords[s.joint_index(a, b, x, y)] = f.at(a, b, x, y);
      }
    }
  }
  return c;
}

double full_distance(const FullDistribution& p, const FullDistribution& q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.table().size(); ++i) {
    const double d = p.table()[i] - q.table()[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double dist_local_vertex_to_noise(const BellScenario& s) {
  const double no = s.outcomes();
  return s.settings() * std::sqrt(1.0 - 1.0 / (no * no));
}

double dist_ns_vertex_to_noise(const BellScenario& s, int k) {
  if (s.settings() != 2) throw DomainError("nonlocal vertex distance is defined for n_s = 2 only");
  if (k < 2 || k > s.outcomes()) {
    throw DomainError("k must lie in 2..n_o, got " + std::to_string(k));
  }
  const double no = s.outcomes();
  return 2.0 * std::sqrt(1.0 / k - 1.0 / (no * no));
}

FullDistribution ns_extreme_point(const BellScenario& s, int k) {
  if (s.settings() != 2) throw DomainError("nonlocal extreme points are built for n_s = 2 only");
  if (k < 2 || k > s.outcomes()) throw DomainError("k must lie in 2..n_o");
  FullDistribution f(s);
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          if (((b - a) % k + k) % k == x * y) f.at(a + 1, b + 1, x + 1, y + 1) = 1.0 / k;
        }
      }
    }
  }
  return f;
}

Correlation pr_box(const BellScenario& s) { return from_full(ns_extreme_point(s, 2)); }

Correlation deterministic_point(const BellScenario& s, const std::vector<int>& alice_outcomes,
                                const std::vector<int>& bob_outcomes) {
  const int ns = s.settings();
  const int no = s.outcomes();
  if (static_cast<int>(alice_outcomes.size()) != ns || static_cast<int>(bob_outcomes.size()) != ns) {
    throw DomainError("deterministic strategy needs one outcome per setting");
  }
  Correlation c{s, std::vector<double>(static_cast<std::size_t>(s.cg_dim()), 0.0)};
  for (int x = 1; x <= ns; ++x) {
    const int a = alice_outcomes[x - 1];
    if (a < 1 || a > no) throw DomainError("outcome out of range");
    if (a < no) c.coords[s.alice_index(a, x)] = 1.0;
  }
  for (int y = 1; y <= ns; ++y) {
    const int b = bob_outcomes[y - 1];
    if (b < 1 || b > no) throw DomainError("outcome out of range");
    if (b < no) c.coords[s.bob_index(b, y)] = 1.0;
  }
  for (int x = 1; x <= ns; ++x) {
    for (int y = 1; y <= ns; ++y) {
      const int a = alice_outcomes[x - 1];
      const int b = bob_outcomes[y - 1];
      if (a < no && b < no) c.coords[s.joint_index(a, b, x, y)] = 1.0;
    }
  }
  return c;
}

}  // namespace bellvol
