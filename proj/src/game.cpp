#include "covmpg/game.hpp"

#include <stdexcept>
#include <string>

namespace covmpg {

void Scenario::validate() const {
  dims.validate();
  phi.validate();
  if (n_agents < 1) throw ConfigError("need at least one agent");
  if (foi.empty()) throw ConfigError("field of interest is empty");
  if (foi.nx() != dims.nx || foi.ny() != dims.ny) {
    throw ConfigError("field of interest does not match grid dimensions");
  }
}

CoverageReport evaluate(const JointState& s, const FieldOfInterest& foi,
                        const FovHalfAngles& phi) {
  const int n = static_cast<int>(s.size());
  CoverageReport rep;
  rep.n = n;
  rep.f.assign(n, 0);
  rep.o.assign(static_cast<std::size_t>(n) * n, 0);
  rep.r.assign(n, 0);
  rep.theta.assign(n, 0);

  std::vector<Footprint> fps;
  fps.reserve(n);
  for (const auto& a : s) fps.push_back(footprint(a, phi));

  std::vector<int> hit;
  hit.reserve(n);
  for (const Cell& q : foi.targets()) {
    hit.clear();
    for (int i = 0; i < n; ++i)
      if (fps[i].covers(q)) hit.push_back(i);
    for (std::size_t a = 0; a < hit.size(); ++a) {
      ++rep.f[hit[a]];
      for (std::size_t b = a + 1; b < hit.size(); ++b) {
        ++rep.o[hit[a] * n + hit[b]];
        ++rep.o[hit[b] * n + hit[a]];
      }
    }
  }

  int total_f = 0;
  int total_pairs = 0;
  for (int i = 0; i < n; ++i) {
    total_f += rep.f[i];
    int own_overlap = 0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      own_overlap += rep.overlap(i, k);
      if (k > i) total_pairs += rep.overlap(i, k);
    }
    rep.r[i] = rep.f[i] - own_overlap;
  }
  rep.j = total_f - total_pairs;

  for (int i = 0; i < n; ++i) {
    int others_f = 0;
    int others_pairs = 0;
    for (int a = 0; a < n; ++a) {
      if (a == i) continue;
      others_f += rep.f[a];
      for (int b = a + 1; b < n; ++b)
        if (b != i) others_pairs += rep.overlap(a, b);
    }
    rep.theta[i] = -others_f + others_pairs;
  }
  return rep;
}

int potential(const JointState& s, const FieldOfInterest& foi,
              const FovHalfAngles& phi) {
  return evaluate(s, foi, phi).j;
}

namespace {

void check_index(const JointState& s, int i) {
  if (i < 0 || i >= static_cast<int>(s.size())) {
    throw std::out_of_range("agent index " + std::to_string(i) +
                            " out of range for " + std::to_string(s.size()) +
                            " agents");
  }
}

}  // namespace

int theta(const JointState& s, const FieldOfInterest& foi,
          const FovHalfAngles& phi, int i) {
  check_index(s, i);
  return evaluate(s, foi, phi).theta[i];
}

int agent_reward(const JointState& s, const FieldOfInterest& foi,
                 const FovHalfAngles& phi, int i) {
  check_index(s, i);
  return evaluate(s, foi, phi).r[i];
}

}  // namespace covmpg
