#pragma once

#include <vector>

#include "covmpg/env.hpp"
#include "covmpg/geometry.hpp"

namespace covmpg {

/// Everything needed to score a joint state.
struct Scenario {
  GridDims dims;
  int n_agents = 1;
  FieldOfInterest foi;
  FovHalfAngles phi;

  void validate() const;
};

/// Coverage game quantities for one joint state. All values are exact
/// cell counts.
///
///   r_i     = f_i - sum_{j != i} O_ij
///   J       = sum_i f_i - sum_{i < j} O_ij
///   theta_i = r_i - J
///           = -sum_{j != i} f_j + sum_{j < k, j,k != i} O_jk
///
/// theta_i reads only the other agents' positions, which is what makes J an
/// exact potential: a unilateral move by agent i changes r_i and J by the
/// same amount.
struct CoverageReport {
  int n = 0;
  std::vector<int> f;
  std::vector<int> o;  // n x n row-major, symmetric, diagonal zero
  std::vector<int> r;
  std::vector<int> theta;
  int j = 0;

  [[nodiscard]] int overlap(int a, int b) const { return o[a * n + b]; }
};

CoverageReport evaluate(const JointState& s, const FieldOfInterest& foi,
                        const FovHalfAngles& phi);

/// The potential J, used as the global per-step reward.
int potential(const JointState& s, const FieldOfInterest& foi,
              const FovHalfAngles& phi);

/// The non-common reward term of agent i. Throws std::out_of_range for a bad
/// index.
int theta(const JointState& s, const FieldOfInterest& foi,
          const FovHalfAngles& phi, int i);

/// Agent i's own net coverage r_i.
int agent_reward(const JointState& s, const FieldOfInterest& foi,
                 const FovHalfAngles& phi, int i);

}  // namespace covmpg
