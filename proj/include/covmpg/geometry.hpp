#pragma once

#include <vector>

#include "covmpg/env.hpp"

namespace covmpg {

/// Camera half-angles in degrees, one per ground axis.
struct FovHalfAngles {
  double phi_x_deg = 30.0;
  double phi_y_deg = 30.0;

  void validate() const;
  friend bool operator==(const FovHalfAngles&, const FovHalfAngles&) = default;
};

/// Tolerance applied to the footprint inequality so that cells lying exactly
/// on the boundary (e.g. tan 45 deg evaluating to 0.999...) count as covered.
inline constexpr double kFootprintSlack = 1e-9;

/// Integer half-widths of the rectangular ground footprint of an agent:
/// a target q is covered iff |q.x - x| <= reach_x and |q.y - y| <= reach_y.
struct Footprint {
  int cx;
  int cy;
  int reach_x;
  int reach_y;

  [[nodiscard]] bool covers(Cell q) const {
    const int dx = q.x > cx ? q.x - cx : cx - q.x;
    const int dy = q.y > cy ? q.y - cy : cy - q.y;
    return dx <= reach_x && dy <= reach_y;
  }
};

Footprint footprint(const AgentState& agent, const FovHalfAngles& phi);

/// B_i: the FOI targets inside the agent's footprint, sorted.
std::vector<Cell> fov_set(const AgentState& agent, const FieldOfInterest& foi,
                          const FovHalfAngles& phi);

/// f_i = |B_i|.
int coverage_count(const AgentState& agent, const FieldOfInterest& foi,
                   const FovHalfAngles& phi);

/// O_ij = |B_i intersect B_j|.
int overlap_count(const AgentState& agent_i, const AgentState& agent_j,
                  const FieldOfInterest& foi, const FovHalfAngles& phi);

}  // namespace covmpg
