#include "covmpg/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace covmpg {

void FovHalfAngles::validate() const {
  auto ok = [](double a) { return a > 0.0 && a < 90.0; };
  if (!ok(phi_x_deg) || !ok(phi_y_deg)) {
    throw ConfigError("FOV half-angles must lie in (0, 90) degrees, got (" +
                      std::to_string(phi_x_deg) + ", " +
                      std::to_string(phi_y_deg) + ")");
  }
}

namespace {

int reach(int altitude, double half_angle_deg) {
  const double r =
      altitude * std::tan(half_angle_deg * std::numbers::pi / 180.0);
  return static_cast<int>(std::floor(r + kFootprintSlack));
}

}  // namespace

Footprint footprint(const AgentState& agent, const FovHalfAngles& phi) {
  return {agent.x, agent.y, reach(agent.z, phi.phi_x_deg),
          reach(agent.z, phi.phi_y_deg)};
}

std::vector<Cell> fov_set(const AgentState& agent, const FieldOfInterest& foi,
                          const FovHalfAngles& phi) {
  const Footprint fp = footprint(agent, phi);
  std::vector<Cell> out;
  for (const Cell& q : foi.targets())
    if (fp.covers(q)) out.push_back(q);
  return out;
}

int coverage_count(const AgentState& agent, const FieldOfInterest& foi,
                   const FovHalfAngles& phi) {
  const Footprint fp = footprint(agent, phi);
  int n = 0;
  for (const Cell& q : foi.targets()) n += fp.covers(q);
  return n;
}

int overlap_count(const AgentState& agent_i, const AgentState& agent_j,
                  const FieldOfInterest& foi, const FovHalfAngles& phi) {
  const Footprint a = footprint(agent_i, phi);
  const Footprint b = footprint(agent_j, phi);
  int n = 0;
  for (const Cell& q : foi.targets()) n += a.covers(q) && b.covers(q);
  return n;
}

}  // namespace covmpg
