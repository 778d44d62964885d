#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace covmpg {

using Rng = std::mt19937_64;

/// Thrown for any invalid run/scenario parameter.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Derives an independent stream seed from a master seed (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct GridDims {
  int nx = 1;
  int ny = 1;
  int nz = 1;

  void validate() const;
  /// Number of valid agent cells (altitude levels are 1..nz).
  [[nodiscard]] long long cell_count() const {
    return static_cast<long long>(nx) * ny * nz;
  }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// Integer cell position of one agent. Altitude ranges over 1..nz.
struct AgentState {
  int x = 0;
  int y = 0;
  int z = 1;

  [[nodiscard]] bool valid_for(const GridDims& dims) const {
    return x >= 0 && x < dims.nx && y >= 0 && y < dims.ny && z >= 1 &&
           z <= dims.nz;
  }
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

enum class Action : std::uint8_t { North = 0, South, West, East, Up, Down };

inline constexpr int kActionCount = 6;
inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::North, Action::South, Action::West,
    Action::East,  Action::Up,    Action::Down};

struct Displacement {
  int dx;
  int dy;
  int dz;
};

Displacement displacement(Action a);
const char* action_name(Action a);

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Static ground targets. Kept sorted by (x, y) and duplicate-free.
class FieldOfInterest {
public:
  FieldOfInterest() = default;
  /// Sorts and validates; throws ConfigError on duplicates or out-of-range
  /// cells. An empty target list is accepted here so geometry can be
  /// exercised on it; generate_foi never produces one.
  FieldOfInterest(int nx, int ny, std::vector<Cell> targets);

  /// Every ground cell of the grid.
  static FieldOfInterest full(const GridDims& dims);

  [[nodiscard]] const std::vector<Cell>& targets() const { return targets_; }
  [[nodiscard]] std::size_t size() const { return targets_.size(); }
  [[nodiscard]] bool empty() const { return targets_.empty(); }
  [[nodiscard]] bool contains(Cell c) const;
  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }

  friend bool operator==(const FieldOfInterest&,
                         const FieldOfInterest&) = default;

private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<Cell> targets_;
};

using JointState = std::vector<AgentState>;
using JointAction = std::vector<Action>;

bool valid_joint_state(const JointState& s, const GridDims& dims);

/// Seeded connected blob of `target_count` ground cells, grown from a random
/// start cell by repeatedly adding a uniformly chosen 4-neighbour frontier
/// cell.
FieldOfInterest generate_foi(const GridDims& dims, int target_count,
                             std::uint64_t rng_seed);

/// Kinematic transition s' = s + a, clamped per axis to the valid box.
AgentState step_agent(const AgentState& s, Action a, const GridDims& dims);
JointState step(const JointState& s, const JointAction& a,
                const GridDims& dims);

/// Uniform random joint state over valid cells.
JointState reset(const GridDims& dims, int n_agents, Rng& rng);
JointState reset(const GridDims& dims, int n_agents, std::uint64_t rng_seed);

std::string to_string(const JointState& s);

}  // namespace covmpg
