#include "covmpg/env.hpp"

#include <algorithm>
#include <sstream>

namespace covmpg {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void GridDims::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw ConfigError("grid dimensions must all be >= 1, got (" +
                      std::to_string(nx) + "," + std::to_string(ny) + "," +
                      std::to_string(nz) + ")");
  }
}

Displacement displacement(Action a) {
  switch (a) {
    case Action::North: return {0, 1, 0};
    case Action::South: return {0, -1, 0};
    case Action::West: return {-1, 0, 0};
    case Action::East: return {1, 0, 0};
    case Action::Up: return {0, 0, 1};
    case Action::Down: return {0, 0, -1};
  }
  return {0, 0, 0};
}

const char* action_name(Action a) {
  switch (a) {
    case Action::North: return "north";
    case Action::South: return "south";
    case Action::West: return "west";
    case Action::East: return "east";
    case Action::Up: return "up";
    case Action::Down: return "down";
  }
  return "?";
}

FieldOfInterest::FieldOfInterest(int nx, int ny, std::vector<Cell> targets)
    : nx_(nx), ny_(ny), targets_(std::move(targets)) {
  std::sort(targets_.begin(), targets_.end());
  if (std::adjacent_find(targets_.begin(), targets_.end()) != targets_.end()) {
    throw ConfigError("field of interest contains duplicate targets");
  }
  for (const Cell& c : targets_) {
    if (c.x < 0 || c.x >= nx || c.y < 0 || c.y >= ny) {
      throw ConfigError("target (" + std::to_string(c.x) + "," +
                        std::to_string(c.y) + ") outside the ground plane");
    }
  }
}

FieldOfInterest FieldOfInterest::full(const GridDims& dims) {
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(dims.nx) * dims.ny);
  for (int x = 0; x < dims.nx; ++x)
    for (int y = 0; y < dims.ny; ++y) cells.push_back({x, y});
  return FieldOfInterest(dims.nx, dims.ny, std::move(cells));
}

bool FieldOfInterest::contains(Cell c) const {
  return std::binary_search(targets_.begin(), targets_.end(), c);
}

bool valid_joint_state(const JointState& s, const GridDims& dims) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [&](const AgentState& a) {
    return a.valid_for(dims);
  });
}

FieldOfInterest generate_foi(const GridDims& dims, int target_count,
                             std::uint64_t rng_seed) {
  dims.validate();
  const int plane = dims.nx * dims.ny;
  if (target_count < 1 || target_count > plane) {
    throw ConfigError("target count must be in [1, " + std::to_string(plane) +
                      "], got " + std::to_string(target_count));
  }
  Rng rng(rng_seed);
  auto index = [&](int x, int y) { return x * dims.ny + y; };
  std::vector<char> in_blob(plane, 0);
  std::vector<char> in_frontier(plane, 0);
  std::vector<Cell> blob;
  std::vector<Cell> frontier;

  auto add = [&](Cell c) {
    in_blob[index(c.x, c.y)] = 1;
    blob.push_back(c);
    constexpr int kOffsets[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& o : kOffsets) {
      const Cell n{c.x + o[0], c.y + o[1]};
      if (n.x < 0 || n.x >= dims.nx || n.y < 0 || n.y >= dims.ny) continue;
      const int k = index(n.x, n.y);
      if (in_blob[k] || in_frontier[k]) continue;
      in_frontier[k] = 1;
      frontier.push_back(n);
    }
  };

  std::uniform_int_distribution<int> start(0, plane - 1);
  const int s = start(rng);
  add({s / dims.ny, s % dims.ny});
  while (static_cast<int>(blob.size()) < target_count) {
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const std::size_t k = pick(rng);
    const Cell c = frontier[k];
    frontier[k] = frontier.back();
    frontier.pop_back();
    in_frontier[index(c.x, c.y)] = 0;
    add(c);
  }
  return FieldOfInterest(dims.nx, dims.ny, std::move(blob));
}

AgentState step_agent(const AgentState& s, Action a, const GridDims& dims) {
  const Displacement d = displacement(a);
  return {std::clamp(s.x + d.dx, 0, dims.nx - 1),
          std::clamp(s.y + d.dy, 0, dims.ny - 1),
          std::clamp(s.z + d.dz, 1, dims.nz)};
}

JointState step(const JointState& s, const JointAction& a,
                const GridDims& dims) {
  if (s.size() != a.size()) {
    throw std::invalid_argument("joint state and joint action sizes differ");
  }
  JointState next(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    next[i] = step_agent(s[i], a[i], dims);
  return next;
}

JointState reset(const GridDims& dims, int n_agents, Rng& rng) {
  dims.validate();
  if (n_agents < 1) throw ConfigError("need at least one agent");
  std::uniform_int_distribution<int> px(0, dims.nx - 1);
  std::uniform_int_distribution<int> py(0, dims.ny - 1);
  std::uniform_int_distribution<int> pz(1, dims.nz);
  JointState s(n_agents);
  for (auto& a : s) {
    a.x = px(rng);
    a.y = py(rng);
    a.z = pz(rng);
  }
  return s;
}

JointState reset(const GridDims& dims, int n_agents, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return reset(dims, n_agents, rng);
}

std::string to_string(const JointState& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ' ';
    os << '(' << s[i].x << ',' << s[i].y << ',' << s[i].z << ')';
  }
  os << ']';
  return os.str();
}

}  // namespace covmpg
