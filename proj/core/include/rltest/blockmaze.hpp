#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "rltest/cycle.hpp"  // for Vec
#include "rltest/rng.hpp"

namespace rltest {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Grid world with blocking walls, one goal, and invisible bug cells.
struct MazeSpec {
  int width = 20;
  int height = 20;
  Cell start{0, 0};
  Cell goal{19, 19};
  std::vector<std::uint8_t> walls;  // row-major, 1 = wall
  std::vector<Cell> bugs;           // distinct walkable cells, never the start or goal
  int step_cap = 500;
  double step_reward = -1.0;
  double goal_reward = 100.0;

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
  }
  int cell_index(Cell c) const { return c.row * width + c.col; }
  bool wall_at(Cell c) const { return walls[static_cast<std::size_t>(cell_index(c))] != 0; }
};

// Checks the structural rules: start/goal in bounds and not walls, bugs
// walkable / distinct / excluding start and goal, goal reachable from start
// through non-wall cells (4-connectivity). Throws std::invalid_argument.
void validate_maze(const MazeSpec& spec);

// True when `to` can be reached from `from` through non-wall cells.
bool maze_reachable(const MazeSpec& spec, Cell from, Cell to);

// Random maze: walls sampled i.i.d. at wall_density over non-start cells,
// goal drawn uniformly from the remaining free cells, walls cleared along a
// shortest grid path when the goal starts out unreachable, bug cells drawn
// uniformly from walkable cells excluding start and goal.
MazeSpec generate_maze(int width, int height, double wall_density, int bug_count, Rng& rng);

// Plain-text grid: '#' wall, '.' free, 'S' start, 'G' goal, 'B' bug cell,
// one row per line.
std::string serialize_maze(const MazeSpec& spec);
MazeSpec parse_maze(const std::string& text);

// Actions, counter-clockwise from "up".
enum MazeAction : int { maze_north = 0, maze_south = 1, maze_east = 2, maze_west = 3 };
inline constexpr int kMazeActionCount = 4;

enum class MazeObservation { coordinates, one_hot };
MazeObservation maze_observation_from_string(const std::string& s);

// Observation encoding for one position: normalized [row, col] pair, or a
// one-hot vector over all cells.
Vec encode_observation(Cell position, const MazeSpec& spec, MazeObservation mode);
int observation_size(const MazeSpec& spec, MazeObservation mode);

struct MazeStep {
  Vec observation;
  double reward = 0.0;
  bool done = false;
  bool bug_triggered = false;  // first visit to a bug cell this episode
};

// Episode-scoped environment. Moving into a wall or off the grid leaves the
// position unchanged; every step costs step_reward except reaching the goal,
// which yields goal_reward and ends the episode; episodes also end at
// step_cap. Stepping into a bug cell is recorded without changing reward or
// termination.
class BlockMazeEnv {
 public:
  BlockMazeEnv(MazeSpec spec, MazeObservation mode);

  Vec reset();
  MazeStep step(int action);  // throws std::logic_error("episode finished") once done

  const MazeSpec& spec() const { return spec_; }
  Cell position() const { return position_; }
  int steps_taken() const { return steps_; }
  bool done() const { return done_; }
  int observation_size() const { return obs_size_; }
  const std::unordered_set<int>& bugs_found() const { return bugs_found_; }

 private:
  MazeSpec spec_;
  MazeObservation mode_;
  int obs_size_;
  std::unordered_set<int> bug_cells_;
  Cell position_;
  int steps_ = 0;
  bool done_ = false;
  bool started_ = false;
  std::unordered_set<int> bugs_found_;
};

// Union of visited cells and triggered bug cells across a whole run
// (many episodes of one repetition).
class CoverageTracker {
 public:
  void visit(int cell_index) { visited_.insert(cell_index); }
  void trigger_bug(int cell_index) { bugs_.insert(cell_index); }
  int state_coverage() const { return static_cast<int>(visited_.size()); }
  int bugs_found() const { return static_cast<int>(bugs_.size()); }

 private:
  std::unordered_set<int> visited_;
  std::unordered_set<int> bugs_;
};

}  // namespace rltest
