#include "rltest/blockmaze.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "rltest/errors.hpp"

namespace rltest {

namespace {

constexpr int kRowDelta[kMazeActionCount] = {-1, 1, 0, 0};
constexpr int kColDelta[kMazeActionCount] = {0, 0, 1, -1};

// BFS parents over the grid; when respect_walls is false every in-bounds
// cell is traversable (used to carve a repair path).
std::vector<int> bfs_parents(const MazeSpec& spec, Cell from, bool respect_walls) {
  std::vector<int> parent(static_cast<std::size_t>(spec.width) * spec.height, -1);
  std::queue<Cell> frontier;
  parent[static_cast<std::size_t>(spec.cell_index(from))] = spec.cell_index(from);
  frontier.push(from);
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    for (int a = 0; a < kMazeActionCount; ++a) {
      const Cell n{c.row + kRowDelta[a], c.col + kColDelta[a]};
      if (!spec.in_bounds(n)) continue;
      if (respect_walls && spec.wall_at(n)) continue;
      auto& p = parent[static_cast<std::size_t>(spec.cell_index(n))];
      if (p != -1) continue;
      p = spec.cell_index(c);
      frontier.push(n);
    }
  }
  return parent;
}

}  // namespace

bool maze_reachable(const MazeSpec& spec, Cell from, Cell to) {
  if (!spec.in_bounds(from) || !spec.in_bounds(to)) return false;
  if (spec.wall_at(from) || spec.wall_at(to)) return false;
  const auto parent = bfs_parents(spec, from, true);
  return parent[static_cast<std::size_t>(spec.cell_index(to))] != -1;
}

void validate_maze(const MazeSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0)
    throw std::invalid_argument("maze dimensions must be positive");
  if (spec.walls.size() != static_cast<std::size_t>(spec.width) * spec.height)
    throw std::invalid_argument("wall grid size does not match dimensions");
  if (!spec.in_bounds(spec.start) || !spec.in_bounds(spec.goal))
    throw std::invalid_argument("start and goal must be inside the maze");
  if (spec.wall_at(spec.start)) throw std::invalid_argument("start cell is a wall");
  if (spec.wall_at(spec.goal)) throw std::invalid_argument("goal cell is a wall");
  if (spec.step_cap <= 0) throw std::invalid_argument("step cap must be positive");
  std::unordered_set<int> seen;
  for (const Cell& b : spec.bugs) {
    if (!spec.in_bounds(b)) throw std::invalid_argument("bug cell out of bounds");
    if (spec.wall_at(b)) throw std::invalid_argument("bug cell is a wall");
    if (b == spec.start) throw std::invalid_argument("bug cell coincides with the start");
    if (b == spec.goal) throw std::invalid_argument("bug cell coincides with the goal");
    if (!seen.insert(spec.cell_index(b)).second)
      throw std::invalid_argument("duplicate bug cell");
  }
  if (!maze_reachable(spec, spec.start, spec.goal))
    throw std::invalid_argument("goal unreachable from start");
}

MazeSpec generate_maze(int width, int height, double wall_density, int bug_count, Rng& rng) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("maze dimensions must be positive");
  if (wall_density < 0.0 || wall_density > 0.4)
    throw std::invalid_argument("wall density must lie in [0, 0.4]");
  if (bug_count < 0) throw std::invalid_argument("bug count must be non-negative");

  MazeSpec spec;
  spec.width = width;
  spec.height = height;
  spec.start = Cell{0, 0};
  spec.walls.assign(static_cast<std::size_t>(width) * height, 0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Cell cell{r, c};
      if (cell == spec.start) continue;
      if (rng.uniform() < wall_density) spec.walls[spec.cell_index(cell)] = 1;
    }
  }

  std::vector<Cell> free_cells;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const Cell cell{r, c};
      if (cell != spec.start && !spec.wall_at(cell)) free_cells.push_back(cell);
    }
  if (free_cells.empty()) throw std::invalid_argument("no free cell available for the goal");
  spec.goal = free_cells[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(free_cells.size())))];

  if (!maze_reachable(spec, spec.start, spec.goal)) {
    // Carve a shortest grid path (ignoring walls) from start to goal.
    const auto parent = bfs_parents(spec, spec.start, false);
    int at = spec.cell_index(spec.goal);
    const int origin = spec.cell_index(spec.start);
    while (at != origin) {
      spec.walls[static_cast<std::size_t>(at)] = 0;
      at = parent[static_cast<std::size_t>(at)];
    }
  }

  std::vector<Cell> bug_candidates;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const Cell cell{r, c};
      if (cell != spec.start && cell != spec.goal && !spec.wall_at(cell))
        bug_candidates.push_back(cell);
    }
  if (static_cast<int>(bug_candidates.size()) < bug_count)
    throw std::invalid_argument("not enough walkable cells for the requested bug count");
  // Partial Fisher-Yates draw of bug_count distinct cells.
  for (int i = 0; i < bug_count; ++i) {
    const int j = i + rng.uniform_int(static_cast<int>(bug_candidates.size()) - i);
    std::swap(bug_candidates[i], bug_candidates[j]);
    spec.bugs.push_back(bug_candidates[i]);
  }

  validate_maze(spec);
  return spec;
}

std::string serialize_maze(const MazeSpec& spec) {
  validate_maze(spec);
  std::unordered_set<int> bug_cells;
  for (const Cell& b : spec.bugs) bug_cells.insert(spec.cell_index(b));
  std::string out;
  out.reserve(static_cast<std::size_t>(spec.height) * (spec.width + 1));
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      const Cell cell{r, c};
      char ch = '.';
      if (cell == spec.start)
        ch = 'S';
      else if (cell == spec.goal)
        ch = 'G';
      else if (spec.wall_at(cell))
        ch = '#';
      else if (bug_cells.count(spec.cell_index(cell)))
        ch = 'B';
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

MazeSpec parse_maze(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw DataError("maze text is empty");
  MazeSpec spec;
  spec.height = static_cast<int>(rows.size());
  spec.width = static_cast<int>(rows.front().size());
  spec.walls.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
  bool saw_start = false, saw_goal = false;
  for (int r = 0; r < spec.height; ++r) {
    if (static_cast<int>(rows[r].size()) != spec.width)
      throw DataError("maze rows have inconsistent widths");
    for (int c = 0; c < spec.width; ++c) {
      const Cell cell{r, c};
      switch (rows[r][c]) {
        case '.': break;
        case '#': spec.walls[spec.cell_index(cell)] = 1; break;
        case 'S':
          if (saw_start) throw DataError("maze has more than one start");
          spec.start = cell;
          saw_start = true;
          break;
        case 'G':
          if (saw_goal) throw DataError("maze has more than one goal");
          spec.goal = cell;
          saw_goal = true;
          break;
        case 'B': spec.bugs.push_back(cell); break;
        default:
          throw DataError(std::string("unexpected maze character '") + rows[r][c] + "'");
      }
    }
  }
  if (!saw_start || !saw_goal) throw DataError("maze needs exactly one start and one goal");
  validate_maze(spec);
  return spec;
}

MazeObservation maze_observation_from_string(const std::string& s) {
  if (s == "coordinates") return MazeObservation::coordinates;
  if (s == "one_hot") return MazeObservation::one_hot;
  throw ConfigError("unknown observation encoding: " + s);
}

int observation_size(const MazeSpec& spec, MazeObservation mode) {
  return mode == MazeObservation::coordinates ? 2 : spec.width * spec.height;
}

Vec encode_observation(Cell position, const MazeSpec& spec, MazeObservation mode) {
  if (!spec.in_bounds(position)) throw std::invalid_argument("position out of bounds");
  if (mode == MazeObservation::coordinates) {
    // Degenerate dimensions (1 row or column) map to 0.
    return {spec.height > 1 ? static_cast<double>(position.row) / (spec.height - 1) : 0.0,
            spec.width > 1 ? static_cast<double>(position.col) / (spec.width - 1) : 0.0};
  }
  Vec out(static_cast<std::size_t>(spec.width) * spec.height, 0.0);
  out[static_cast<std::size_t>(spec.cell_index(position))] = 1.0;
  return out;
}

BlockMazeEnv::BlockMazeEnv(MazeSpec spec, MazeObservation mode)
    : spec_(std::move(spec)), mode_(mode), obs_size_(rltest::observation_size(spec_, mode)) {
  validate_maze(spec_);
  for (const Cell& b : spec_.bugs) bug_cells_.insert(spec_.cell_index(b));
  position_ = spec_.start;
}

Vec BlockMazeEnv::reset() {
  position_ = spec_.start;
  steps_ = 0;
  done_ = false;
  started_ = true;
  bugs_found_.clear();
  return encode_observation(position_, spec_, mode_);
}

MazeStep BlockMazeEnv::step(int action) {
  if (!started_) throw std::logic_error("reset the environment before stepping");
  if (done_) throw std::logic_error("episode finished");
  if (action < 0 || action >= kMazeActionCount)
    throw std::invalid_argument("action out of range");

  const Cell next{position_.row + kRowDelta[action], position_.col + kColDelta[action]};
  if (spec_.in_bounds(next) && !spec_.wall_at(next)) position_ = next;
  ++steps_;

  MazeStep out;
  const bool at_goal = position_ == spec_.goal;
  out.reward = at_goal ? spec_.goal_reward : spec_.step_reward;
  if (bug_cells_.count(spec_.cell_index(position_)) &&
      !bugs_found_.count(spec_.cell_index(position_))) {
    bugs_found_.insert(spec_.cell_index(position_));
    out.bug_triggered = true;
  }
  done_ = at_goal || steps_ >= spec_.step_cap;
  out.done = done_;
  out.observation = encode_observation(position_, spec_, mode_);
  return out;
}

}  // namespace rltest
