#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadent/envs.hpp"
#include "cadent/rng.hpp"

namespace cadent::envs::detail {

struct Cell {
  int r = 0;
  int c = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline nlohmann::json to_json(Cell c) { return nlohmann::json::array({c.r, c.c}); }
Cell cell_from_json(const nlohmann::json& j, const std::string& what);

// Rectangular grid with blocked cells. Moves into walls or off the grid leave
// the agent in place.
class Grid {
 public:
  Grid(int rows, int cols) : rows_(rows), cols_(cols), walls_(static_cast<std::size_t>(rows * cols), false) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool inside(Cell c) const { return c.r >= 0 && c.r < rows_ && c.c >= 0 && c.c < cols_; }
  bool wall(Cell c) const { return walls_[index(c)]; }
  void set_wall(Cell c) { walls_[index(c)] = true; }
  bool open(Cell c) const { return inside(c) && !wall(c); }

  // Gridworld move for actions up/down/left/right (0..3); other actions stay.
  Cell move(Cell from, int action) const;

  // Text map: walls '#', open '.', labelled cells by their glyph.
  std::string render(const std::map<Cell, char>& glyphs) const;

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.r * cols_ + c.c); }
  int rows_;
  int cols_;
  std::vector<bool> walls_;
};

// Cell nearest to the fractional anchor (of rows-1, cols-1), jittered by up to
// `jitter` in each axis, open, inside [lo, hi] bounds and not yet taken.
Cell place(const Grid& grid, double frac_r, double frac_c, int jitter, Rng& rng, std::set<Cell>& taken,
           Cell lo, Cell hi);

// Layout stream for (env, variant, seed); source and target never share one.
Rng layout_rng(EnvName name, Variant variant, std::uint64_t seed);

// Validates that a named position lies on an open cell and is unused.
Cell require_cell(const Grid& grid, const nlohmann::json& params, const std::string& field, std::set<Cell>& taken);

void require_dims(const nlohmann::json& params, int rows, int cols, const std::string& env);

inline const std::vector<std::string>& grid_actions() {
  static const std::vector<std::string> names{"up", "down", "left", "right"};
  return names;
}

}  // namespace cadent::envs::detail
