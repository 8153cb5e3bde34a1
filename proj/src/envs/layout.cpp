#include <cmath>
#include <cstdlib>

#include "envs/grid.hpp"

namespace cadent::envs::detail {

Cell cell_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw EnvError("layout parameter '" + what + "' must be a [row, col] pair");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

Cell Grid::move(Cell from, int action) const {
  Cell to = from;
  switch (action) {
    case 0: --to.r; break;
    case 1: ++to.r; break;
    case 2: --to.c; break;
    case 3: ++to.c; break;
    default: return from;
  }
  return open(to) ? to : from;
}

std::string Grid::render(const std::map<Cell, char>& glyphs) const {
  std::string out;
  out.reserve(static_cast<std::size_t>((cols_ + 1) * rows_));
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      Cell cell{r, c};
      auto it = glyphs.find(cell);
      out += it != glyphs.end() ? it->second : (wall(cell) ? '#' : '.');
    }
    out += '\n';
  }
  return out;
}

Cell place(const Grid& grid, double frac_r, double frac_c, int jitter, Rng& rng, std::set<Cell>& taken, Cell lo,
           Cell hi) {
  const int span = 2 * jitter + 1;
  Cell anchor{static_cast<int>(std::lround(frac_r * (grid.rows() - 1))),
              static_cast<int>(std::lround(frac_c * (grid.cols() - 1)))};
  anchor.r += static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) - jitter;
  anchor.c += static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) - jitter;

  auto usable = [&](Cell c) {
    return c.r >= lo.r && c.r <= hi.r && c.c >= lo.c && c.c <= hi.c && grid.open(c) && !taken.contains(c);
  };
  const int reach = grid.rows() + grid.cols();
  for (int radius = 0; radius <= reach; ++radius) {
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        if (std::abs(dr) + std::abs(dc) != radius) continue;
        Cell c{anchor.r + dr, anchor.c + dc};
        if (usable(c)) {
          taken.insert(c);
          return c;
        }
      }
    }
  }
  throw EnvError("layout generation: no free cell near anchor");
}

Rng layout_rng(EnvName name, Variant variant, std::uint64_t seed) {
  const auto stream = static_cast<std::uint64_t>(name) * 2 + static_cast<std::uint64_t>(variant);
  return Rng::derive(seed, 0x1A70u + stream);
}

Cell require_cell(const Grid& grid, const nlohmann::json& params, const std::string& field, std::set<Cell>& taken) {
  if (!params.contains(field)) throw EnvError("layout is missing position '" + field + "'");
  Cell c = cell_from_json(params.at(field), field);
  if (!grid.inside(c)) {
    throw EnvError("position '" + field + "' (" + std::to_string(c.r) + ", " + std::to_string(c.c) +
                   ") lies outside the grid");
  }
  if (grid.wall(c)) throw EnvError("position '" + field + "' lies on a wall");
  if (!taken.insert(c).second) throw EnvError("position '" + field + "' collides with another position");
  return c;
}

void require_dims(const nlohmann::json& params, int rows, int cols, const std::string& env) {
  if (params.value("rows", -1) != rows || params.value("cols", -1) != cols) {
    throw EnvError(env + ": grid must be " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace cadent::envs::detail
