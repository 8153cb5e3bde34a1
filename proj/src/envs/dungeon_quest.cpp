// Dungeon Quest: four rooms joined by doorways around a central cross of
// walls. Items must be collected in quest order; the dragon yields only once
// both sword and shield are held.

#include <array>

#include "envs/grid.hpp"
#include "envs/registry.hpp"

namespace cadent::envs::detail {

namespace {

constexpr std::array<const char*, 5> kItems{"key", "chest", "sword", "shield", "dragon"};

struct Rooms {
  int wall_row;
  int wall_col;
  std::array<int, 2> door_rows;  // gaps in the vertical wall
  std::array<int, 2> door_cols;  // gaps in the horizontal wall
};

Rooms rooms_for(int rows, int cols) {
  return {rows / 2, cols / 2, {(rows - 1) / 4, 3 * (rows - 1) / 4 + 1}, {(cols - 1) / 4, 3 * (cols - 1) / 4 + 1}};
}

Grid build_grid(int rows, int cols) {
  Grid grid(rows, cols);
  const Rooms rm = rooms_for(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (r != rm.door_rows[0] && r != rm.door_rows[1]) grid.set_wall({r, rm.wall_col});
  }
  for (int c = 0; c < cols; ++c) {
    if (c != rm.door_cols[0] && c != rm.door_cols[1]) grid.set_wall({rm.wall_row, c});
  }
  return grid;
}

class DungeonQuest final : public Environment {
 public:
  DungeonQuest(EnvSpec spec, automaton::Dfa dfa) : Environment(std::move(spec), std::move(dfa)), grid_(1, 1) {
    const auto& p = spec_.parameters;
    const int rows = spec_.variant == Variant::target ? 20 : 12;
    require_dims(p, rows, rows, "dungeon_quest");
    grid_ = build_grid(rows, rows);
    std::set<Cell> taken;
    start_ = require_cell(grid_, p, "start", taken);
    for (std::size_t i = 0; i < kItems.size(); ++i) {
      items_[i] = require_cell(grid_, p, kItems[i], taken);
      symbols_[i] = dfa_.symbol_id(kItems[i]);
    }
  }

  int num_actions() const override { return 4; }
  std::vector<std::string> action_names() const override { return grid_actions(); }
  std::vector<std::string> variable_names() const override {
    return {"row", "col", "has_key", "chest_open", "has_sword", "has_shield"};
  }

  std::string dump_layout() const override {
    std::map<Cell, char> glyphs{{start_, 'S'}, {items_[0], 'K'}, {items_[1], 'C'},
                                {items_[2], 'W'}, {items_[3], 'H'}, {items_[4], 'D'}};
    return "dungeon_quest (" + to_string(spec_.variant) + ")  S=start K=key C=chest W=sword H=shield D=dragon\n" +
           grid_.render(glyphs);
  }

 protected:
  EnvState initial_state() const override {
    EnvState s;
    s.vars[0] = start_.r;
    s.vars[1] = start_.c;
    return s;
  }

  Physics physics(const EnvState& s, Action a) const override {
    Physics ph;
    ph.next = s;
    const Cell pos = grid_.move({s.vars[0], s.vars[1]}, a);
    ph.next.vars[0] = pos.r;
    ph.next.vars[1] = pos.c;
    // Stage = number of quest items already obtained (flags are set in order).
    std::size_t stage = 0;
    while (stage < 4 && s.vars[2 + stage] == 1) ++stage;
    if (pos == items_[stage]) {
      ph.event = symbols_[stage];
      if (stage < 4) ph.next.vars[2 + stage] = 1;
    }
    return ph;
  }

  std::vector<int> domains() const override { return {grid_.rows(), grid_.cols(), 2, 2, 2, 2}; }

 private:
  Grid grid_;
  Cell start_;
  std::array<Cell, 5> items_{};
  std::array<Symbol, 5> symbols_{};
};

}  // namespace

nlohmann::json generate_dungeon_quest(Variant variant, std::uint64_t seed) {
  const int n = variant == Variant::target ? 20 : 12;
  Grid grid = build_grid(n, n);
  const Rooms rm = rooms_for(n, n);
  Rng rng = layout_rng(EnvName::dungeon_quest, variant, seed);
  std::set<Cell> taken;

  const Cell tl_lo{0, 0}, tl_hi{rm.wall_row - 1, rm.wall_col - 1};
  const Cell tr_lo{0, rm.wall_col + 1}, tr_hi{rm.wall_row - 1, n - 1};
  const Cell bl_lo{rm.wall_row + 1, 0}, bl_hi{n - 1, rm.wall_col - 1};
  const Cell br_lo{rm.wall_row + 1, rm.wall_col + 1}, br_hi{n - 1, n - 1};

  nlohmann::json p;
  p["rows"] = n;
  p["cols"] = n;
  p["start"] = to_json(place(grid, 0.05, 0.05, 0, rng, taken, tl_lo, tl_hi));
  p["key"] = to_json(place(grid, 0.15, 0.8, 1, rng, taken, tr_lo, tr_hi));
  p["chest"] = to_json(place(grid, 0.85, 0.85, 1, rng, taken, br_lo, br_hi));
  p["sword"] = to_json(place(grid, 0.8, 0.2, 1, rng, taken, bl_lo, bl_hi));
  p["shield"] = to_json(place(grid, 0.3, 0.3, 1, rng, taken, tl_lo, tl_hi));
  p["dragon"] = to_json(place(grid, 0.1, 0.95, 1, rng, taken, tr_lo, tr_hi));
  return p;
}

std::unique_ptr<Environment> build_dungeon_quest(const EnvSpec& spec) {
  return std::make_unique<DungeonQuest>(spec, bundled_dfa(EnvName::dungeon_quest));
}

}  // namespace cadent::envs::detail
