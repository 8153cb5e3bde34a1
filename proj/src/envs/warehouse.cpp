// Warehouse Robotics: a mobile robot works through scanner pickup, inventory
// scan, scanner return at the charging station, item pickup and delivery.
// Each stage is completed with `interact` at the station. The battery drops
// one bucket every 10 steps away from the charger and the episode ends when it
// runs flat; standing on the charger refills it.

#include <array>

#include "envs/grid.hpp"
#include "envs/registry.hpp"

namespace cadent::envs::detail {

namespace {

constexpr int kBatteryFull = 4;
constexpr int kTicksPerBucket = 10;
constexpr Action kInteract = 4;
constexpr std::array<const char*, 5> kStations{"scanner", "scan", "charging_station", "item", "deliver"};

// Storage racks: a block of shelving in the middle of the floor.
void add_racks(Grid& grid) {
  const int rows = grid.rows();
  const int cols = grid.cols();
  for (int r = rows / 2 - 1; r <= rows / 2; ++r) {
    for (int c = cols / 4 + 1; c <= (3 * cols) / 4 - 2; ++c) grid.set_wall({r, c});
  }
}

class Warehouse final : public Environment {
 public:
  Warehouse(EnvSpec spec, automaton::Dfa dfa) : Environment(std::move(spec), std::move(dfa)), grid_(1, 1) {
    const auto& p = spec_.parameters;
    const bool target = spec_.variant == Variant::target;
    require_dims(p, target ? 10 : 6, target ? 12 : 8, "warehouse_robotics");
    grid_ = Grid(p.at("rows").get<int>(), p.at("cols").get<int>());
    add_racks(grid_);
    std::set<Cell> taken;
    start_ = require_cell(grid_, p, "start", taken);
    for (std::size_t i = 0; i < kStations.size(); ++i) {
      stations_[i] = require_cell(grid_, p, kStations[i], taken);
      symbols_[i] = dfa_.symbol_id(kStations[i]);
    }
  }

  int num_actions() const override { return 5; }
  std::vector<std::string> action_names() const override {
    auto names = grid_actions();
    names.push_back("interact");
    return names;
  }
  std::vector<std::string> variable_names() const override {
    return {"row", "col", "has_scanner", "scanned", "scanner_returned", "has_item", "battery", "battery_ticks"};
  }

  std::string dump_layout() const override {
    std::map<Cell, char> glyphs{{start_, 'R'}};
    for (std::size_t i = 0; i < kStations.size(); ++i) glyphs[stations_[i]] = "NSCID"[i];
    return "warehouse_robotics (" + to_string(spec_.variant) +
           ")  R=robot N=scanner S=scan C=charging_station I=item D=deliver #=racks\n" + grid_.render(glyphs);
  }

 protected:
  EnvState initial_state() const override {
    EnvState s;
    s.vars[0] = start_.r;
    s.vars[1] = start_.c;
    s.vars[6] = kBatteryFull;
    return s;
  }

  Physics physics(const EnvState& s, Action a) const override {
    Physics ph;
    ph.next = s;
    const Cell here{s.vars[0], s.vars[1]};
    if (a == kInteract) {
      const auto stage = static_cast<std::size_t>(stage_of(s));
      if (stage < kStations.size() && here == stations_[stage]) {
        ph.event = symbols_[stage];
        apply_stage(ph.next, stage);
      }
    }
    const Cell pos = grid_.move(here, a);
    ph.next.vars[0] = pos.r;
    ph.next.vars[1] = pos.c;

    if (pos == stations_[2]) {
      ph.next.vars[6] = kBatteryFull;
      ph.next.vars[7] = 0;
    } else if (++ph.next.vars[7] == kTicksPerBucket) {
      ph.next.vars[7] = 0;
      if (--ph.next.vars[6] == 0) ph.exhausted = true;
    }
    return ph;
  }

  std::vector<int> domains() const override {
    return {grid_.rows(), grid_.cols(), 2, 2, 2, 2, kBatteryFull + 1, kTicksPerBucket};
  }

 private:
  static int stage_of(const EnvState& s) {
    if (s.vars[5] == 1) return 4;
    if (s.vars[4] == 1) return 3;
    if (s.vars[3] == 1) return 2;
    if (s.vars[2] == 1) return 1;
    return 0;
  }

  static void apply_stage(EnvState& s, std::size_t stage) {
    switch (stage) {
      case 0: s.vars[2] = 1; break;               // scanner picked up
      case 1: s.vars[3] = 1; break;               // inventory scanned
      case 2: s.vars[2] = 0; s.vars[4] = 1; break;  // scanner docked
      case 3: s.vars[5] = 1; break;               // item collected
      default: break;                             // delivery ends the task
    }
  }

  Grid grid_;
  Cell start_;
  std::array<Cell, 5> stations_{};
  std::array<Symbol, 5> symbols_{};
};

}  // namespace

nlohmann::json generate_warehouse(Variant variant, std::uint64_t seed) {
  const bool target = variant == Variant::target;
  const int rows = target ? 10 : 6;
  const int cols = target ? 12 : 8;
  Grid grid(rows, cols);
  add_racks(grid);
  Rng rng = layout_rng(EnvName::warehouse_robotics, variant, seed);
  std::set<Cell> taken;
  const Cell lo{0, 0}, hi{rows - 1, cols - 1};

  struct Anchor {
    const char* name;
    double r, c;
  };
  // The two facilities share the workflow but not the floor plan.
  const std::array<Anchor, 6> anchors =
      target ? std::array<Anchor, 6>{{{"start", 0.5, 0.0},
                                      {"scanner", 0.0, 0.15},
                                      {"scan", 0.1, 0.85},
                                      {"charging_station", 0.9, 0.1},
                                      {"item", 0.85, 0.7},
                                      {"deliver", 0.45, 1.0}}}
             : std::array<Anchor, 6>{{{"start", 0.0, 0.0},
                                      {"scanner", 0.2, 0.4},
                                      {"scan", 0.0, 1.0},
                                      {"charging_station", 1.0, 0.0},
                                      {"item", 1.0, 0.8},
                                      {"deliver", 0.6, 1.0}}};
  nlohmann::json p;
  p["rows"] = rows;
  p["cols"] = cols;
  for (const auto& a : anchors) {
    const int jitter = std::string_view(a.name) == "start" ? 0 : 1;
    p[a.name] = to_json(place(grid, a.r, a.c, jitter, rng, taken, lo, hi));
  }
  return p;
}

std::unique_ptr<Environment> build_warehouse(const EnvSpec& spec) {
  return std::make_unique<Warehouse>(spec, bundled_dfa(EnvName::warehouse_robotics));
}

}  // namespace cadent::envs::detail
