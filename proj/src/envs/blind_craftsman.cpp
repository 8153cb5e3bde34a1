// Blind Craftsman: an open grid with scattered wood piles. The agent carries
// one piece of wood at a time to the factory, crafts a tool, and goes home
// once the quota is met.

#include "envs/grid.hpp"
#include "envs/registry.hpp"

namespace cadent::envs::detail {

namespace {

constexpr int kDefaultQuota = 3;

class BlindCraftsman final : public Environment {
 public:
  BlindCraftsman(EnvSpec spec, int quota)
      : Environment(std::move(spec), blind_craftsman_dfa(quota)), quota_(quota), grid_(1, 1) {
    const auto& p = spec_.parameters;
    const int n = spec_.variant == Variant::target ? 25 : 15;
    require_dims(p, n, n, "blind_craftsman");
    grid_ = Grid(n, n);
    std::set<Cell> taken;
    start_ = require_cell(grid_, p, "start", taken);
    home_ = require_cell(grid_, p, "home", taken);
    factory_ = require_cell(grid_, p, "factory", taken);
    if (!p.contains("wood") || !p.at("wood").is_array() || p.at("wood").empty()) {
      throw EnvError("blind_craftsman: layout needs a non-empty 'wood' list");
    }
    for (std::size_t i = 0; i < p.at("wood").size(); ++i) {
      nlohmann::json single{{"wood", p.at("wood")[i]}};
      wood_.push_back(require_cell(grid_, single, "wood", taken));
    }
    wood_sym_ = dfa_.symbol_id("wood");
    factory_sym_ = dfa_.symbol_id("factory");
    home_sym_ = dfa_.symbol_id("home");
  }

  int num_actions() const override { return 4; }
  std::vector<std::string> action_names() const override { return grid_actions(); }
  std::vector<std::string> variable_names() const override { return {"row", "col", "carrying_wood", "tools"}; }

  std::string dump_layout() const override {
    std::map<Cell, char> glyphs{{start_, 'S'}, {home_, 'H'}, {factory_, 'F'}};
    for (Cell w : wood_) glyphs[w] = 'w';
    return "blind_craftsman (" + to_string(spec_.variant) + ", quota " + std::to_string(quota_) +
           ")  S=start H=home F=factory w=wood\n" + grid_.render(glyphs);
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
    const bool carrying = s.vars[2] == 1;
    const int tools = s.vars[3];
    if (!carrying && tools < quota_ && is_wood(pos)) {
      ph.event = wood_sym_;
      ph.next.vars[2] = 1;
    } else if (carrying && pos == factory_) {
      ph.event = factory_sym_;
      ph.next.vars[2] = 0;
      ph.next.vars[3] = tools + 1;
    } else if (tools == quota_ && pos == home_) {
      ph.event = home_sym_;
    }
    return ph;
  }

  std::vector<int> domains() const override { return {grid_.rows(), grid_.cols(), 2, quota_ + 1}; }

 private:
  bool is_wood(Cell c) const {
    for (Cell w : wood_) {
      if (w == c) return true;
    }
    return false;
  }

  int quota_;
  Grid grid_;
  Cell start_;
  Cell home_;
  Cell factory_;
  std::vector<Cell> wood_;
  Symbol wood_sym_ = 0;
  Symbol factory_sym_ = 0;
  Symbol home_sym_ = 0;
};

}  // namespace

nlohmann::json generate_blind_craftsman(Variant variant, std::uint64_t seed) {
  const int n = variant == Variant::target ? 25 : 15;
  const int jitter = variant == Variant::target ? 2 : 1;
  Grid grid(n, n);
  Rng rng = layout_rng(EnvName::blind_craftsman, variant, seed);
  std::set<Cell> taken;
  const Cell lo{0, 0}, hi{n - 1, n - 1};

  nlohmann::json p;
  p["rows"] = n;
  p["cols"] = n;
  p["quota"] = kDefaultQuota;
  const Cell home = place(grid, 0.08, 0.08, 0, rng, taken, lo, hi);
  p["home"] = to_json(home);
  p["start"] = to_json(place(grid, 0.08, 0.08, 0, rng, taken, {home.r, home.c + 1}, hi));
  p["factory"] = to_json(place(grid, 0.55, 0.55, jitter, rng, taken, lo, hi));
  nlohmann::json wood = nlohmann::json::array();
  for (auto [fr, fc] : {std::pair{0.2, 0.75}, {0.75, 0.2}, {0.85, 0.85}, {0.3, 0.4}}) {
    wood.push_back(to_json(place(grid, fr, fc, jitter, rng, taken, lo, hi)));
  }
  p["wood"] = wood;
  return p;
}

std::unique_ptr<Environment> build_blind_craftsman(const EnvSpec& spec) {
  const int quota = spec.parameters.value("quota", kDefaultQuota);
  if (quota < 1 || quota > 9) throw EnvError("blind_craftsman: quota must lie in [1, 9]");
  return std::make_unique<BlindCraftsman>(spec, quota);
}

}  // namespace cadent::envs::detail
