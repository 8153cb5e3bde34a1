// Mountain Car Collection: a rover on a one-dimensional bucketed slope. A
// short hill lies behind the valley; ahead the slope climbs gently, then
// steeply up to the summit. Thrust only cancels gravity on the gentle part, so
// the steep top is reached by swinging back for momentum first.
//
// Parts are picked up with `interact` while standing on their bucket, in
// order of altitude, then delivered at the summit base station.

#include <algorithm>
#include <array>

#include "envs/grid.hpp"
#include "envs/registry.hpp"

namespace cadent::envs::detail {

namespace {

constexpr int kMaxSpeed = 3;
constexpr int kEnergyBuckets = 5;
constexpr std::array<const char*, 4> kStops{"power_cell", "sensor_array", "data_crystal", "base_station"};

enum : Action { kLeft = 0, kCoast = 1, kRight = 2, kInteract = 3 };

class MountainCar final : public Environment {
 public:
  MountainCar(EnvSpec spec, automaton::Dfa dfa) : Environment(std::move(spec), std::move(dfa)) {
    const auto& p = spec_.parameters;
    const int expected = spec_.variant == Variant::target ? 15 : 9;
    positions_ = p.value("positions", -1);
    valley_ = p.value("valley", -1);
    steep_ = p.value("steep_start", -1);
    if (positions_ != expected) {
      throw EnvError("mountain_car_collection: expected " + std::to_string(expected) + " position buckets");
    }
    if (valley_ < 1 || valley_ >= steep_ - 1 || steep_ >= positions_) {
      throw EnvError("mountain_car_collection: need 0 < valley < steep_start < positions");
    }
    int previous = valley_;
    for (std::size_t i = 0; i < kStops.size(); ++i) {
      const int at = p.value(kStops[i], -1);
      if (at <= previous || at >= positions_) {
        throw EnvError(std::string("mountain_car_collection: '") + kStops[i] +
                       "' must lie uphill of the valley and of the previous stop, inside the track");
      }
      stops_[i] = at;
      symbols_[i] = dfa_.symbol_id(kStops[i]);
      previous = at;
    }
    if (stops_[3] != positions_ - 1) throw EnvError("mountain_car_collection: base_station must be at the summit");

    gravity_.resize(static_cast<std::size_t>(positions_));
    height_.resize(static_cast<std::size_t>(positions_));
    for (int x = 0; x < positions_; ++x) {
      gravity_[static_cast<std::size_t>(x)] = x < valley_ ? 1 : x == valley_ ? 0 : x < steep_ ? -1 : -2;
    }
    for (int x = valley_ - 1; x >= 0; --x) height_[static_cast<std::size_t>(x)] = height_[static_cast<std::size_t>(x + 1)] + 1;
    for (int x = valley_ + 1; x < positions_; ++x) {
      height_[static_cast<std::size_t>(x)] =
          height_[static_cast<std::size_t>(x - 1)] + std::abs(gravity_[static_cast<std::size_t>(x)]);
    }
    max_energy_ = *std::max_element(height_.begin(), height_.end()) + kMaxSpeed * kMaxSpeed;
  }

  int num_actions() const override { return 4; }
  std::vector<std::string> action_names() const override {
    return {"accelerate_left", "no_op", "accelerate_right", "interact"};
  }
  std::vector<std::string> variable_names() const override { return {"position", "velocity", "energy", "parts"}; }

  std::string dump_layout() const override {
    const int top = *std::max_element(height_.begin(), height_.end());
    std::string out = "mountain_car_collection (" + to_string(spec_.variant) +
                      ")  V=valley P=power_cell S=sensor_array D=data_crystal B=base_station\n";
    for (int level = top; level >= 0; --level) {
      for (int x = 0; x < positions_; ++x) out += height_[static_cast<std::size_t>(x)] >= level ? '#' : ' ';
      out += '\n';
    }
    for (int x = 0; x < positions_; ++x) {
      char c = '.';
      if (x == valley_) c = 'V';
      for (std::size_t i = 0; i < kStops.size(); ++i) {
        if (stops_[i] == x) c = "PSDB"[i];
      }
      out += c;
    }
    out += '\n';
    for (int x = 0; x < positions_; ++x) {
      const int g = gravity_[static_cast<std::size_t>(x)];
      out += g > 0 ? '>' : g == 0 ? '_' : g == -1 ? '<' : 'L';
    }
    out += "   gravity: > push right, < pull left, L steep pull\n";
    return out;
  }

 protected:
  EnvState initial_state() const override {
    EnvState s;
    s.vars[0] = valley_;
    s.vars[1] = kMaxSpeed;  // zero velocity, stored with an offset
    s.vars[2] = energy_bucket(valley_, 0);
    s.vars[3] = 0;
    return s;
  }

  Physics physics(const EnvState& s, Action a) const override {
    Physics ph;
    ph.next = s;
    const int pos = s.vars[0];
    const int vel = s.vars[1] - kMaxSpeed;
    const auto parts = static_cast<std::size_t>(s.vars[3]);

    if (a == kInteract && parts < kStops.size() && pos == stops_[parts]) {
      ph.event = symbols_[parts];
      ph.next.vars[3] = static_cast<int>(parts) + 1;
    }

    const int thrust = a == kLeft ? -1 : a == kRight ? 1 : 0;
    int v = std::clamp(vel + thrust + gravity_[static_cast<std::size_t>(pos)], -kMaxSpeed, kMaxSpeed);
    int x = pos + v;
    if (x <= 0) {
      x = 0;
      v = 0;
    } else if (x >= positions_ - 1) {
      x = positions_ - 1;
      v = 0;
    }
    ph.next.vars[0] = x;
    ph.next.vars[1] = v + kMaxSpeed;
    ph.next.vars[2] = energy_bucket(x, v);
    return ph;
  }

  std::vector<int> domains() const override { return {positions_, 2 * kMaxSpeed + 1, kEnergyBuckets, 5}; }

 private:
  // Mechanical energy (height plus squared speed) quantized to five levels.
  int energy_bucket(int pos, int vel) const {
    const int e = height_[static_cast<std::size_t>(pos)] + vel * vel;
    return std::min(kEnergyBuckets - 1, e * kEnergyBuckets / (max_energy_ + 1));
  }

  int positions_ = 0;
  int valley_ = 0;
  int steep_ = 0;
  int max_energy_ = 1;
  std::array<int, 4> stops_{};
  std::array<Symbol, 4> symbols_{};
  std::vector<int> gravity_;
  std::vector<int> height_;
};

}  // namespace

nlohmann::json generate_mountain_car(Variant variant, std::uint64_t seed) {
  Rng rng = layout_rng(EnvName::mountain_car_collection, variant, seed);
  const bool target = variant == Variant::target;
  const int positions = target ? 15 : 9;
  const int valley = target ? 4 : 2;
  const int steep = target ? 12 : 7;
  // Lower two parts are jittered within the gentle slope, keeping altitude order.
  const int power_lo = valley + 1;
  const int sensor_hi = steep - 1;
  const int power = target ? 5 + static_cast<int>(rng.below(3)) : power_lo + static_cast<int>(rng.below(2));
  const int sensor_lo = std::max(power + 1, target ? 8 : 5);
  const int sensor = sensor_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(sensor_hi - sensor_lo + 1)));

  nlohmann::json p;
  p["positions"] = positions;
  p["valley"] = valley;
  p["steep_start"] = steep;
  p["power_cell"] = power;
  p["sensor_array"] = sensor;
  p["data_crystal"] = steep;
  p["base_station"] = positions - 1;
  return p;
}

std::unique_ptr<Environment> build_mountain_car(const EnvSpec& spec) {
  return std::make_unique<MountainCar>(spec, bundled_dfa(EnvName::mountain_car_collection));
}

}  // namespace cadent::envs::detail
