#include "cadent/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cadent::tabular {

namespace {

constexpr const char* kMagic = "cadent-qtable";
constexpr int kVersion = 1;

const std::array<double, kMaxActions> kZeroRow{};

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

double EpsilonSchedule::at(int episode) const {
  return std::max(end, start * std::pow(decay, static_cast<double>(episode)));
}

void LearningParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvariantError("alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvariantError("gamma must lie in [0, 1)");
  if (!(tau > 0.0)) throw InvariantError("tau must be positive");
  if (!(epsilon.start <= 1.0 && epsilon.start >= epsilon.end && epsilon.end >= 0.0)) {
    throw InvariantError("epsilon schedule needs 1 >= start >= end >= 0");
  }
  if (!(epsilon.decay > 0.0 && epsilon.decay <= 1.0)) throw InvariantError("epsilon decay must lie in (0, 1]");
}

QTable::QTable(int num_actions) : num_actions_(num_actions) {
  if (num_actions < 1 || num_actions > kMaxActions) throw InvariantError("QTable: unsupported action count");
}

void QTable::check_action(Action a) const {
  if (a < 0 || a >= num_actions_) throw std::out_of_range("QTable: action index out of range");
}

double QTable::value(const ProductState& s, Action a) const {
  check_action(a);
  auto it = rows_.find(s);
  return it == rows_.end() ? 0.0 : it->second[static_cast<std::size_t>(a)];
}

std::span<const double> QTable::row(const ProductState& s) const {
  auto it = rows_.find(s);
  const auto& r = it == rows_.end() ? kZeroRow : it->second;
  return {r.data(), static_cast<std::size_t>(num_actions_)};
}

double QTable::max_value(const ProductState& s) const {
  auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

void QTable::set(const ProductState& s, Action a, double v) {
  check_action(a);
  if (!std::isfinite(v)) throw InvariantError("QTable: refusing to store a non-finite value");
  rows_.try_emplace(s, kZeroRow).first->second[static_cast<std::size_t>(a)] = v;
}

std::vector<ProductState> QTable::states() const {
  std::vector<ProductState> out;
  out.reserve(rows_.size());
  for (const auto& [s, _] : rows_) out.push_back(s);
  std::sort(out.begin(), out.end());
  return out;
}

bool operator==(const QTable& a, const QTable& b) {
  if (a.num_actions_ != b.num_actions_ || a.rows_.size() != b.rows_.size()) return false;
  for (const auto& [s, row] : a.rows_) {
    auto it = b.rows_.find(s);
    if (it == b.rows_.end()) return false;
    for (int i = 0; i < a.num_actions_; ++i) {
      // Bitwise comparison: reproducibility tests need exact equality.
      if (std::memcmp(&row[static_cast<std::size_t>(i)], &it->second[static_cast<std::size_t>(i)], sizeof(double)) != 0) {
        return false;
      }
    }
  }
  return true;
}

void QTable::save(std::ostream& out) const {
  auto keys = states();
  out << kMagic << ' ' << kVersion << '\n';
  out << "actions " << num_actions_ << '\n';
  out << "entries " << keys.size() * static_cast<std::size_t>(num_actions_) << '\n';
  for (const auto& s : keys) {
    const auto& r = rows_.at(s);
    for (int a = 0; a < num_actions_; ++a) {
      out << s.env << ' ' << s.q << ' ' << a << ' ' << hex(r[static_cast<std::size_t>(a)]) << '\n';
    }
  }
  if (!out) throw FormatError("QTable: write failed");
}

void QTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("QTable: cannot open '" + path + "' for writing");
  save(out);
}

QTable QTable::load(std::istream& in) {
  std::string magic, label;
  int version = 0, actions = 0;
  std::size_t entries = 0;
  if (!(in >> magic >> version) || magic != kMagic) throw FormatError("QTable: missing snapshot header");
  if (version != kVersion) throw FormatError("QTable: unsupported snapshot version " + std::to_string(version));
  if (!(in >> label >> actions) || label != "actions") throw FormatError("QTable: missing action count");
  if (!(in >> label >> entries) || label != "entries") throw FormatError("QTable: missing entry count");
  QTable qt(actions);
  for (std::size_t i = 0; i < entries; ++i) {
    ProductState s;
    Action a = 0;
    std::string text;
    if (!(in >> s.env >> s.q >> a >> text)) throw FormatError("QTable: truncated snapshot");
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') throw FormatError("QTable: malformed value '" + text + "'");
    qt.set(s, a, v);
  }
  return qt;
}

QTable QTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("QTable: cannot open '" + path + "'");
  return load(in);
}

double td_error(const QTable& qt, const ProductState& s, Action a, double r, const ProductState& s_next, bool done,
                double gamma) {
  const double bootstrap = done ? 0.0 : gamma * qt.max_value(s_next);
  return r + bootstrap - qt.value(s, a);
}

void q_update(QTable& qt, const ProductState& s, Action a, double delta, double alpha) {
  if (!std::isfinite(delta)) throw InvariantError("q_update: non-finite delta");
  qt.set(s, a, qt.value(s, a) + alpha * delta);
}

std::vector<double> softmax_policy(std::span<const double> q_row, double tau) {
  if (!(tau > 0.0)) throw InvariantError("softmax_policy: tau must be positive");
  std::vector<double> p(q_row.size());
  if (q_row.empty()) return p;
  const double top = *std::max_element(q_row.begin(), q_row.end());
  double z = 0.0;
  for (std::size_t i = 0; i < q_row.size(); ++i) {
    p[i] = std::exp((q_row[i] - top) / tau);
    z += p[i];
  }
  for (auto& x : p) x /= z;
  return p;
}

Action argmax(std::span<const double> q_row) {
  Action best = 0;
  for (std::size_t i = 1; i < q_row.size(); ++i) {
    if (q_row[i] > q_row[static_cast<std::size_t>(best)]) best = static_cast<Action>(i);
  }
  return best;
}

Action epsilon_greedy(const QTable& qt, const ProductState& s, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<Action>(rng.below(static_cast<std::uint64_t>(qt.num_actions())));
  }
  return argmax(qt.row(s));
}

std::map<ProductState, Action> greedy_policy(const QTable& qt) {
  std::map<ProductState, Action> out;
  for (const auto& s : qt.states()) out.emplace(s, argmax(qt.row(s)));
  return out;
}

}  // namespace cadent::tabular
