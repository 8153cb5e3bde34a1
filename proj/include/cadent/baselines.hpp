#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cadent/student.hpp"

namespace cadent::baselines {

enum class Preset { cadent, ad, pd, no_transfer, no_trust_gate };

std::string to_string(Preset p);
// Accepts the canonical names plus the aliases `none` and `fixed-trust`.
Preset parse_preset(const std::string& name);
std::vector<Preset> all_presets();

/// Parameter patch applied on top of a base student configuration.
struct VariantPreset {
  Preset name = Preset::cadent;
  std::optional<double> lambda_ad;
  std::optional<double> lambda_pd;
  std::optional<student::GateMode> gate;
  std::optional<double> omega0;
};

VariantPreset preset(Preset p);

student::StudentConfig apply(const VariantPreset& patch, student::StudentConfig base);

// Base config with the named preset applied. With gated = false the teacher
// terms of a guided preset are added without the trust gate.
student::StudentConfig resolve_preset(const std::string& name, const student::StudentConfig& base,
                                      bool gated = true);

// Whether runs of this preset consult teacher knowledge at all.
bool needs_knowledge(Preset p);

}  // namespace cadent::baselines
