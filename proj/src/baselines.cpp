#include "cadent/baselines.hpp"

namespace cadent::baselines {

namespace {

struct Name {
  Preset preset;
  const char* text;
};

constexpr Name kNames[] = {
    {Preset::cadent, "cadent"},
    {Preset::ad, "ad"},
    {Preset::pd, "pd"},
    {Preset::no_transfer, "no_transfer"},
    {Preset::no_trust_gate, "no_trust_gate"},
    {Preset::no_transfer, "none"},
    {Preset::no_trust_gate, "fixed-trust"},
};

}  // namespace

std::string to_string(Preset p) {
  for (const auto& n : kNames) {
    if (n.preset == p) return n.text;
  }
  throw student::StudentError("unknown preset");
}

Preset parse_preset(const std::string& name) {
  for (const auto& n : kNames) {
    if (name == n.text) return n.preset;
  }
  throw student::StudentError("unknown variant preset '" + name +
                              "' (expected cadent, ad, pd, no_transfer or no_trust_gate)");
}

std::vector<Preset> all_presets() {
  return {Preset::cadent, Preset::ad, Preset::pd, Preset::no_transfer, Preset::no_trust_gate};
}

VariantPreset preset(Preset p) {
  VariantPreset v;
  v.name = p;
  switch (p) {
    case Preset::cadent: break;
    case Preset::ad: v.lambda_pd = 0.0; break;
    case Preset::pd: v.lambda_ad = 0.0; break;
    case Preset::no_transfer:
      v.lambda_ad = 0.0;
      v.lambda_pd = 0.0;
      v.gate = student::GateMode::bypass;
      break;
    case Preset::no_trust_gate:
      v.gate = student::GateMode::fixed;
      v.omega0 = 0.5;
      break;
  }
  return v;
}

student::StudentConfig apply(const VariantPreset& patch, student::StudentConfig base) {
  if (patch.lambda_ad) base.guide.lambda_ad = *patch.lambda_ad;
  if (patch.lambda_pd) base.guide.lambda_pd = *patch.lambda_pd;
  if (patch.gate) base.gate = *patch.gate;
  if (patch.omega0) base.omega0 = *patch.omega0;
  return base;
}

student::StudentConfig resolve_preset(const std::string& name, const student::StudentConfig& base, bool gated) {
  const Preset p = parse_preset(name);
  auto cfg = apply(preset(p), base);
  if (!gated && needs_knowledge(p)) cfg.gate = student::GateMode::ungated;
  cfg.validate();
  return cfg;
}

bool needs_knowledge(Preset p) { return p != Preset::no_transfer; }

}  // namespace cadent::baselines
