#pragma once

#include <memory>

#include <json.hpp>

#include "cadent/envs.hpp"

namespace cadent::envs::detail {

nlohmann::json generate_blind_craftsman(Variant variant, std::uint64_t seed);
nlohmann::json generate_dungeon_quest(Variant variant, std::uint64_t seed);
nlohmann::json generate_mountain_car(Variant variant, std::uint64_t seed);
nlohmann::json generate_warehouse(Variant variant, std::uint64_t seed);

std::unique_ptr<Environment> build_blind_craftsman(const EnvSpec& spec);
std::unique_ptr<Environment> build_dungeon_quest(const EnvSpec& spec);
std::unique_ptr<Environment> build_mountain_car(const EnvSpec& spec);
std::unique_ptr<Environment> build_warehouse(const EnvSpec& spec);

}  // namespace cadent::envs::detail
