#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "selfcal/engine.hpp"
#include "selfcal/simulator.hpp"

namespace selfcal {

/// Contents of a JSON config file: scenario keys at top level, engine tuning
/// under "engine".
///
///   {"trajectory": "planar_arcs", "duration": 60, "rate": 20,
///    "theta_true": {"q": [1,0,0,0], "p": [0.1,0,0]},
///    "drift_events": [{"t": 200, "theta": {"q": [...], "p": [...]}}],
///    "noise": {"sigma_t": 0.005, "sigma_r": 0.0087}, "seed": 7,
///    "engine": {"initial_guess": {...}, "pq_size": 10, "policy": "naive", ...}}
struct RunConfig {
  ScenarioSpec scenario;
  EngineConfig engine;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
[[nodiscard]] RunConfig parse_config(std::string_view json_text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

[[nodiscard]] std::string_view to_string(SwapPolicy policy);
[[nodiscard]] SwapPolicy swap_policy_from_string(std::string_view s);

}  // namespace selfcal
