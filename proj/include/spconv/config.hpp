#pragma once

// JSON run configuration. Layout (every section optional except where
// noted, unknown keys are rejected):
//
//   {
//     "source": {
//       "pair_prob": 0.0143,            // required
//       "rep_rate_hz": 82e6,            // required
//       "herald_det_efficiency": 0.31,
//       "herald_deadtime_s": 40e-9,     // or "herald_deadtime_slots": 4
//       "herald_splitter_ratio": 0.5,
//       "signal_det_efficiency": 0.079,
//       "multi_pair_enabled": false
//     },
//     "converter": {
//       "n_modes": 2,                   // required
//       "strategy": "heralded",         // heralded | clocked | passive
//       "transmittance": 0.731,
//       "port_efficiencies": [0.998, 0.998]
//     },
//     "controller": { "delay_offset_slots": 0 },
//     "run": { "seed": 42, "slots": 10000000, "trials": 8, "calibration_mode": true },
//     "sweep": { "strategy": ["clocked"], "n": [2, 3, 4], "eta_sw": [1.0], "transmittance": [] }
//   }
//
// Comments (// and /* */) are accepted.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spconv/model.hpp"

namespace spconv {

struct RunControls {
    std::uint64_t seed = 0;
    std::int64_t slots = 10'000'000;  // per trial
    int trials = 8;
    bool calibration_mode = true;  // measure P_h(1) eta_D instead of using the model value

    bool operator==(const RunControls&) const = default;
};

struct SimulationConfig {
    ValidatedConfig physics;
    ControllerParams controller;
    RunControls run;

    const SourceParams& source() const { return physics.source(); }
    const ConverterParams& converter() const { return physics.converter(); }

    bool operator==(const SimulationConfig&) const = default;
};

/// Grid dimensions; an unset (empty) dimension keeps the base value.
/// eta_sw sets transmittance = eta_sw with all port efficiencies 1.
struct SweepGrid {
    std::vector<Strategy> strategy;
    std::vector<int> n;
    std::vector<double> eta_sw;
    std::vector<double> transmittance;

    bool has_dimensions() const {
        return !strategy.empty() || !n.empty() || !eta_sw.empty() || !transmittance.empty();
    }
};

struct LoadedConfig {
    SimulationConfig config;
    SweepGrid sweep;
};

/// Throws ConfigError with line/column for syntax errors and the dotted key
/// path for unknown keys, wrong types and out-of-range values.
LoadedConfig parse_config(std::string_view text);
LoadedConfig load_config(const std::filesystem::path& path);

/// Normalized echo (deadtime in slots, sorted keys).
nlohmann::json config_to_json(const SimulationConfig& config);
SimulationConfig config_from_json(const nlohmann::json& json);

/// FNV-1a 64 over the normalized echo, as 16 hex digits. Independent of key
/// order in the input file.
std::string config_digest(const SimulationConfig& config);

}  // namespace spconv
