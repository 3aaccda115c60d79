#pragma once

// Scenario execution behind the `spconv` command-line verbs. Each function
// writes its output to `out` (stdout when empty) and returns what it wrote.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "spconv/analytic.hpp"
#include "spconv/config.hpp"
#include "spconv/report.hpp"
#include "spconv/simulation.hpp"

namespace spconv::cli {

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> slots;
    std::optional<int> trials;
    std::optional<Strategy> strategy;
    int threads = 0;
    bool timing = false;
};

/// Re-validates after applying the overrides.
SimulationConfig apply_overrides(const SimulationConfig& config, const RunOverrides& overrides);

analytic::EfficiencyCurves run_analytic(int n_max, double eta_sw, const std::filesystem::path& out);

nlohmann::json run_simulation(const std::filesystem::path& config_path, const RunOverrides& overrides,
                              const std::filesystem::path& out);

/// Cartesian product in the order strategy, n, eta_sw, transmittance.
std::vector<SimulationConfig> expand_grid(const SimulationConfig& base, const SweepGrid& grid);

/// Grid point g runs on streams [g * trials, (g + 1) * trials), so a
/// single-point grid reproduces `simulate`. `grid` dimensions that are set
/// replace the ones from the config file.
std::vector<SweepRow> run_sweep(const std::filesystem::path& config_path, const SweepGrid& grid,
                                const RunOverrides& overrides, const std::filesystem::path& out);

/// Heralding-arm calibration: exact stationary herald statistics, a
/// calibration-mode simulation measuring C_h(n) and P_h(1) eta_D, and,
/// with a target, the pair probability that reproduces that C_h(n).
nlohmann::json run_calibrate(const std::filesystem::path& config_path, std::optional<double> target_c_h_rate,
                             const RunOverrides& overrides, const std::filesystem::path& out);

}  // namespace spconv::cli
