#pragma once

// Report and CSV serialization. Numbers are written in shortest round-trip
// form, so reading a file back yields bit-identical doubles.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spconv/analytic.hpp"
#include "spconv/config.hpp"
#include "spconv/simulation.hpp"

namespace spconv {

std::string format_double(double value);
double parse_double(std::string_view text);

/// Structured single-run report: every SimulationReport field (wall time
/// only on request, since it breaks byte-identical output), raw counts and
/// the normalized config echo.
nlohmann::json report_to_json(const SimulationConfig& config, const RunResult& result, bool include_timing = false);
std::string render_json(const nlohmann::json& json);

struct StoredReport {
    SimulationConfig config;
    std::string config_digest;  // as written in the file
    SimulationReport report;
};

StoredReport parse_report(std::string_view text);

void write_curves_csv(std::ostream& out, const analytic::EfficiencyCurves& curves);
analytic::EfficiencyCurves read_curves_csv(std::istream& in);

struct SweepRow {
    std::size_t index = 0;
    Strategy strategy = Strategy::ActiveHeralded;
    int n = 0;
    double eta_sw = 0.0;
    double transmittance = 0.0;
    EfficiencyEstimate s;
    double c_n_rate = 0.0;
    double c_h_rate = 0.0;
    double p_h1_etaD = 0.0;
    std::int64_t triggers = 0;
    std::int64_t coincidences = 0;
    std::uint64_t seed = 0;
    std::string config_digest;
};

inline constexpr std::string_view kSweepHeader =
    "index,strategy,n,eta_sw,transmittance,s_estimate,std_error,c_n_rate,c_h_rate,p_h1_etaD,triggers,coincidences,seed,"
    "config_digest";

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

}  // namespace spconv
