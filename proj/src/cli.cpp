#include "spconv/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

#include "spconv/source.hpp"

namespace spconv::cli {

namespace {

void emit(const std::filesystem::path& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw std::system_error(errno, std::generic_category(), "cannot open " + out.string() + " for writing");
    file << text;
    file.flush();
    if (!file) throw std::system_error(errno, std::generic_category(), "write failed for " + out.string());
}

SimulationConfig rebuild(const SimulationConfig& base, SourceParams source, ConverterParams converter) {
    return SimulationConfig{validate_config(std::move(source), std::move(converter)), base.controller, base.run};
}

double mean(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return values.empty() ? 1.0 : sum / static_cast<double>(values.size());
}

}  // namespace

SimulationConfig apply_overrides(const SimulationConfig& config, const RunOverrides& overrides) {
    SimulationConfig result = config;
    if (overrides.seed) result.run.seed = *overrides.seed;
    if (overrides.slots) {
        if (*overrides.slots < 1) throw ConfigError::at("--slots", "must be >= 1");
        result.run.slots = *overrides.slots;
    }
    if (overrides.trials) {
        if (*overrides.trials < 1) throw ConfigError::at("--trials", "must be >= 1");
        result.run.trials = *overrides.trials;
    }
    if (overrides.strategy) {
        ConverterParams converter = config.converter();
        converter.strategy = *overrides.strategy;
        result = rebuild(result, config.source(), std::move(converter));
    }
    return result;
}

analytic::EfficiencyCurves run_analytic(int n_max, double eta_sw, const std::filesystem::path& out) {
    auto curves = analytic::efficiency_curves(n_max, eta_sw);
    std::ostringstream text;
    write_curves_csv(text, curves);
    emit(out, text.str());
    return curves;
}

nlohmann::json run_simulation(const std::filesystem::path& config_path, const RunOverrides& overrides,
                              const std::filesystem::path& out) {
    const SimulationConfig config = apply_overrides(load_config(config_path).config, overrides);
    const RunResult result = run_pipeline(config, 0, overrides.threads);
    nlohmann::json report = report_to_json(config, result, overrides.timing);
    emit(out, render_json(report));
    std::cerr << "simulate: " << result.counts.slots << " slots, " << result.counts.triggers << " triggers, S("
              << config.converter().n_modes << ") = " << format_double(result.report.s_estimate.value) << " +- "
              << format_double(result.report.s_estimate.std_error) << '\n';
    return report;
}

std::vector<SimulationConfig> expand_grid(const SimulationConfig& base, const SweepGrid& grid) {
    if (!grid.has_dimensions()) throw ConfigError::at("sweep", "empty grid");
    const auto strategies = grid.strategy.empty() ? std::vector<Strategy>{base.converter().strategy} : grid.strategy;
    const auto ns = grid.n.empty() ? std::vector<int>{base.converter().n_modes} : grid.n;
    const std::vector<std::optional<double>> etas = [&] {
        std::vector<std::optional<double>> v;
        if (grid.eta_sw.empty()) v.push_back(std::nullopt);
        for (double e : grid.eta_sw) v.push_back(e);
        return v;
    }();
    const std::vector<std::optional<double>> transmittances = [&] {
        std::vector<std::optional<double>> v;
        if (grid.transmittance.empty()) v.push_back(std::nullopt);
        for (double t : grid.transmittance) v.push_back(t);
        return v;
    }();

    std::vector<SimulationConfig> points;
    for (Strategy strategy : strategies) {
        for (int n : ns) {
            for (const auto& eta : etas) {
                for (const auto& t : transmittances) {
                    ConverterParams converter = base.converter();
                    converter.strategy = strategy;
                    if (n != converter.n_modes) {
                        // Keep the mean routing efficiency when the mode count changes.
                        converter.port_efficiencies.assign(static_cast<std::size_t>(std::max(n, 0)),
                                                           mean(base.converter().port_efficiencies));
                        converter.n_modes = n;
                    }
                    if (eta) {
                        converter.transmittance = *eta;
                        converter.port_efficiencies.assign(static_cast<std::size_t>(std::max(n, 0)), 1.0);
                    }
                    if (t) converter.transmittance = *t;
                    points.push_back(rebuild(base, base.source(), std::move(converter)));
                }
            }
        }
    }
    return points;
}

std::vector<SweepRow> run_sweep(const std::filesystem::path& config_path, const SweepGrid& grid,
                                const RunOverrides& overrides, const std::filesystem::path& out) {
    LoadedConfig loaded = load_config(config_path);
    SweepGrid effective = loaded.sweep;
    if (!grid.strategy.empty()) effective.strategy = grid.strategy;
    if (!grid.n.empty()) effective.n = grid.n;
    if (!grid.eta_sw.empty()) effective.eta_sw = grid.eta_sw;
    if (!grid.transmittance.empty()) effective.transmittance = grid.transmittance;
    RunOverrides base_overrides = overrides;
    base_overrides.strategy.reset();
    if (overrides.strategy && effective.strategy.empty()) effective.strategy = {*overrides.strategy};

    const SimulationConfig base = apply_overrides(loaded.config, base_overrides);
    const auto points = expand_grid(base, effective);
    std::vector<SweepRow> rows;
    for (std::size_t g = 0; g < points.size(); ++g) {
        const SimulationConfig& point = points[g];
        const auto first_stream = static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(point.run.trials);
        const RunResult result = run_pipeline(point, first_stream, overrides.threads);
        SweepRow row;
        row.index = g;
        row.strategy = point.converter().strategy;
        row.n = point.converter().n_modes;
        row.eta_sw = point.converter().switching_efficiency();
        row.transmittance = point.converter().transmittance;
        row.s = result.report.s_estimate;
        row.c_n_rate = result.report.c_n_rate;
        row.c_h_rate = result.report.c_h_rate;
        row.p_h1_etaD = result.report.p_h1_etaD;
        row.triggers = result.counts.triggers;
        row.coincidences = result.counts.coincidences;
        row.seed = point.run.seed;
        row.config_digest = result.report.config_digest;
        rows.push_back(std::move(row));
        std::cerr << "sweep: point " << (g + 1) << "/" << points.size() << '\n';
    }
    std::ostringstream text;
    write_sweep_csv(text, rows);
    emit(out, text.str());
    return rows;
}

nlohmann::json run_calibrate(const std::filesystem::path& config_path, std::optional<double> target_c_h_rate,
                             const RunOverrides& overrides, const std::filesystem::path& out) {
    SimulationConfig config = apply_overrides(load_config(config_path).config, overrides);
    config.run.calibration_mode = true;
    const SourceParams& source = config.source();
    const int n = config.converter().n_modes;

    const HeraldStatistics stats = stationary_herald_statistics(source, n);
    const TrialCounts counts = simulate_trials(config, 0, overrides.threads);
    const auto slots = static_cast<double>(counts.slots);

    nlohmann::json result;
    result["run_length"] = n;
    result["herald_probability"] = herald_probability(source);
    result["expected"] = {
        {"herald_fraction", stats.herald_fraction},
        {"c_h_rate", stats.trigger_probability * source.rep_rate_hz},
    };
    nlohmann::json measured;
    measured["slots"] = counts.slots;
    measured["herald_fraction"] = static_cast<double>(counts.heralds) / slots;
    measured["c_h_rate"] = static_cast<double>(counts.triggers) * source.rep_rate_hz / slots;
    measured["c_h_rate_std_error"] = std::sqrt(static_cast<double>(counts.triggers)) * source.rep_rate_hz / slots;
    if (counts.calibration_heralds > 0) {
        const double p = static_cast<double>(counts.calibration_detections) / static_cast<double>(counts.calibration_heralds);
        measured["p_h1_etaD"] = p;
        if (counts.calibration_detections > 0) {
            const CountInput inputs[] = {{static_cast<double>(counts.calibration_detections), std::nullopt},
                                         {static_cast<double>(counts.calibration_heralds), std::nullopt}};
            measured["p_h1_etaD_std_error"] = propagate_counting_uncertainty(inputs, Formula::Quotient);
        }
    }
    result["measured"] = measured;
    if (target_c_h_rate) {
        result["target_c_h_rate"] = *target_c_h_rate;
        result["suggested_pair_prob"] = solve_pair_prob_for_trigger_rate(source, n, *target_c_h_rate);
    }
    result["config_digest"] = config_digest(config);
    emit(out, render_json(result));
    return result;
}

}  // namespace spconv::cli
