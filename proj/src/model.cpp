#include "spconv/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spconv {

namespace {

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void require_probability(std::vector<Violation>& out, const char* field, double value) {
    if (!in_unit_interval(value)) {
        out.push_back({field, "probability out of range [0, 1]: " + std::to_string(value)});
    }
}

std::string join(const std::vector<Violation>& violations) {
    std::string text = "invalid configuration:";
    for (const auto& v : violations) {
        text += "\n  " + v.field + ": " + v.message;
    }
    return text;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::ActiveHeralded: return "heralded";
        case Strategy::ActiveClocked: return "clocked";
        case Strategy::PassiveBeamsplitter: return "passive";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    if (name == "heralded") return Strategy::ActiveHeralded;
    if (name == "clocked") return Strategy::ActiveClocked;
    if (name == "passive") return Strategy::PassiveBeamsplitter;
    return std::nullopt;
}

std::string_view to_string(EstimateMethod method) {
    switch (method) {
        case EstimateMethod::ClosedForm: return "closed_form";
        case EstimateMethod::MonteCarlo: return "monte_carlo";
        case EstimateMethod::Pipeline: return "pipeline";
    }
    return "unknown";
}

std::optional<EstimateMethod> parse_estimate_method(std::string_view name) {
    if (name == "closed_form") return EstimateMethod::ClosedForm;
    if (name == "monte_carlo") return EstimateMethod::MonteCarlo;
    if (name == "pipeline") return EstimateMethod::Pipeline;
    return std::nullopt;
}

double ConverterParams::switching_efficiency() const {
    if (port_efficiencies.empty()) return 0.0;
    const double sum = std::accumulate(port_efficiencies.begin(), port_efficiencies.end(), 0.0);
    return transmittance * sum / static_cast<double>(port_efficiencies.size());
}

TriggerEvent make_trigger(std::int64_t start_slot, int run_length) {
    TriggerEvent trigger{start_slot, run_length, std::vector<int>(static_cast<std::size_t>(run_length))};
    std::iota(trigger.drive_schedule.begin(), trigger.drive_schedule.end(), 0);
    return trigger;
}

int OutputRecord::absent_photons() const {
    return static_cast<int>(std::count(photon_port.begin(), photon_port.end(), kPhotonAbsent));
}

int OutputRecord::routed_photons() const {
    return static_cast<int>(std::count_if(photon_port.begin(), photon_port.end(), [](int p) { return p >= 0; }));
}

bool OutputRecord::coincidence() const {
    return !port_detections.empty() &&
           std::all_of(port_detections.begin(), port_detections.end(), [](bool b) { return b; });
}

EfficiencyEstimate EfficiencyEstimate::closed_form(double value) {
    return {value, 0.0, EstimateMethod::ClosedForm};
}

EfficiencyEstimate EfficiencyEstimate::with_error(double value, double std_error, EstimateMethod method) {
    if (!(std_error >= 0.0) || !std::isfinite(std_error)) {
        throw std::invalid_argument("standard error must be finite and nonnegative");
    }
    if (method == EstimateMethod::ClosedForm && std_error != 0.0) {
        throw std::invalid_argument("closed-form estimates carry no standard error");
    }
    return {value, std_error, method};
}

ConfigError::ConfigError(std::vector<Violation> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

ConfigError::ConfigError(const std::string& message)
    : std::runtime_error(message), violations_{{"", message}} {}

ConfigError ConfigError::at(std::string field, std::string message) {
    return ConfigError(std::vector<Violation>{{std::move(field), std::move(message)}});
}

std::vector<Violation> check(const SourceParams& source) {
    std::vector<Violation> out;
    require_probability(out, "source.pair_prob", source.pair_prob);
    require_probability(out, "source.herald_det_efficiency", source.herald_det_efficiency);
    require_probability(out, "source.herald_splitter_ratio", source.herald_splitter_ratio);
    require_probability(out, "source.signal_det_efficiency", source.signal_det_efficiency);
    if (!(source.rep_rate_hz > 0.0) || !std::isfinite(source.rep_rate_hz)) {
        out.push_back({"source.rep_rate_hz", "repetition rate must be positive"});
    }
    if (source.herald_deadtime_slots < 0) {
        out.push_back({"source.herald_deadtime_slots", "deadtime must be nonnegative"});
    }
    if (source.herald_deadtime_s && (!(*source.herald_deadtime_s >= 0.0) || !std::isfinite(*source.herald_deadtime_s))) {
        out.push_back({"source.herald_deadtime_s", "deadtime must be nonnegative"});
    }
    return out;
}

std::vector<Violation> check(const ConverterParams& converter) {
    std::vector<Violation> out;
    if (converter.n_modes < 1) {
        out.push_back({"converter.n_modes", "need at least one output mode"});
    }
    if (converter.strategy == Strategy::ActiveClocked && converter.n_modes < 2) {
        out.push_back({"converter.n_modes", "clocked routing needs at least two modes"});
    }
    require_probability(out, "converter.transmittance", converter.transmittance);
    if (converter.n_modes >= 1 && converter.port_efficiencies.size() != static_cast<std::size_t>(converter.n_modes)) {
        out.push_back({"converter.port_efficiencies",
                       "expected " + std::to_string(converter.n_modes) + " entries, got " +
                           std::to_string(converter.port_efficiencies.size())});
    }
    for (std::size_t i = 0; i < converter.port_efficiencies.size(); ++i) {
        if (!in_unit_interval(converter.port_efficiencies[i])) {
            out.push_back({"converter.port_efficiencies[" + std::to_string(i) + "]",
                           "probability out of range [0, 1]: " + std::to_string(converter.port_efficiencies[i])});
        }
    }
    return out;
}

std::int64_t deadtime_to_slots(double seconds, double rep_rate_hz) {
    if (!(seconds >= 0.0) || !(rep_rate_hz > 0.0)) {
        throw std::invalid_argument("deadtime and repetition rate must be nonnegative/positive");
    }
    const double slots = seconds * rep_rate_hz;
    return static_cast<std::int64_t>(std::ceil(slots - 1e-9 * std::max(1.0, slots)));
}

ValidatedConfig validate_config(SourceParams source, ConverterParams converter) {
    if (converter.port_efficiencies.empty() && converter.n_modes >= 1) {
        converter.port_efficiencies.assign(static_cast<std::size_t>(converter.n_modes), 1.0);
    }
    auto violations = check(source);
    auto converter_violations = check(converter);
    violations.insert(violations.end(), converter_violations.begin(), converter_violations.end());
    if (!violations.empty()) throw ConfigError(std::move(violations));

    if (source.herald_deadtime_s) {
        source.herald_deadtime_slots = deadtime_to_slots(*source.herald_deadtime_s, source.rep_rate_hz);
        source.herald_deadtime_s.reset();
    }
    return ValidatedConfig(std::move(source), std::move(converter));
}

}  // namespace spconv
