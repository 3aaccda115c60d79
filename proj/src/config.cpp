#include "spconv/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace spconv {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError::at(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError::at(path.empty() ? key : path + "." + key, "unknown key");
        }
    }
}

std::string join_path(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& obj, const std::string& path, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError::at(join_path(path, key), "expected a number");
    return v.get<double>();
}

double require_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError::at(join_path(path, key), "missing required key");
    return get_number(obj, path, key, 0.0);
}

template <typename Int>
Int get_integer(const json& obj, const std::string& path, const std::string& key, Int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number_integer()) {
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.is_number_unsigned()) return v.get<Int>();
            throw ConfigError::at(join_path(path, key), "expected a nonnegative integer");
        } else {
            if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
                throw ConfigError::at(join_path(path, key), "integer too large");
            }
            const auto wide = v.get<std::int64_t>();
            if (wide < std::numeric_limits<Int>::min() || wide > std::numeric_limits<Int>::max()) {
                throw ConfigError::at(join_path(path, key), "integer out of range");
            }
            return static_cast<Int>(wide);
        }
    }
    // Accept integral floats such as 1e10 for slot counts.
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && d >= static_cast<double>(std::numeric_limits<Int>::min()) &&
            d <= static_cast<double>(std::numeric_limits<Int>::max())) {
            return static_cast<Int>(d);
        }
    }
    throw ConfigError::at(join_path(path, key), "expected an integer");
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError::at(join_path(path, key), "expected true or false");
    return v.get<bool>();
}

Strategy to_strategy(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError::at(path, "expected a strategy name");
    auto parsed = parse_strategy(v.get<std::string>());
    if (!parsed) throw ConfigError::at(path, "unknown strategy '" + v.get<std::string>() + "' (heralded|clocked|passive)");
    return *parsed;
}

const json& section(const json& root, const std::string& key) {
    static const json empty = json::object();
    return root.contains(key) ? root.at(key) : empty;
}

template <typename T, typename Convert>
std::vector<T> get_list(const json& obj, const std::string& path, const std::string& key, Convert convert) {
    std::vector<T> out;
    if (!obj.contains(key)) return out;
    const json& v = obj.at(key);
    const std::string here = join_path(path, key);
    if (!v.is_array()) throw ConfigError::at(here, "expected a list");
    if (v.empty()) throw ConfigError::at(here, "empty grid dimension");
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], here + "[" + std::to_string(i) + "]"));
    return out;
}

SweepGrid parse_sweep(const json& root) {
    SweepGrid grid;
    if (!root.contains("sweep")) return grid;
    const json& s = root.at("sweep");
    reject_unknown(s, "sweep", {"strategy", "n", "eta_sw", "transmittance"});
    grid.strategy = get_list<Strategy>(s, "sweep", "strategy", to_strategy);
    grid.n = get_list<int>(s, "sweep", "n", [](const json& v, const std::string& p) {
        if (!v.is_number_integer()) throw ConfigError::at(p, "expected an integer");
        return v.get<int>();
    });
    auto number = [](const json& v, const std::string& p) {
        if (!v.is_number()) throw ConfigError::at(p, "expected a number");
        return v.get<double>();
    };
    grid.eta_sw = get_list<double>(s, "sweep", "eta_sw", number);
    grid.transmittance = get_list<double>(s, "sweep", "transmittance", number);
    if (!grid.has_dimensions()) throw ConfigError::at("sweep", "empty grid");
    return grid;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace

SimulationConfig config_from_json(const json& root) {
    reject_unknown(root, "", {"source", "converter", "controller", "run", "sweep"});

    const json& src = section(root, "source");
    reject_unknown(src, "source",
                   {"pair_prob", "rep_rate_hz", "herald_det_efficiency", "herald_deadtime_s", "herald_deadtime_slots",
                    "herald_splitter_ratio", "signal_det_efficiency", "multi_pair_enabled"});
    SourceParams source;
    source.pair_prob = require_number(src, "source", "pair_prob");
    source.rep_rate_hz = require_number(src, "source", "rep_rate_hz");
    source.herald_det_efficiency = get_number(src, "source", "herald_det_efficiency", source.herald_det_efficiency);
    if (src.contains("herald_deadtime_s") && src.contains("herald_deadtime_slots")) {
        throw ConfigError::at("source.herald_deadtime_s", "give either herald_deadtime_s or herald_deadtime_slots");
    }
    source.herald_deadtime_slots = get_integer<std::int64_t>(src, "source", "herald_deadtime_slots", 0);
    if (src.contains("herald_deadtime_s")) source.herald_deadtime_s = get_number(src, "source", "herald_deadtime_s", 0.0);
    source.herald_splitter_ratio = get_number(src, "source", "herald_splitter_ratio", source.herald_splitter_ratio);
    source.signal_det_efficiency = get_number(src, "source", "signal_det_efficiency", source.signal_det_efficiency);
    source.multi_pair_enabled = get_bool(src, "source", "multi_pair_enabled", false);

    const json& conv = section(root, "converter");
    reject_unknown(conv, "converter", {"n_modes", "strategy", "transmittance", "port_efficiencies"});
    ConverterParams converter;
    if (!conv.contains("n_modes")) throw ConfigError::at("converter.n_modes", "missing required key");
    converter.n_modes = get_integer<int>(conv, "converter", "n_modes", 0);
    if (conv.contains("strategy")) converter.strategy = to_strategy(conv.at("strategy"), "converter.strategy");
    converter.transmittance = get_number(conv, "converter", "transmittance", 1.0);
    converter.port_efficiencies.clear();
    if (conv.contains("port_efficiencies")) {
        const json& list = conv.at("port_efficiencies");
        if (!list.is_array()) throw ConfigError::at("converter.port_efficiencies", "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!list[i].is_number()) {
                throw ConfigError::at("converter.port_efficiencies[" + std::to_string(i) + "]", "expected a number");
            }
            converter.port_efficiencies.push_back(list[i].get<double>());
        }
    }

    const json& ctl = section(root, "controller");
    reject_unknown(ctl, "controller", {"delay_offset_slots"});
    ControllerParams controller{get_integer<std::int64_t>(ctl, "controller", "delay_offset_slots", 0)};

    const json& run_json = section(root, "run");
    reject_unknown(run_json, "run", {"seed", "slots", "trials", "calibration_mode"});
    RunControls run;
    run.seed = get_integer<std::uint64_t>(run_json, "run", "seed", run.seed);
    run.slots = get_integer<std::int64_t>(run_json, "run", "slots", run.slots);
    run.trials = get_integer<int>(run_json, "run", "trials", run.trials);
    run.calibration_mode = get_bool(run_json, "run", "calibration_mode", run.calibration_mode);
    std::vector<Violation> run_violations;
    if (run.slots < 1) run_violations.push_back({"run.slots", "must be >= 1"});
    if (run.trials < 1) run_violations.push_back({"run.trials", "must be >= 1"});
    if (!run_violations.empty()) throw ConfigError(std::move(run_violations));

    return SimulationConfig{validate_config(std::move(source), std::move(converter)), controller, run};
}

LoadedConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("syntax error: ") + e.what());
    }
    LoadedConfig loaded{config_from_json(root), parse_sweep(root)};
    return loaded;
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::system_error(errno, std::generic_category(), "cannot open config " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str());
    } catch (const ConfigError& e) {
        auto violations = e.violations();
        for (auto& v : violations) v.field = path.filename().string() + (v.field.empty() ? "" : ": " + v.field);
        throw ConfigError(std::move(violations));
    }
}

nlohmann::json config_to_json(const SimulationConfig& config) {
    const SourceParams& s = config.source();
    const ConverterParams& c = config.converter();
    json out;
    out["source"] = {
        {"pair_prob", s.pair_prob},
        {"rep_rate_hz", s.rep_rate_hz},
        {"herald_det_efficiency", s.herald_det_efficiency},
        {"herald_deadtime_slots", s.herald_deadtime_slots},
        {"herald_splitter_ratio", s.herald_splitter_ratio},
        {"signal_det_efficiency", s.signal_det_efficiency},
        {"multi_pair_enabled", s.multi_pair_enabled},
    };
    out["converter"] = {
        {"n_modes", c.n_modes},
        {"strategy", std::string(to_string(c.strategy))},
        {"transmittance", c.transmittance},
        {"port_efficiencies", c.port_efficiencies},
    };
    out["controller"] = {{"delay_offset_slots", config.controller.delay_offset_slots}};
    out["run"] = {
        {"seed", config.run.seed},
        {"slots", config.run.slots},
        {"trials", config.run.trials},
        {"calibration_mode", config.run.calibration_mode},
    };
    return out;
}

std::string config_digest(const SimulationConfig& config) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(config).dump())));
    return hex;
}

}  // namespace spconv
