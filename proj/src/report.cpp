#include "spconv/report.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spconv/measurement.hpp"

namespace spconv {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

template <typename Int>
Int parse_integer(std::string_view text) {
    Int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    }
    return value;
}

json estimate_json(const EfficiencyEstimate& e) {
    return {{"value", e.value}, {"std_error", e.std_error}, {"method", std::string(to_string(e.method))}};
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return value;
}

json report_to_json(const SimulationConfig& config, const RunResult& result, bool include_timing) {
    const SimulationReport& r = result.report;
    const TrialCounts& c = result.counts;
    json out;
    out["c_n_rate"] = r.c_n_rate;
    out["c_h_rate"] = r.c_h_rate;
    out["p_h1_etaD"] = r.p_h1_etaD;
    out["p_h1_etaD_std_error"] = result.estimate.p_h1_etaD.std_error;
    out["s_estimate"] = estimate_json(r.s_estimate);
    if (config.converter().strategy == Strategy::ActiveHeralded && config.converter().transmittance > 0.0) {
        out["s_transmittance_compensated"] = estimate_json(
            compensate_transmittance(r.s_estimate, {config.converter().transmittance, 0.0}, config.converter().n_modes));
    }
    out["seed"] = r.seed;
    out["config_digest"] = r.config_digest;
    out["slots_simulated"] = r.slots_simulated;
    if (include_timing) out["wall_time_s"] = r.wall_time_s;
    out["counts"] = {
        {"heralds", c.heralds},
        {"triggers", c.triggers},
        {"coincidences", c.coincidences},
        {"calibration_heralds", c.calibration_heralds},
        {"calibration_detections", c.calibration_detections},
        {"multi_pair_heralds", c.multi_pair_heralds},
        {"routed_photons", c.routed_photons},
        {"lost_photons", c.lost_photons},
        {"absent_photons", c.absent_photons},
    };
    json routing = json::array();
    for (int i = 0; i < c.routing.n_modes(); ++i) {
        json row = json::array();
        for (int k = 0; k < c.routing.n_modes(); ++k) row.push_back(c.routing.count(i, k));
        routing.push_back(row);
    }
    out["counts"]["routing"] = routing;
    out["config"] = config_to_json(config);
    return out;
}

std::string render_json(const json& j) { return j.dump(2) + "\n"; }

StoredReport parse_report(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("report syntax error: ") + e.what());
    }
    try {
        StoredReport stored{config_from_json(root.at("config")), root.at("config_digest").get<std::string>(), {}};
        SimulationReport& r = stored.report;
        r.c_n_rate = root.at("c_n_rate").get<double>();
        r.c_h_rate = root.at("c_h_rate").get<double>();
        r.p_h1_etaD = root.at("p_h1_etaD").get<double>();
        const json& s = root.at("s_estimate");
        const auto method = parse_estimate_method(s.at("method").get<std::string>());
        if (!method) throw ConfigError("report: unknown estimate method");
        r.s_estimate = EfficiencyEstimate::with_error(s.at("value").get<double>(), s.at("std_error").get<double>(), *method);
        r.seed = root.at("seed").get<std::uint64_t>();
        r.config_digest = stored.config_digest;
        r.slots_simulated = root.at("slots_simulated").get<std::int64_t>();
        if (root.contains("wall_time_s")) r.wall_time_s = root.at("wall_time_s").get<double>();
        return stored;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report: ") + e.what());
    }
}

void write_curves_csv(std::ostream& out, const analytic::EfficiencyCurves& curves) {
    out << "n,heralded,clocked,passive\n";
    std::size_t clocked = 0;
    for (std::size_t i = 0; i < curves.heralded.points.size(); ++i) {
        const int n = curves.heralded.points[i].first;
        out << n << ',' << format_double(curves.heralded.points[i].second) << ',';
        if (clocked < curves.clocked.points.size() && curves.clocked.points[clocked].first == n) {
            out << format_double(curves.clocked.points[clocked++].second);
        }
        out << ',' << format_double(curves.passive.points.at(i).second) << '\n';
    }
}

analytic::EfficiencyCurves read_curves_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "n,heralded,clocked,passive") {
        throw std::invalid_argument("curves csv: unexpected header");
    }
    analytic::EfficiencyCurves curves{{"heralded", {}}, {"clocked", {}}, {"passive", {}}};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) throw std::invalid_argument("curves csv: expected 4 columns in '" + line + "'");
        const int n = parse_integer<int>(fields[0]);
        curves.heralded.points.emplace_back(n, parse_double(fields[1]));
        if (!fields[2].empty()) curves.clocked.points.emplace_back(n, parse_double(fields[2]));
        curves.passive.points.emplace_back(n, parse_double(fields[3]));
    }
    return curves;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        out << r.index << ',' << to_string(r.strategy) << ',' << r.n << ',' << format_double(r.eta_sw) << ','
            << format_double(r.transmittance) << ',' << format_double(r.s.value) << ',' << format_double(r.s.std_error)
            << ',' << format_double(r.c_n_rate) << ',' << format_double(r.c_h_rate) << ','
            << format_double(r.p_h1_etaD) << ',' << r.triggers << ',' << r.coincidences << ',' << r.seed << ','
            << r.config_digest << '\n';
    }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kSweepHeader) throw std::invalid_argument("sweep csv: unexpected header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 14) throw std::invalid_argument("sweep csv: expected 14 columns in '" + line + "'");
        SweepRow r;
        r.index = parse_integer<std::size_t>(f[0]);
        const auto strategy = parse_strategy(f[1]);
        if (!strategy) throw std::invalid_argument("sweep csv: unknown strategy '" + f[1] + "'");
        r.strategy = *strategy;
        r.n = parse_integer<int>(f[2]);
        r.eta_sw = parse_double(f[3]);
        r.transmittance = parse_double(f[4]);
        r.s = EfficiencyEstimate::with_error(parse_double(f[5]), parse_double(f[6]), EstimateMethod::Pipeline);
        r.c_n_rate = parse_double(f[7]);
        r.c_h_rate = parse_double(f[8]);
        r.p_h1_etaD = parse_double(f[9]);
        r.triggers = parse_integer<std::int64_t>(f[10]);
        r.coincidences = parse_integer<std::int64_t>(f[11]);
        r.seed = parse_integer<std::uint64_t>(f[12]);
        r.config_digest = f[13];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace spconv
