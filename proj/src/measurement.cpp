#include "spconv/measurement.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spconv {

namespace {

double relative(const Measured& m) { return m.value == 0.0 ? 0.0 : m.std_error / std::abs(m.value); }

}  // namespace

Rates count_rates(std::span<const OutputRecord> outputs, std::span<const TriggerEvent> triggers,
                  std::int64_t slots_simulated, double rep_rate_hz) {
    std::int64_t coincidences = 0;
    for (const auto& out : outputs) {
        if (out.coincidence()) ++coincidences;
    }
    return count_rates(coincidences, static_cast<std::int64_t>(triggers.size()), slots_simulated, rep_rate_hz);
}

Rates count_rates(std::int64_t coincidences, std::int64_t triggers, std::int64_t slots_simulated, double rep_rate_hz) {
    if (slots_simulated <= 0) throw std::invalid_argument("count_rates: no slots simulated");
    if (coincidences > triggers) throw std::invalid_argument("count_rates: more coincidences than triggers");
    const double per_slot = rep_rate_hz / static_cast<double>(slots_simulated);
    return {static_cast<double>(coincidences) * per_slot, static_cast<double>(triggers) * per_slot};
}

EfficiencyEstimate estimate_s(double c_n_rate, double c_h_rate, double p_h1_etaD, int n) {
    return estimate_s(Measured{c_n_rate, 0.0}, Measured{c_h_rate, 0.0}, Measured{p_h1_etaD, 0.0}, n);
}

EfficiencyEstimate estimate_s(Measured c_n_rate, Measured c_h_rate, Measured p_h1_etaD, int n) {
    if (n < 1) throw std::invalid_argument("estimate_s: n must be >= 1");
    if (!(c_h_rate.value > 0.0)) throw std::invalid_argument("estimate_s: zero herald rate");
    if (!(p_h1_etaD.value > 0.0)) throw std::invalid_argument("estimate_s: zero herald-to-detection probability");
    const double value = (c_n_rate.value / c_h_rate.value) / std::pow(p_h1_etaD.value, n);
    const double rel = std::hypot(relative(c_n_rate), relative(c_h_rate), n * relative(p_h1_etaD));
    return EfficiencyEstimate::with_error(value, std::abs(value) * rel, EstimateMethod::Pipeline);
}

EfficiencyEstimate compensate_transmittance(const EfficiencyEstimate& s, Measured transmittance, int n) {
    if (!(transmittance.value > 0.0)) throw std::invalid_argument("compensate_transmittance: zero transmittance");
    if (n < 1) throw std::invalid_argument("compensate_transmittance: n must be >= 1");
    const double value = s.value / std::pow(transmittance.value, n);
    const double rel = std::hypot(relative({s.value, s.std_error}), n * relative(transmittance));
    if (s.method == EstimateMethod::ClosedForm && rel == 0.0) return EfficiencyEstimate::closed_form(value);
    const auto method = s.method == EstimateMethod::ClosedForm ? EstimateMethod::Pipeline : s.method;
    return EfficiencyEstimate::with_error(value, std::abs(value) * rel, method);
}

RoutingTable::RoutingTable(int n_modes) : n_(n_modes), counts_(static_cast<std::size_t>(n_modes * n_modes), 0) {
    if (n_modes < 0) throw std::invalid_argument("RoutingTable: negative size");
}

void RoutingTable::add(const OutputRecord& output) {
    if (output.run_length() != n_) throw std::invalid_argument("RoutingTable: record size mismatch");
    for (int j = 0; j < n_; ++j) {
        const int port = output.photon_port[static_cast<std::size_t>(j)];
        if (port >= 0 && output.photon_detected[static_cast<std::size_t>(j)]) {
            ++counts_[static_cast<std::size_t>(j * n_ + port)];
        }
    }
}

void RoutingTable::merge(const RoutingTable& other) {
    if (other.n_ != n_) throw std::invalid_argument("RoutingTable: merge size mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t RoutingTable::count(int photon, int port) const {
    return counts_.at(static_cast<std::size_t>(photon * n_ + port));
}

std::int64_t RoutingTable::detections_of(int photon) const {
    std::int64_t total = 0;
    for (int k = 0; k < n_; ++k) total += count(photon, k);
    return total;
}

std::vector<std::vector<double>> RoutingTable::probabilities() const {
    std::vector<std::vector<double>> table(static_cast<std::size_t>(n_), std::vector<double>(static_cast<std::size_t>(n_), 0.0));
    for (int i = 0; i < n_; ++i) {
        const auto total = detections_of(i);
        if (total == 0) continue;
        for (int k = 0; k < n_; ++k) {
            table[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                static_cast<double>(count(i, k)) / static_cast<double>(total);
        }
    }
    return table;
}

std::vector<Measured> estimate_routing_efficiencies(const RoutingTable& table, std::span<const double> corrections) {
    const int n = table.n_modes();
    if (!corrections.empty() && corrections.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("estimate_routing_efficiencies: one correction factor per port expected");
    }
    std::vector<Measured> result;
    result.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto total = table.detections_of(i);
        if (total == 0) {
            throw std::invalid_argument("estimate_routing_efficiencies: photon " + std::to_string(i) +
                                        " was never detected");
        }
        const double correction = corrections.empty() ? 1.0 : corrections[static_cast<std::size_t>(i)];
        if (!(correction > 0.0)) throw std::invalid_argument("estimate_routing_efficiencies: correction must be positive");
        const double eta = static_cast<double>(table.count(i, i)) / static_cast<double>(total);
        const double se = std::sqrt(eta * (1.0 - eta) / static_cast<double>(total));
        result.push_back({eta / correction, se / correction});
    }
    return result;
}

double poisson_relative_error(double count) {
    if (!(count > 0.0)) throw std::invalid_argument("poisson_relative_error: count must be positive");
    return 1.0 / std::sqrt(count);
}

double propagate_counting_uncertainty(std::span<const CountInput> inputs, Formula formula, int n) {
    const std::size_t expected = formula == Formula::Quotient ? 2 : 3;
    if (inputs.size() != expected) {
        throw std::invalid_argument("propagate_counting_uncertainty: expected " + std::to_string(expected) + " inputs");
    }
    std::vector<double> rel;
    for (const auto& in : inputs) {
        if (!(in.value > 0.0)) throw std::invalid_argument("propagate_counting_uncertainty: nonpositive count");
        rel.push_back(in.std_error ? *in.std_error / in.value : poisson_relative_error(in.value));
    }
    if (formula == Formula::Quotient) {
        return inputs[0].value / inputs[1].value * std::hypot(rel[0], rel[1]);
    }
    if (n < 1) throw std::invalid_argument("propagate_counting_uncertainty: n must be >= 1");
    const double value = inputs[0].value / inputs[1].value / std::pow(inputs[2].value, n);
    return value * std::hypot(rel[0], rel[1], n * rel[2]);
}

}  // namespace spconv
