#include "spconv/converter.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spconv {

namespace {

OutputRecord empty_record(TriggerEvent trigger) {
    const auto n = static_cast<std::size_t>(trigger.run_length);
    OutputRecord out;
    out.trigger_ref = std::move(trigger);
    out.photon_port.assign(n, kPhotonAbsent);
    out.photon_detected.assign(n, false);
    out.port_detections.assign(n, false);
    return out;
}

// Uniform choice among the n - 1 ports other than `avoid`.
int other_port(RngStream& rng, int n, int avoid) {
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    return k >= avoid ? k + 1 : k;
}

void detect(OutputRecord& out, int photon, int port, RngStream& rng, double detector_efficiency) {
    out.photon_port[static_cast<std::size_t>(photon)] = port;
    const bool registered = rng.bernoulli(detector_efficiency);
    out.photon_detected[static_cast<std::size_t>(photon)] = registered;
    if (registered && port == photon) out.port_detections[static_cast<std::size_t>(port)] = true;
}

}  // namespace

PhotonRun PhotonRun::full(std::int64_t start_slot, int length) {
    return {start_slot, std::vector<std::uint8_t>(static_cast<std::size_t>(length), 1)};
}

OutputRecord route_heralded(const TriggerEvent& trigger, const ConverterParams& params, RngStream& rng,
                            double detector_efficiency, std::span<const std::uint8_t> present) {
    if (params.strategy != Strategy::ActiveHeralded) {
        throw std::invalid_argument("route_heralded: converter is not configured for heralded routing");
    }
    if (trigger.run_length != params.n_modes) {
        throw std::invalid_argument("route_heralded: run length " + std::to_string(trigger.run_length) +
                                    " does not match n_modes " + std::to_string(params.n_modes));
    }
    const int n = params.n_modes;
    if (!present.empty() && present.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("route_heralded: presence mask length mismatch");
    }
    OutputRecord out = empty_record(trigger);
    for (int j = 0; j < n; ++j) {
        if (!present.empty() && !present[static_cast<std::size_t>(j)]) continue;
        if (!rng.bernoulli(params.transmittance)) {
            out.photon_port[static_cast<std::size_t>(j)] = kPhotonLost;
            ++out.lost_photons;
            continue;
        }
        const int target = trigger.drive_schedule.empty() ? j : trigger.drive_schedule[static_cast<std::size_t>(j)];
        int port = target;
        if (!rng.bernoulli(params.port_efficiencies[static_cast<std::size_t>(j)])) {
            if (n == 1) {
                out.photon_port[0] = kPhotonLost;
                ++out.lost_photons;
                continue;
            }
            port = other_port(rng, n, target);
        }
        detect(out, j, port, rng, detector_efficiency);
    }
    return out;
}

OutputRecord route_clocked(const PhotonRun& run, int clock_offset, const ConverterParams& params, RngStream& rng,
                           double detector_efficiency) {
    if (params.strategy != Strategy::ActiveClocked) {
        throw std::invalid_argument("route_clocked: converter is not configured for clocked routing");
    }
    const int n = params.n_modes;
    if (n < 2) throw std::invalid_argument("route_clocked: needs at least two modes");
    if (clock_offset < 0 || clock_offset >= n) {
        throw std::invalid_argument("route_clocked: clock offset " + std::to_string(clock_offset) +
                                    " outside [0, " + std::to_string(n) + ")");
    }
    if (run.size() != n) throw std::invalid_argument("route_clocked: run length does not match n_modes");

    const double eta_sw = params.switching_efficiency();
    OutputRecord out = empty_record(make_trigger(run.start_slot, n));
    for (int j = 0; j < n; ++j) {
        if (!run.present[static_cast<std::size_t>(j)]) continue;
        const int scheduled = (j + clock_offset) % n;
        const int port = rng.bernoulli(eta_sw) ? scheduled : other_port(rng, n, scheduled);
        detect(out, j, port, rng, detector_efficiency);
    }
    return out;
}

OutputRecord route_passive(const PhotonRun& run, int n_modes, RngStream& rng, double detector_efficiency) {
    if (n_modes < 1) throw std::invalid_argument("route_passive: n_modes must be >= 1");
    if (run.size() != n_modes) throw std::invalid_argument("route_passive: run length does not match n_modes");
    OutputRecord out = empty_record(make_trigger(run.start_slot, n_modes));
    for (int j = 0; j < n_modes; ++j) {
        if (!run.present[static_cast<std::size_t>(j)]) continue;
        detect(out, j, static_cast<int>(rng.below(static_cast<std::uint64_t>(n_modes))), rng, detector_efficiency);
    }
    return out;
}

int clock_offset_draw(RngStream& rng, int n) {
    if (n < 2) throw std::invalid_argument("clock_offset_draw: n must be >= 2");
    return static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
}

EfficiencyEstimate estimate_success(const ConverterParams& params, std::int64_t trials, RngStream& rng,
                                    double detector_efficiency) {
    if (trials < 1) throw std::invalid_argument("estimate_success: need at least one trial");
    const int n = params.n_modes;
    const TriggerEvent trigger = make_trigger(0, n);
    const PhotonRun run = PhotonRun::full(0, n);
    std::int64_t successes = 0;
    for (std::int64_t i = 0; i < trials; ++i) {
        OutputRecord out;
        switch (params.strategy) {
            case Strategy::ActiveHeralded:
                out = route_heralded(trigger, params, rng, detector_efficiency);
                break;
            case Strategy::ActiveClocked:
                out = route_clocked(run, clock_offset_draw(rng, n), params, rng, detector_efficiency);
                break;
            case Strategy::PassiveBeamsplitter:
                out = route_passive(run, n, rng, detector_efficiency);
                break;
        }
        if (out.coincidence()) ++successes;
    }
    const double f = static_cast<double>(successes) / static_cast<double>(trials);
    return EfficiencyEstimate::with_error(f, std::sqrt(f * (1.0 - f) / static_cast<double>(trials)),
                                          EstimateMethod::MonteCarlo);
}

}  // namespace spconv
