#pragma once

// Monte-Carlo routing of a photon run through the converter under the three
// strategies. Photon j is designated for port j; a port "detects" only when
// its own photon arrives there and is registered, which is what a
// time-aligned n-fold coincidence sees after the delay lines.

#include <cstdint>
#include <span>
#include <vector>

#include "spconv/model.hpp"
#include "spconv/rng.hpp"

namespace spconv {

/// Signal slots handed to the converter; present[j] says whether slot
/// start_slot + j actually carries a photon.
struct PhotonRun {
    std::int64_t start_slot = 0;
    std::vector<std::uint8_t> present;

    static PhotonRun full(std::int64_t start_slot, int length);
    int size() const { return static_cast<int>(present.size()); }
};

/// Herald-driven routers. Each present photon is lost with probability
/// 1 - t; a survivor takes its scheduled port with probability eta_j and
/// otherwise one of the other ports uniformly. With a single mode a misroute
/// leaves the converter and counts as lost. Detection is thinned by
/// detector_efficiency. An empty `present` means every photon is there.
OutputRecord route_heralded(const TriggerEvent& trigger, const ConverterParams& params, RngStream& rng,
                            double detector_efficiency = 1.0, std::span<const std::uint8_t> present = {});

/// Pump-clocked routers. Photon j is scheduled for port (j + clock_offset)
/// mod n and reaches it with probability eta_sw (the composite switching
/// efficiency), else each other port with (1 - eta_sw)/(n - 1). No separate
/// transmittance loss.
OutputRecord route_clocked(const PhotonRun& run, int clock_offset, const ConverterParams& params, RngStream& rng,
                           double detector_efficiency = 1.0);

/// Lossless balanced splitter tree: every photon picks a port uniformly.
OutputRecord route_passive(const PhotonRun& run, int n_modes, RngStream& rng, double detector_efficiency = 1.0);

/// Phase of the photon run relative to the divided pump clock, uniform in
/// [0, n).
int clock_offset_draw(RngStream& rng, int n);

/// Routes `trials` full runs of n_modes photons with the configured
/// strategy (clocked runs draw their offset per trial) and returns the
/// fraction that produce an n-fold coincidence.
EfficiencyEstimate estimate_success(const ConverterParams& params, std::int64_t trials, RngStream& rng,
                                    double detector_efficiency = 1.0);

}  // namespace spconv
