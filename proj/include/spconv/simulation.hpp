#pragma once

// Full pipeline per trial: source -> run detector -> converter -> counters.
// Trials are independent and use RngStream(seed, first_stream + trial);
// their counts merge additively, so results do not depend on scheduling.

#include <cstdint>
#include <span>
#include <stdexcept>

#include "spconv/config.hpp"
#include "spconv/measurement.hpp"
#include "spconv/model.hpp"
#include "spconv/rng.hpp"

namespace spconv {

class SimulationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TrialCounts {
    std::int64_t slots = 0;
    std::int64_t heralds = 0;                 // effective herald slots
    std::int64_t triggers = 0;                // n-herald runs
    std::int64_t coincidences = 0;            // n-fold coincidences on triggers
    std::int64_t calibration_heralds = 0;
    std::int64_t calibration_detections = 0;  // straight-through signal detections
    std::int64_t multi_pair_heralds = 0;
    std::int64_t routed_photons = 0;
    std::int64_t lost_photons = 0;
    std::int64_t absent_photons = 0;
    RoutingTable routing;

    void merge(const TrialCounts& other);
    bool operator==(const TrialCounts&) const = default;
};

/// Feeds an already generated slot stream through the pipeline.
TrialCounts simulate_stream(std::span<const SlotRecord> slots, const SimulationConfig& config, RngStream& rng);

/// One trial of config.run.slots slots using the sparse herald source.
TrialCounts simulate_trial(const SimulationConfig& config, std::uint64_t stream_index);

/// config.run.trials trials on streams first_stream .. first_stream+trials-1,
/// spread over `threads` workers (0: hardware concurrency).
TrialCounts simulate_trials(const SimulationConfig& config, std::uint64_t first_stream = 0, int threads = 0);

struct PipelineEstimate {
    Rates rates;
    Measured p_h1_etaD;
    EfficiencyEstimate s;
};

/// Applies the herald-normalized estimator with Poisson errors to merged
/// counts. Throws SimulationError when no trigger (or, in calibration mode,
/// no straight-through detection) was observed.
PipelineEstimate estimate_pipeline(const SimulationConfig& config, const TrialCounts& counts);

struct RunResult {
    SimulationReport report;
    TrialCounts counts;
    PipelineEstimate estimate;
};

RunResult run_pipeline(const SimulationConfig& config, std::uint64_t first_stream = 0, int threads = 0);

}  // namespace spconv
