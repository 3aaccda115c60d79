#pragma once

// Slot-indexed heralded photon-pair source with a two-detector heralding arm.
//
// Per pump slot a pair is emitted with probability pair_prob. Its idler goes
// to detector A with probability herald_splitter_ratio (else B) and is
// registered with probability herald_det_efficiency unless that detector is
// still blind. Deadtime is non-paralyzable: a firing at slot k blinds the
// detector for slots k+1 .. k+deadtime; blocked arrivals do not extend it.

#include <cstdint>
#include <optional>
#include <vector>

#include "spconv/model.hpp"
#include "spconv/rng.hpp"

namespace spconv {

/// Dense stream: one record per slot in [0, n_slots).
std::vector<SlotRecord> generate_slots(const SourceParams& params, std::int64_t n_slots, RngStream& rng);

/// pair_prob * herald_det_efficiency (deadtime neglected).
double herald_probability(const SourceParams& params);

/// Sparse equivalent of generate_slots for long runs. Only slots where an
/// idler reaches a heralding detector with a successful detection attempt
/// are produced; the skipped slots can never herald, so triggers and their
/// photons are distributed exactly as in the dense stream. Gaps are drawn
/// geometrically, so cost scales with the number of herald attempts rather
/// than the number of slots.
class HeraldEventSource {
  public:
    HeraldEventSource(const SourceParams& params, RngStream& rng, std::int64_t end_slot);

    /// Next active slot below end_slot, in increasing slot order.
    std::optional<SlotRecord> next();

    /// Probability that a slot skipped by next() still carries a signal
    /// photon (pair emitted, idler not registered).
    double unheralded_signal_probability() const;

  private:
    void fire(SlotRecord& record);

    SourceParams params_;
    RngStream* rng_;
    std::int64_t end_slot_;
    std::int64_t cursor_ = 0;
    double attempt_prob_;
    GeometricSampler gap_;
    std::int64_t free_from_a_ = 0;
    std::int64_t free_from_b_ = 0;
};

/// Stationary per-slot statistics of the heralding arm, computed exactly
/// from the Markov chain over (blind slots left on A, on B, length of the
/// current unclaimed herald run).
struct HeraldStatistics {
    double herald_fraction = 0.0;      // P(herald_effective) per slot
    double trigger_probability = 0.0;  // P(a greedy n-run completes) per slot
};

HeraldStatistics stationary_herald_statistics(const SourceParams& params, int run_length);

/// Expected C_h(n) in counts per second.
double expected_trigger_rate_hz(const SourceParams& params, int run_length);

/// pair_prob giving the requested C_h(n), by bisection on [0, 1]. Throws
/// std::invalid_argument when even pair_prob = 1 falls short.
double solve_pair_prob_for_trigger_rate(SourceParams params, int run_length, double target_rate_hz);

}  // namespace spconv
