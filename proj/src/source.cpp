#include "spconv/source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spconv {

namespace {

// Registers an idler arriving at a detector. Returns true when it fires.
bool try_fire(std::int64_t slot, std::int64_t deadtime, std::int64_t& free_from) {
    if (slot < free_from) return false;
    free_from = slot + deadtime + 1;
    return true;
}

}  // namespace

std::vector<SlotRecord> generate_slots(const SourceParams& params, std::int64_t n_slots, RngStream& rng) {
    if (n_slots < 1) throw std::invalid_argument("generate_slots: n_slots must be >= 1");
    std::vector<SlotRecord> slots(static_cast<std::size_t>(n_slots));
    std::int64_t free_from_a = 0;
    std::int64_t free_from_b = 0;
    for (std::int64_t i = 0; i < n_slots; ++i) {
        SlotRecord& rec = slots[static_cast<std::size_t>(i)];
        rec.slot_index = i;
        if (!rng.bernoulli(params.pair_prob)) continue;
        rec.signal_present = true;
        rec.signal_photons = 1;
        if (params.multi_pair_enabled && rng.bernoulli(params.pair_prob)) rec.signal_photons = 2;
        const bool to_a = rng.bernoulli(params.herald_splitter_ratio);
        if (!rng.bernoulli(params.herald_det_efficiency)) continue;
        if (to_a) {
            rec.herald_a_fired = try_fire(i, params.herald_deadtime_slots, free_from_a);
        } else {
            rec.herald_b_fired = try_fire(i, params.herald_deadtime_slots, free_from_b);
        }
        rec.herald_effective = rec.herald_a_fired || rec.herald_b_fired;
    }
    return slots;
}

double herald_probability(const SourceParams& params) { return params.pair_prob * params.herald_det_efficiency; }

HeraldEventSource::HeraldEventSource(const SourceParams& params, RngStream& rng, std::int64_t end_slot)
    : params_(params),
      rng_(&rng),
      end_slot_(end_slot),
      attempt_prob_(herald_probability(params)),
      gap_(attempt_prob_) {}

std::optional<SlotRecord> HeraldEventSource::next() {
    if (cursor_ >= end_slot_) return std::nullopt;
    const std::uint64_t gap = gap_(*rng_);
    if (gap >= static_cast<std::uint64_t>(end_slot_ - cursor_)) {
        cursor_ = end_slot_;
        return std::nullopt;
    }
    SlotRecord rec;
    rec.slot_index = cursor_ + static_cast<std::int64_t>(gap);
    cursor_ = rec.slot_index + 1;
    rec.signal_present = true;
    rec.signal_photons = 1;
    if (params_.multi_pair_enabled && rng_->bernoulli(params_.pair_prob)) rec.signal_photons = 2;
    fire(rec);
    return rec;
}

void HeraldEventSource::fire(SlotRecord& rec) {
    if (rng_->bernoulli(params_.herald_splitter_ratio)) {
        rec.herald_a_fired = try_fire(rec.slot_index, params_.herald_deadtime_slots, free_from_a_);
    } else {
        rec.herald_b_fired = try_fire(rec.slot_index, params_.herald_deadtime_slots, free_from_b_);
    }
    rec.herald_effective = rec.herald_a_fired || rec.herald_b_fired;
}

double HeraldEventSource::unheralded_signal_probability() const {
    if (attempt_prob_ >= 1.0) return 0.0;
    return params_.pair_prob * (1.0 - params_.herald_det_efficiency) / (1.0 - attempt_prob_);
}

HeraldStatistics stationary_herald_statistics(const SourceParams& params, int run_length) {
    if (run_length < 1) throw std::invalid_argument("run_length must be >= 1");
    const std::int64_t d = params.herald_deadtime_slots;
    const std::size_t blind_states = static_cast<std::size_t>(d + 1);
    const std::size_t n = static_cast<std::size_t>(run_length);
    const std::size_t state_count = blind_states * blind_states * n;
    if (d < 0 || state_count > 2'000'000) {
        throw std::invalid_argument("deadtime too large for the exact herald chain");
    }
    auto index = [&](std::size_t a, std::size_t b, std::size_t k) { return (a * blind_states + b) * n + k; };
    auto decay = [](std::size_t x) { return x == 0 ? std::size_t{0} : x - 1; };

    const double q = herald_probability(params);
    const double r = params.herald_splitter_ratio;
    const std::size_t full = static_cast<std::size_t>(d);

    std::vector<double> dist(state_count, 0.0);
    std::vector<double> next(state_count, 0.0);
    dist[index(0, 0, 0)] = 1.0;
    HeraldStatistics stats;

    for (int iter = 0; iter < 200'000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double herald = 0.0;
        double trigger = 0.0;
        for (std::size_t a = 0; a < blind_states; ++a) {
            for (std::size_t b = 0; b < blind_states; ++b) {
                for (std::size_t k = 0; k < n; ++k) {
                    const double mass = dist[index(a, b, k)];
                    if (mass == 0.0) continue;
                    const std::size_t after_herald = (k + 1 == n) ? 0 : k + 1;
                    // no detection attempt this slot
                    next[index(decay(a), decay(b), 0)] += mass * (1.0 - q);
                    // attempt on A
                    const double on_a = mass * q * r;
                    if (a == 0) {
                        next[index(full, decay(b), after_herald)] += on_a;
                        herald += on_a;
                        if (k + 1 == n) trigger += on_a;
                    } else {
                        next[index(decay(a), decay(b), 0)] += on_a;
                    }
                    // attempt on B
                    const double on_b = mass * q * (1.0 - r);
                    if (b == 0) {
                        next[index(decay(a), full, after_herald)] += on_b;
                        herald += on_b;
                        if (k + 1 == n) trigger += on_b;
                    } else {
                        next[index(decay(a), decay(b), 0)] += on_b;
                    }
                }
            }
        }
        double change = 0.0;
        for (std::size_t i = 0; i < state_count; ++i) change += std::abs(next[i] - dist[i]);
        dist.swap(next);
        stats = {herald, trigger};
        if (change < 1e-15) break;
    }
    return stats;
}

double expected_trigger_rate_hz(const SourceParams& params, int run_length) {
    return stationary_herald_statistics(params, run_length).trigger_probability * params.rep_rate_hz;
}

double solve_pair_prob_for_trigger_rate(SourceParams params, int run_length, double target_rate_hz) {
    if (!(target_rate_hz > 0.0)) throw std::invalid_argument("target rate must be positive");
    params.pair_prob = 1.0;
    if (expected_trigger_rate_hz(params, run_length) < target_rate_hz) {
        throw std::invalid_argument("target trigger rate unreachable with these detector settings");
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        params.pair_prob = mid;
        if (expected_trigger_rate_hz(params, run_length) < target_rate_hz) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace spconv
