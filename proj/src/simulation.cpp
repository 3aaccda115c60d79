#include "spconv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "spconv/controller.hpp"
#include "spconv/converter.hpp"
#include "spconv/source.hpp"

namespace spconv {

namespace {

// Routes triggers through the configured converter and folds the outcome
// into the counters.
class TriggerRouter {
  public:
    TriggerRouter(const SimulationConfig& config, TrialCounts& counts) : config_(config), counts_(counts) {}

    void on_herald(const SlotRecord& rec) {
        if (!rec.herald_effective) return;
        ++counts_.heralds;
        if (rec.signal_photons > 1) ++counts_.multi_pair_heralds;
        if (config_.run.calibration_mode && rec.signal_present) ++pending_calibration_;
        if (config_.run.calibration_mode) ++counts_.calibration_heralds;
    }

    // Straight-through detections of the heralded photons seen so far. Each
    // is an independent Bernoulli(eta_D) trial, so their sum is drawn as one
    // binomial variate.
    void finish_calibration(RngStream& rng) {
        if (pending_calibration_ > 0) {
            std::binomial_distribution<std::int64_t> detections(pending_calibration_,
                                                                config_.source().signal_det_efficiency);
            counts_.calibration_detections += detections(rng);
        }
        pending_calibration_ = 0;
    }

    void route(const TriggerEvent& trigger, std::span<const std::uint8_t> present, RngStream& rng) {
        const ConverterParams& conv = config_.converter();
        const double eta_d = config_.source().signal_det_efficiency;
        const std::int64_t first_signal = trigger.start_slot + config_.controller.delay_offset_slots;
        OutputRecord out;
        switch (conv.strategy) {
            case Strategy::ActiveHeralded:
                out = route_heralded(trigger, conv, rng, eta_d, present);
                break;
            case Strategy::ActiveClocked: {
                // The divided pump clock sends the photon in signal slot x to
                // port x mod n, so the run's phase is fixed by its first slot.
                const std::int64_t n = conv.n_modes;
                const int offset = static_cast<int>(((first_signal % n) + n) % n);
                out = route_clocked({first_signal, {present.begin(), present.end()}}, offset, conv, rng, eta_d);
                break;
            }
            case Strategy::PassiveBeamsplitter:
                out = route_passive({first_signal, {present.begin(), present.end()}}, conv.n_modes, rng, eta_d);
                break;
        }
        ++counts_.triggers;
        if (out.coincidence()) ++counts_.coincidences;
        counts_.routing.add(out);
        counts_.lost_photons += out.lost_photons;
        counts_.absent_photons += out.absent_photons();
        counts_.routed_photons += out.routed_photons();
    }

  private:
    const SimulationConfig& config_;
    TrialCounts& counts_;
    std::int64_t pending_calibration_ = 0;
};

TrialCounts fresh_counts(const SimulationConfig& config, std::int64_t slots) {
    TrialCounts counts;
    counts.slots = slots;
    counts.routing = RoutingTable(config.converter().n_modes);
    return counts;
}

}  // namespace

void TrialCounts::merge(const TrialCounts& other) {
    slots += other.slots;
    heralds += other.heralds;
    triggers += other.triggers;
    coincidences += other.coincidences;
    calibration_heralds += other.calibration_heralds;
    calibration_detections += other.calibration_detections;
    multi_pair_heralds += other.multi_pair_heralds;
    routed_photons += other.routed_photons;
    lost_photons += other.lost_photons;
    absent_photons += other.absent_photons;
    if (routing.n_modes() == 0) {
        routing = other.routing;
    } else {
        routing.merge(other.routing);
    }
}

TrialCounts simulate_stream(std::span<const SlotRecord> slots, const SimulationConfig& config, RngStream& rng) {
    const int n = config.converter().n_modes;
    const std::int64_t offset = config.controller.delay_offset_slots;
    TrialCounts counts = fresh_counts(config, static_cast<std::int64_t>(slots.size()));
    TriggerRouter router(config, counts);
    RunDetector detector(n);
    std::vector<std::uint8_t> present(static_cast<std::size_t>(n));
    const auto size = static_cast<std::int64_t>(slots.size());

    for (const auto& rec : slots) {
        router.on_herald(rec);
        auto trigger = detector.push(rec);
        if (!trigger) continue;
        for (int j = 0; j < n; ++j) {
            const std::int64_t x = trigger->start_slot + offset + j;
            present[static_cast<std::size_t>(j)] = x >= 0 && x < size && slots[static_cast<std::size_t>(x)].signal_present;
        }
        router.route(*trigger, present, rng);
    }
    router.finish_calibration(rng);
    return counts;
}

TrialCounts simulate_trial(const SimulationConfig& config, std::uint64_t stream_index) {
    const SourceParams& source = config.source();
    const int n = config.converter().n_modes;
    const std::int64_t end_slot = config.run.slots;
    const std::int64_t offset = config.controller.delay_offset_slots;

    RngStream rng(config.run.seed, stream_index);
    TrialCounts counts = fresh_counts(config, end_slot);
    TriggerRouter router(config, counts);
    RunDetector detector(n);
    HeraldEventSource events(source, rng, end_slot);
    std::vector<std::uint8_t> present(static_cast<std::size_t>(n), 1);

    if (offset == 0) {
        // Trigger slots are herald slots, and every herald slot carries its
        // signal photon.
        while (auto rec = events.next()) {
            router.on_herald(*rec);
            if (auto trigger = detector.push(*rec)) router.route(*trigger, present, rng);
        }
        router.finish_calibration(rng);
        return counts;
    }

    // Misaligned delay: the routers see signal slots that may not be herald
    // slots. Recent active slots are kept so the routed window can be
    // resolved once the source has moved past it; slots the sparse source
    // skipped carry an unheralded photon with the conditional probability.
    const double skipped_signal = events.unheralded_signal_probability();
    std::deque<SlotRecord> history;
    std::deque<TriggerEvent> pending;

    auto signal_at = [&](std::int64_t x) -> bool {
        if (x < 0 || x >= end_slot) return false;
        auto it = std::lower_bound(history.begin(), history.end(), x,
                                   [](const SlotRecord& r, std::int64_t s) { return r.slot_index < s; });
        if (it != history.end() && it->slot_index == x) return it->signal_present;
        return rng.bernoulli(skipped_signal);
    };
    auto flush = [&](std::int64_t known_up_to) {
        while (!pending.empty() && pending.front().start_slot + offset + n - 1 <= known_up_to) {
            const TriggerEvent& t = pending.front();
            for (int j = 0; j < n; ++j) present[static_cast<std::size_t>(j)] = signal_at(t.start_slot + offset + j);
            router.route(t, present, rng);
            pending.pop_front();
        }
    };

    const std::int64_t horizon = std::abs(offset) + 2 * static_cast<std::int64_t>(n);
    while (auto rec = events.next()) {
        const std::int64_t now = rec->slot_index;
        // Everything strictly before `now` is settled.
        flush(now - 1);
        history.push_back(*rec);
        router.on_herald(*rec);
        if (auto trigger = detector.push(*rec)) pending.push_back(std::move(*trigger));
        flush(now);
        std::int64_t keep_from = now - horizon;
        if (!pending.empty()) keep_from = std::min(keep_from, pending.front().start_slot + offset);
        while (!history.empty() && history.front().slot_index < keep_from) history.pop_front();
    }
    flush(std::numeric_limits<std::int64_t>::max() / 2);
    router.finish_calibration(rng);
    return counts;
}

TrialCounts simulate_trials(const SimulationConfig& config, std::uint64_t first_stream, int threads) {
    const int trials = config.run.trials;
    std::vector<TrialCounts> results(static_cast<std::size_t>(trials));
    int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, trials);

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int i = next++; i < trials; i = next++) {
            try {
                results[static_cast<std::size_t>(i)] = simulate_trial(config, first_stream + static_cast<std::uint64_t>(i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    TrialCounts total = fresh_counts(config, 0);
    for (const auto& r : results) total.merge(r);
    return total;
}

PipelineEstimate estimate_pipeline(const SimulationConfig& config, const TrialCounts& counts) {
    if (counts.triggers == 0) {
        throw SimulationError("no " + std::to_string(config.converter().n_modes) +
                              "-herald trigger observed; increase slots or the herald probability");
    }
    const double rep = config.source().rep_rate_hz;
    const Rates rates = count_rates(counts.coincidences, counts.triggers, counts.slots, rep);
    const double per_count = rep / static_cast<double>(counts.slots);

    Measured p{config.source().signal_det_efficiency, 0.0};
    if (config.run.calibration_mode) {
        if (counts.calibration_detections == 0) {
            throw SimulationError("calibration observed no straight-through signal detection");
        }
        const auto det = static_cast<double>(counts.calibration_detections);
        const auto her = static_cast<double>(counts.calibration_heralds);
        const CountInput inputs[] = {{det, std::nullopt}, {her, std::nullopt}};
        p = {det / her, propagate_counting_uncertainty(inputs, Formula::Quotient)};
    }
    // A zero count still carries the resolution of one count.
    const double coincidence_error = std::sqrt(std::max<double>(1.0, static_cast<double>(counts.coincidences))) * per_count;
    const Measured c_n{rates.c_n_rate, coincidence_error};
    const Measured c_h{rates.c_h_rate, std::sqrt(static_cast<double>(counts.triggers)) * per_count};
    EfficiencyEstimate s = estimate_s(c_n, c_h, p, config.converter().n_modes);
    if (counts.coincidences == 0) {
        // Relative propagation collapses at zero; use the absolute error.
        s.std_error = (coincidence_error / rates.c_h_rate) / std::pow(p.value, config.converter().n_modes);
    }
    return {rates, p, s};
}

RunResult run_pipeline(const SimulationConfig& config, std::uint64_t first_stream, int threads) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    result.counts = simulate_trials(config, first_stream, threads);
    result.estimate = estimate_pipeline(config, result.counts);
    const auto stop = std::chrono::steady_clock::now();

    SimulationReport& report = result.report;
    report.c_n_rate = result.estimate.rates.c_n_rate;
    report.c_h_rate = result.estimate.rates.c_h_rate;
    report.p_h1_etaD = result.estimate.p_h1_etaD.value;
    report.s_estimate = result.estimate.s;
    report.seed = config.run.seed;
    report.config_digest = config_digest(config);
    report.slots_simulated = result.counts.slots;
    report.wall_time_s = std::chrono::duration<double>(stop - start).count();
    return result;
}

}  // namespace spconv
