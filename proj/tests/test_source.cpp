#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spconv/controller.hpp"
#include "spconv/source.hpp"

namespace spconv {
namespace {

SourceParams params(double pair_prob, double eff, std::int64_t deadtime, double ratio = 0.5) {
    SourceParams p;
    p.pair_prob = pair_prob;
    p.herald_det_efficiency = eff;
    p.herald_deadtime_slots = deadtime;
    p.herald_splitter_ratio = ratio;
    return p;
}

// Stationary herald fraction of two detectors with d-slot deadtime, from the
// distribution of their remaining blind slots alone. Iterated to a fixed
// point; independent of the library's chain, which also tracks run length.
double herald_fraction_oracle(double q, double ratio, int d) {
    const int m = d + 1;
    std::vector<double> pi(static_cast<std::size_t>(m * m), 0.0);
    pi[0] = 1.0;
    auto at = [m](int a, int b) { return static_cast<std::size_t>(a * m + b); };
    auto dec = [](int x) { return x > 0 ? x - 1 : 0; };
    double fraction = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        std::vector<double> next(pi.size(), 0.0);
        double f = 0.0;
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const double w = pi[at(a, b)];
                next[at(dec(a), dec(b))] += w * (1 - q);
                const double wa = w * q * ratio;
                const double wb = w * q * (1 - ratio);
                if (a == 0) {
                    next[at(d, dec(b))] += wa;
                    f += wa;
                } else {
                    next[at(dec(a), dec(b))] += wa;
                }
                if (b == 0) {
                    next[at(dec(a), d)] += wb;
                    f += wb;
                } else {
                    next[at(dec(a), dec(b))] += wb;
                }
            }
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < pi.size(); ++i) diff += std::abs(next[i] - pi[i]);
        pi.swap(next);
        fraction = f;
        if (diff < 1e-16) break;
    }
    return fraction;
}

// Mean and standard error from batch means (slot outcomes are correlated
// through the deadtime).
struct BatchMean {
    double mean;
    double se;
};

BatchMean batch_mean(const std::vector<double>& batches) {
    double sum = 0.0;
    double sq = 0.0;
    for (double b : batches) {
        sum += b;
        sq += b * b;
    }
    const double k = static_cast<double>(batches.size());
    const double mean = sum / k;
    const double var = (sq - k * mean * mean) / (k - 1);
    return {mean, std::sqrt(var / k)};
}

void expect_deadtime_respected(const std::vector<SlotRecord>& slots, std::int64_t d) {
    std::int64_t last_a = -1'000'000;
    std::int64_t last_b = -1'000'000;
    for (const auto& s : slots) {
        if (s.herald_a_fired) {
            ASSERT_GT(s.slot_index - last_a, d) << "detector A refired at " << s.slot_index;
            last_a = s.slot_index;
        }
        if (s.herald_b_fired) {
            ASSERT_GT(s.slot_index - last_b, d) << "detector B refired at " << s.slot_index;
            last_b = s.slot_index;
        }
        ASSERT_FALSE(s.herald_a_fired && s.herald_b_fired);
        ASSERT_EQ(s.herald_effective, s.herald_a_fired || s.herald_b_fired);
        if (s.herald_effective) ASSERT_TRUE(s.signal_present);
    }
}

TEST(GenerateSlots, NoEmissionMeansEmptyRecords) {
    RngStream rng(1, 0);
    const auto slots = generate_slots(params(0.0, 1.0, 4), 10'000, rng);
    ASSERT_EQ(slots.size(), 10'000u);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        ASSERT_EQ(s.slot_index, static_cast<std::int64_t>(i));
        ASSERT_FALSE(s.signal_present || s.herald_a_fired || s.herald_b_fired || s.herald_effective);
    }
}

TEST(GenerateSlots, NoDeadtimeHeraldsEverySlot) {
    RngStream rng(1, 1);
    for (const auto& s : generate_slots(params(1.0, 1.0, 0), 10'000, rng)) ASSERT_TRUE(s.herald_effective);
}

TEST(GenerateSlots, RejectsEmptyRun) {
    RngStream rng(1, 1);
    EXPECT_THROW(generate_slots(params(0.1, 1.0, 0), 0, rng), std::invalid_argument);
}

TEST(GenerateSlots, DeadtimeInvariantExhaustive) {
    RngStream rng(3, 0);
    for (std::int64_t d : {1, 4, 9}) {
        expect_deadtime_respected(generate_slots(params(0.9, 0.95, d), 200'000, rng), d);
    }
}

TEST(GenerateSlots, TwoDetectorsAllowConsecutiveHeralds) {
    RngStream rng(4, 0);
    const auto slots = generate_slots(params(1.0, 1.0, 4), 10'000, rng);
    int consecutive = 0;
    for (std::size_t i = 1; i < slots.size(); ++i) {
        if (slots[i - 1].herald_effective && slots[i].herald_effective) {
            ++consecutive;
            ASSERT_NE(slots[i - 1].herald_a_fired, slots[i].herald_a_fired);
        }
    }
    EXPECT_GT(consecutive, 100);

    // A single detector with the same deadtime never heralds twice in a row.
    const auto single = generate_slots(params(1.0, 1.0, 4, 1.0), 10'000, rng);
    for (std::size_t i = 1; i < single.size(); ++i) {
        ASSERT_FALSE(single[i - 1].herald_effective && single[i].herald_effective);
    }
}

TEST(GenerateSlots, HeraldFractionMatchesOracle) {
    const double oracle = herald_fraction_oracle(1.0, 0.5, 4);
    RngStream rng(5, 0);
    const auto slots = generate_slots(params(1.0, 1.0, 4), 1'000'000, rng);
    std::vector<double> batches;
    for (std::size_t b = 0; b < 100; ++b) {
        int count = 0;
        for (std::size_t i = b * 10'000; i < (b + 1) * 10'000; ++i) count += slots[i].herald_effective;
        batches.push_back(count / 10'000.0);
    }
    const auto m = batch_mean(batches);
    EXPECT_NEAR(m.mean, oracle, 5 * m.se);
    EXPECT_NEAR(stationary_herald_statistics(params(1.0, 1.0, 4), 2).herald_fraction, oracle, 1e-12);
}

TEST(GenerateSlots, Deterministic) {
    RngStream a(6, 2);
    RngStream b(6, 2);
    EXPECT_EQ(generate_slots(params(0.3, 0.5, 4), 5000, a), generate_slots(params(0.3, 0.5, 4), 5000, b));
}

TEST(GenerateSlots, MultiPairOnlyWhenEnabled) {
    auto p = params(0.5, 1.0, 0);
    RngStream rng(7, 0);
    for (const auto& s : generate_slots(p, 10'000, rng)) ASSERT_LE(s.signal_photons, 1);
    p.multi_pair_enabled = true;
    int doubles = 0;
    int pairs = 0;
    for (const auto& s : generate_slots(p, 100'000, rng)) {
        pairs += s.signal_present;
        doubles += s.signal_photons == 2;
    }
    EXPECT_NEAR(static_cast<double>(doubles) / pairs, 0.5, 5 * std::sqrt(0.25 / pairs));
}

TEST(HeraldProbability, Examples) {
    EXPECT_DOUBLE_EQ(herald_probability(params(0.01, 0.31, 0)), 0.0031);
    EXPECT_EQ(herald_probability(params(0.0, 0.7, 0)), 0.0);
    EXPECT_EQ(herald_probability(params(1.0, 1.0, 0)), 1.0);
}

TEST(StationaryStatistics, OracleAcrossParameters) {
    for (double q : {0.003, 0.2, 0.7, 1.0}) {
        for (double r : {0.5, 0.3}) {
            for (int d : {0, 1, 4}) {
                const double oracle = herald_fraction_oracle(q, r, d);
                EXPECT_NEAR(stationary_herald_statistics(params(q, 1.0, d, r), 3).herald_fraction, oracle, 1e-10)
                    << q << " " << r << " " << d;
            }
        }
    }
}

TEST(StationaryStatistics, NoDeadtimeTriggerProbabilityIsExact) {
    // Without deadtime heralds are i.i.d.; greedy pairs complete at rate
    // q^2 / (1 + q) per slot (renewal argument over the 0/1/2 run state).
    const double q = 0.3;
    const auto stats = stationary_herald_statistics(params(q, 1.0, 0), 2);
    EXPECT_NEAR(stats.herald_fraction, q, 1e-12);
    EXPECT_NEAR(stats.trigger_probability, q * q / (1 + q), 1e-12);
}

TEST(StationaryStatistics, TriggerProbabilityMatchesDenseStream) {
    const auto p = params(0.6, 0.8, 4);
    const auto stats = stationary_herald_statistics(p, 2);
    std::vector<double> batches;
    RngStream rng(11, 0);
    for (int b = 0; b < 50; ++b) {
        const auto slots = generate_slots(p, 40'000, rng);
        batches.push_back(static_cast<double>(detect_runs(slots, 2).size()) / 40'000.0);
    }
    const auto m = batch_mean(batches);
    EXPECT_NEAR(m.mean, stats.trigger_probability, 5 * m.se);
}

TEST(HeraldEventSource, MatchesDenseStatistics) {
    const auto p = params(0.3, 0.7, 4);
    std::vector<double> dense_h;
    std::vector<double> dense_t;
    std::vector<double> sparse_h;
    std::vector<double> sparse_t;
    for (int b = 0; b < 60; ++b) {
        RngStream rd(12, static_cast<std::uint64_t>(b));
        const auto slots = generate_slots(p, 20'000, rd);
        int heralds = 0;
        for (const auto& s : slots) heralds += s.herald_effective;
        dense_h.push_back(heralds / 20'000.0);
        dense_t.push_back(static_cast<double>(detect_runs(slots, 2).size()) / 20'000.0);

        RngStream rs(13, static_cast<std::uint64_t>(b));
        HeraldEventSource source(p, rs, 20'000);
        RunDetector detector(2);
        std::vector<SlotRecord> active;
        while (auto rec = source.next()) active.push_back(*rec);
        expect_deadtime_respected(active, 4);
        int sh = 0;
        int st = 0;
        std::int64_t prev = -1;
        for (const auto& s : active) {
            ASSERT_GT(s.slot_index, prev);
            ASSERT_LT(s.slot_index, 20'000);
            prev = s.slot_index;
            sh += s.herald_effective;
            st += detector.push(s).has_value();
        }
        sparse_h.push_back(sh / 20'000.0);
        sparse_t.push_back(st / 20'000.0);
    }
    const auto stats = stationary_herald_statistics(p, 2);
    const auto dh = batch_mean(dense_h);
    const auto sh = batch_mean(sparse_h);
    const auto dt = batch_mean(dense_t);
    const auto st = batch_mean(sparse_t);
    EXPECT_NEAR(dh.mean, sh.mean, 5 * std::hypot(dh.se, sh.se));
    EXPECT_NEAR(dt.mean, st.mean, 5 * std::hypot(dt.se, st.se));
    EXPECT_NEAR(sh.mean, stats.herald_fraction, 5 * sh.se);
    EXPECT_NEAR(st.mean, stats.trigger_probability, 5 * st.se);
}

TEST(HeraldEventSource, UnheraldedSignalProbability) {
    auto p = params(0.01, 0.31, 4);
    RngStream rng(1, 0);
    HeraldEventSource source(p, rng, 100);
    EXPECT_NEAR(source.unheralded_signal_probability(), 0.01 * 0.69 / (1 - 0.0031), 1e-15);
}

TEST(Calibration, SolverInvertsTriggerRate) {
    SourceParams p = params(0.0, 0.31, 4);
    p.rep_rate_hz = 82e6;
    const double pair = solve_pair_prob_for_trigger_rate(p, 2, 785.0);
    p.pair_prob = pair;
    EXPECT_NEAR(expected_trigger_rate_hz(p, 2), 785.0, 1e-6);
    EXPECT_GT(pair, 0.0135);
    EXPECT_LT(pair, 0.0150);

    // Deadtime-free pure product would need a much smaller pair probability.
    p.pair_prob = 0.01;
    EXPECT_LT(expected_trigger_rate_hz(p, 2), 0.6 * 82e6 * 0.0031 * 0.0031);

    SourceParams weak = params(0.0, 1e-4, 4);
    EXPECT_THROW(solve_pair_prob_for_trigger_rate(weak, 2, 1e6), std::invalid_argument);
}

}  // namespace
}  // namespace spconv
