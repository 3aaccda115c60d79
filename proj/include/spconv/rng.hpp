#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace spconv {

/// One reproducible substream of a seeded experiment. The pair
/// (master_seed, stream_index) fully determines the sequence; distinct
/// indices are seeded through std::seed_seq so they do not overlap in
/// practice.
class RngStream {
  public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) built from the top 53 bits of one draw.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t below(std::uint64_t n);

    /// Number of failures before the first success of Bernoulli(p) trials.
    /// p >= 1 yields 0; p <= 0 yields the maximum representable value.
    std::uint64_t geometric(double p);

  private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 engine_;
};

/// Geometric gaps (failures before the first success) for a fixed p, by
/// inversion with the logarithm of 1 - p computed once. One engine draw per
/// sample; about twice as fast as std::geometric_distribution, which matters
/// because the herald source draws one gap per herald attempt.
class GeometricSampler {
  public:
    explicit GeometricSampler(double p);

    std::uint64_t operator()(RngStream& rng) const;
    double p() const { return p_; }

  private:
    double p_;
    double inv_log_q_ = 0.0;
};

}  // namespace spconv
