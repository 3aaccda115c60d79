#include "spconv/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace spconv {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index), engine_(seeded_engine(master_seed, stream_index)) {}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: empty range");
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

std::uint64_t RngStream::geometric(double p) { return GeometricSampler(p)(*this); }

GeometricSampler::GeometricSampler(double p) : p_(p) {
    if (p > 0.0 && p < 1.0) inv_log_q_ = 1.0 / std::log1p(-p);
}

std::uint64_t GeometricSampler::operator()(RngStream& rng) const {
    constexpr auto kNever = std::numeric_limits<std::uint64_t>::max();
    if (p_ >= 1.0) return 0;
    if (!(p_ > 0.0)) return kNever;
    // 1 - u lies in (0, 1], so the logarithm is finite.
    const double gap = std::floor(std::log(1.0 - rng.uniform()) * inv_log_q_);
    return gap >= 0x1.0p63 ? kNever : static_cast<std::uint64_t>(gap);
}

}  // namespace spconv
