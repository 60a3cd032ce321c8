#pragma once
// Counter-based random numbers (Philox4x32-10).  Every draw is a pure
// function of (key, counter), so any particle, step or replica can be
// regenerated independently and in any order.

#include <array>
#include <cstdint>
#include <utility>

namespace mvlab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Ten-round Philox4x32 block function.
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of replica `r` derived from a study seed.
std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t r) noexcept;

/// Counter slot layout: word 0 = stream (particle), word 1 = step,
/// word 2 = sub-index, word 3 = tag.  Tags keep unrelated draws of one
/// seed disjoint.
enum class StreamTag : std::uint32_t {
    Brownian = 0,
    Initial = 1,
    OrnsteinUhlenbeck = 2,
    Martingale = 3,
    Library = 4,
    Picard = 5,
    Misc = 6,
};

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    const PhiloxKey& key() const noexcept { return key_; }

    PhiloxCounter block(std::uint32_t stream, std::uint32_t step, std::uint32_t sub,
                        StreamTag tag) const noexcept;

    /// Two uniforms in the open interval (0, 1), 53 bits each.
    std::pair<double, double> uniform2(std::uint32_t stream, std::uint32_t step,
                                       std::uint32_t sub, StreamTag tag) const noexcept;

    /// Two independent standard normals (Box-Muller on uniform2).
    std::pair<double, double> normal2(std::uint32_t stream, std::uint32_t step,
                                      std::uint32_t sub, StreamTag tag) const noexcept;

    double normal(std::uint32_t stream, std::uint32_t step, std::uint32_t index,
                  StreamTag tag) const noexcept;

    double uniform(std::uint32_t stream, std::uint32_t step, std::uint32_t index,
                   StreamTag tag) const noexcept;

    /// 64-bit identifier of the substream used by `stream`; distinct for
    /// distinct streams of one seed.
    std::uint64_t substream_id(std::uint32_t stream) const noexcept;

private:
    std::uint64_t seed_;
    PhiloxKey key_;
};

}  // namespace mvlab
