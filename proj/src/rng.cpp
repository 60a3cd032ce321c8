#include "mvlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace mvlab {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t r) noexcept {
    return mix64(seed ^ (r * 0x9E3779B97F4A7C15ull));
}

CounterRng::CounterRng(std::uint64_t seed) noexcept : seed_(seed) {
    const std::uint64_t h = mix64(seed);
    key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

PhiloxCounter CounterRng::block(std::uint32_t stream, std::uint32_t step, std::uint32_t sub,
                                StreamTag tag) const noexcept {
    return philox4x32({stream, step, sub, static_cast<std::uint32_t>(tag)}, key_);
}

std::pair<double, double> CounterRng::uniform2(std::uint32_t stream, std::uint32_t step,
                                               std::uint32_t sub, StreamTag tag) const noexcept {
    const auto b = block(stream, step, sub, tag);
    return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
}

std::pair<double, double> CounterRng::normal2(std::uint32_t stream, std::uint32_t step,
                                              std::uint32_t sub, StreamTag tag) const noexcept {
    const auto [u1, u2] = uniform2(stream, step, sub, tag);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

double CounterRng::normal(std::uint32_t stream, std::uint32_t step, std::uint32_t index,
                          StreamTag tag) const noexcept {
    const auto z = normal2(stream, step, index / 2, tag);
    return (index % 2 == 0) ? z.first : z.second;
}

double CounterRng::uniform(std::uint32_t stream, std::uint32_t step, std::uint32_t index,
                           StreamTag tag) const noexcept {
    const auto u = uniform2(stream, step, index / 2, tag);
    return (index % 2 == 0) ? u.first : u.second;
}

std::uint64_t CounterRng::substream_id(std::uint32_t stream) const noexcept {
    return (static_cast<std::uint64_t>(key_[0]) << 32) | stream;
}

}  // namespace mvlab
