#include "cbo/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "cbo/errors.hpp"

namespace cbo {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

std::uint64_t mix_path(std::uint64_t base_seed, std::span<const std::uint64_t> path) {
    std::uint64_t state = base_seed;
    std::uint64_t acc = splitmix64(state);
    for (std::uint64_t id : path) {
        state = acc ^ (0x9E3779B97F4A7C15ULL * (id + 1));
        acc = splitmix64(state);
    }
    return acc;
}

} // namespace

RngStream::RngStream(std::uint64_t mixed_state) {
    std::uint64_t state = mixed_state;
    std::array<std::uint32_t, 16> words{};
    for (auto& w : words) {
        w = static_cast<std::uint32_t>(splitmix64(state));
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
}

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t stream_id)
    : RngStream(mix_path(base_seed, std::span<const std::uint64_t>(&stream_id, 1))) {}

RngStream RngStream::derive(std::uint64_t base_seed, std::span<const std::uint64_t> path) {
    return RngStream(mix_path(base_seed, path));
}

RngStream RngStream::derive(std::uint64_t base_seed, std::initializer_list<std::uint64_t> path) {
    return derive(base_seed, std::span<const std::uint64_t>(path.begin(), path.size()));
}

std::uint64_t RngStream::next_u64() {
    return engine_();
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
}

std::uint64_t RngStream::bounded(std::uint64_t n) {
    if (n == 0) {
        throw UsageError("RngStream::bounded: n must be >= 1");
    }
    // Unbiased: reject the low remainder band of the 2^64 range.
    std::uint64_t threshold = (-n) % n;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % n;
        }
    }
}

} // namespace cbo
