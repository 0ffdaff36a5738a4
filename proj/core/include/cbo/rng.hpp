#ifndef CBO_RNG_HPP
#define CBO_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cbo {

/// Deterministic, splittable random stream.
///
/// A stream is identified by (base seed, derivation path). Identical
/// identifiers produce identical draw sequences; distinct stream ids give
/// statistically independent streams. Streams derived for replicate r can
/// therefore run in any order or in parallel with reproducible results.
///
/// The engine is std::mt19937_64 (output sequence fixed by the standard);
/// all distributions are generated here from raw engine output so that draw
/// sequences do not depend on the standard library implementation.
class RngStream {
public:
    RngStream(std::uint64_t base_seed, std::uint64_t stream_id);

    /// Derive a stream from a base seed and a path of ids, e.g.
    /// {dimension, batch_size, replicate}. Order of ids is significant.
    static RngStream derive(std::uint64_t base_seed, std::span<const std::uint64_t> path);
    static RngStream derive(std::uint64_t base_seed, std::initializer_list<std::uint64_t> path);

    std::uint64_t next_u64();

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (second value cached).
    double normal();

    /// Uniform integer in [0, n), unbiased (rejection sampling). n >= 1.
    std::uint64_t bounded(std::uint64_t n);

    /// Fisher-Yates shuffle with draws from this stream.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    explicit RngStream(std::uint64_t mixed_state);

    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

/// SplitMix64 step; advances state and returns the next output word.
std::uint64_t splitmix64(std::uint64_t& state);

} // namespace cbo

#endif
