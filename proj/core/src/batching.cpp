#include "cbo/batching.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "cbo/errors.hpp"

namespace cbo {

namespace {

int batch_count(int particles, int max_size) {
    return (particles + max_size - 1) / max_size;
}

void check_sizes(int particles, int max_size) {
    if (particles < 1) {
        throw ConfigError("batching: need at least one particle");
    }
    if (max_size < 1 || max_size > particles) {
        throw ConfigError("batching: batch size must satisfy 1 <= P <= N");
    }
}

void rebuild_index(BatchPartition& partition, int particles) {
    partition.batch_index.assign(particles, -1);
    for (std::size_t b = 0; b < partition.batches.size(); ++b) {
        for (int i : partition.batches[b]) {
            partition.batch_index[i] = static_cast<int>(b);
        }
    }
}

} // namespace

void validate_partition(const BatchPartition& partition, int particles, int max_size) {
    check_sizes(particles, max_size);
    const int K = batch_count(particles, max_size);
    if (static_cast<int>(partition.batches.size()) != K) {
        throw UsageError("partition: wrong batch count");
    }
    std::vector<std::size_t> sizes;
    for (const auto& batch : partition.batches) sizes.push_back(batch.size());
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    for (int b = 0; b < K - 1; ++b) {
        if (sizes[b] != static_cast<std::size_t>(max_size)) {
            throw UsageError("partition: all but the last batch must have size P");
        }
    }
    if (sizes[K - 1] != static_cast<std::size_t>(particles - max_size * (K - 1))) {
        throw UsageError("partition: wrong remainder batch size");
    }
    std::vector<char> seen(particles, 0);
    for (std::size_t b = 0; b < partition.batches.size(); ++b) {
        for (int i : partition.batches[b]) {
            if (i < 0 || i >= particles || seen[i]) {
                throw UsageError("partition: indices must cover {0..N-1} disjointly");
            }
            seen[i] = 1;
            if (partition.batch_index.at(static_cast<std::size_t>(i)) != static_cast<int>(b)) {
                throw UsageError("partition: batch_index inconsistent");
            }
        }
    }
}

BatchPartition sample_partition(int particles, int max_size, RngStream& rng) {
    check_sizes(particles, max_size);
    std::vector<int> order(particles);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    BatchPartition partition;
    partition.max_size = max_size;
    const int K = batch_count(particles, max_size);
    partition.batches.resize(K);
    for (int b = 0; b < K; ++b) {
        const int lo = b * max_size;
        const int hi = std::min(particles, lo + max_size);
        partition.batches[b].assign(order.begin() + lo, order.begin() + hi);
        std::sort(partition.batches[b].begin(), partition.batches[b].end());
    }
    rebuild_index(partition, particles);
    return partition;
}

const std::vector<int>& batch_of(const BatchPartition& partition, int i) {
    if (i < 0 || i >= partition.particles()) {
        throw UsageError("batch_of: particle index out of range");
    }
    return partition.batches[static_cast<std::size_t>(partition.batch_index[i])];
}

PartitionSchedule sample_schedule(int particles, int max_size, long steps, RngStream& rng) {
    PartitionSchedule schedule;
    schedule.particles = particles;
    schedule.max_size = max_size;
    schedule.steps.reserve(static_cast<std::size_t>(steps));
    for (long n = 0; n < steps; ++n) {
        schedule.steps.push_back(sample_partition(particles, max_size, rng));
    }
    return schedule;
}

long connectivity_count(std::span<const BatchPartition> window, int particles) {
    if (window.empty()) {
        return 0;
    }
    if (particles == 1) {
        return static_cast<long>(window.size());
    }
    long best = static_cast<long>(window.size());
    for (int i = 0; i < particles && best > 0; ++i) {
        for (int j = i + 1; j < particles; ++j) {
            long c = 0;
            for (const auto& partition : window) {
                c += partition.co_batched(i, j) ? 1 : 0;
            }
            best = std::min(best, c);
            if (best == 0) break;
        }
    }
    return best;
}

long connectivity_count(const PartitionSchedule& schedule, long begin, long end) {
    if (begin > end || begin < 0 || end > static_cast<long>(schedule.steps.size())) {
        throw UsageError("connectivity_count: window outside schedule range");
    }
    return connectivity_count(
        std::span<const BatchPartition>(schedule.steps.data() + begin,
                                        static_cast<std::size_t>(end - begin)),
        schedule.particles);
}

std::uint64_t count_partitions(int particles, int max_size) {
    check_sizes(particles, max_size);
    const int K = batch_count(particles, max_size);
    const int remainder = particles - max_size * (K - 1);

    // N! / ((P!)^F * F! * r!) with F interchangeable full blocks; when the
    // remainder equals P all K blocks are interchangeable.
    const int full = (remainder == max_size) ? K : K - 1;
    std::vector<int> divisors;
    for (int b = 0; b < full; ++b) {
        for (int t = 2; t <= max_size; ++t) divisors.push_back(t);
    }
    if (remainder != max_size) {
        for (int t = 2; t <= remainder; ++t) divisors.push_back(t);
    }
    for (int t = 2; t <= full; ++t) divisors.push_back(t);

    long double value = 1.0L;
    std::size_t di = 0;
    for (int t = 2; t <= particles; ++t) {
        value *= t;
        while (di < divisors.size() && value >= static_cast<long double>(divisors[di])) {
            value /= static_cast<long double>(divisors[di]);
            ++di;
        }
    }
    while (di < divisors.size()) {
        value /= static_cast<long double>(divisors[di]);
        ++di;
    }
    if (value > 1.8e18L) {
        throw ResourceError("count_partitions: |A| exceeds uint64 range");
    }
    return static_cast<std::uint64_t>(value + 0.5L);
}

std::vector<BatchPartition> enumerate_partitions(int particles, int max_size, std::uint64_t cap) {
    check_sizes(particles, max_size);
    const std::uint64_t total = count_partitions(particles, max_size);
    if (total > cap) {
        throw ResourceError("enumerate_partitions: |A| = " + std::to_string(total) +
                            " exceeds cap " + std::to_string(cap));
    }

    const int K = batch_count(particles, max_size);
    const int remainder = particles - max_size * (K - 1);
    const int full_blocks = (remainder == max_size) ? K : K - 1;
    const int rem_blocks = (remainder == max_size) ? 0 : 1;

    std::vector<BatchPartition> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<std::vector<int>> acc;

    auto emit = [&]() {
        BatchPartition partition;
        partition.max_size = max_size;
        partition.batches = acc;
        std::sort(partition.batches.begin(), partition.batches.end(),
                  [](const std::vector<int>& a, const std::vector<int>& b) {
                      return a.size() != b.size() ? a.size() > b.size() : a < b;
                  });
        rebuild_index(partition, particles);
        out.push_back(std::move(partition));
    };

    // Blocks are formed in order of their minimal elements (the head of the
    // free list joins each candidate block), so every unordered partition is
    // produced exactly once. `free` stays sorted ascending throughout.
    auto rec = [&](auto&& self, const std::vector<int>& free, int full_left,
                   int rem_left) -> void {
        if (free.empty()) {
            emit();
            return;
        }
        const int head = free[0];
        const std::vector<int> rest(free.begin() + 1, free.end());
        std::vector<int> picked; // indices into `rest` chosen for this block
        auto place_block = [&](auto&& choose, int start, int need, int block_size) -> void {
            if (need == 0) {
                std::vector<int> block{head};
                std::vector<char> taken(rest.size(), 0);
                for (int t : picked) {
                    block.push_back(rest[static_cast<std::size_t>(t)]);
                    taken[static_cast<std::size_t>(t)] = 1;
                }
                std::vector<int> next;
                next.reserve(rest.size() - picked.size());
                for (std::size_t t = 0; t < rest.size(); ++t) {
                    if (!taken[t]) next.push_back(rest[t]);
                }
                acc.push_back(std::move(block));
                if (block_size == max_size && full_left > 0) {
                    self(self, next, full_left - 1, rem_left);
                } else {
                    self(self, next, full_left, rem_left - 1);
                }
                acc.pop_back();
                return;
            }
            for (int t = start; t + need <= static_cast<int>(rest.size()); ++t) {
                picked.push_back(t);
                choose(choose, t + 1, need - 1, block_size);
                picked.pop_back();
            }
        };
        if (full_left > 0) {
            place_block(place_block, 0, max_size - 1, max_size);
        }
        if (rem_left > 0) { // only reachable when remainder != max_size
            place_block(place_block, 0, remainder - 1, remainder);
        }
    };

    std::vector<int> free(particles);
    std::iota(free.begin(), free.end(), 0);
    rec(rec, free, full_blocks, rem_blocks);
    if (out.size() != total) {
        throw ResourceError("enumerate_partitions: internal enumeration mismatch");
    }
    return out;
}

namespace {

using PairMask = std::vector<std::uint64_t>; // bitset over particle pairs

std::size_t pair_rank(int i, int j, int particles) {
    // requires i < j
    return static_cast<std::size_t>(i) * particles -
           static_cast<std::size_t>(i) * (i + 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

PairMask pairs_of(const BatchPartition& partition, int particles, std::size_t words) {
    PairMask mask(words, 0);
    for (const auto& batch : partition.batches) {
        for (std::size_t a = 0; a < batch.size(); ++a) {
            for (std::size_t b = a + 1; b < batch.size(); ++b) {
                std::size_t r = pair_rank(batch[a], batch[b], particles);
                mask[r >> 6] |= (1ULL << (r & 63));
            }
        }
    }
    return mask;
}

std::size_t popcount(const PairMask& mask) {
    std::size_t c = 0;
    for (auto w : mask) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
}

} // namespace

int find_m0(int particles, int max_size) {
    check_sizes(particles, max_size);
    if (particles == 1 || max_size == particles) {
        return 1;
    }
    if (max_size == 1) {
        throw ConfigError("find_m0: P = 1 never co-batches distinct particles");
    }

    const auto partitions = enumerate_partitions(particles, max_size, 1u << 18);
    const std::size_t pair_total = static_cast<std::size_t>(particles) * (particles - 1) / 2;
    const std::size_t words = (pair_total + 63) / 64;
    std::vector<PairMask> masks;
    masks.reserve(partitions.size());
    std::size_t pairs_per_step = 0;
    for (const auto& p : partitions) {
        masks.push_back(pairs_of(p, particles, words));
        pairs_per_step = std::max(pairs_per_step, popcount(masks.back()));
    }

    long budget = 50'000'000;

    // Depth-first cover search branching on the first uncovered pair. The
    // chosen partitions form a set whose order is irrelevant, so branching
    // only on partitions covering that pair is complete.
    auto dfs = [&](auto&& self, const PairMask& covered, int depth_left) -> bool {
        if (--budget < 0) {
            throw ResourceError("find_m0: search budget exhausted; pass the window length "
                                "explicitly for this (N, P)");
        }
        const std::size_t have = popcount(covered);
        if (have == pair_total) return true;
        if (depth_left == 0) return false;
        if (pair_total - have > pairs_per_step * static_cast<std::size_t>(depth_left)) {
            return false;
        }
        std::size_t r = 0;
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t missing = ~covered[w];
            if (w == words - 1 && (pair_total & 63) != 0) {
                missing &= (1ULL << (pair_total & 63)) - 1;
            }
            if (missing) {
                r = (w << 6) + static_cast<std::size_t>(__builtin_ctzll(missing));
                break;
            }
        }
        for (std::size_t p = 0; p < masks.size(); ++p) {
            if (!(masks[p][r >> 6] & (1ULL << (r & 63)))) continue;
            PairMask next = covered;
            for (std::size_t w = 0; w < words; ++w) next[w] |= masks[p][w];
            if (self(self, next, depth_left - 1)) return true;
        }
        return false;
    };

    const int per_particle_bound = (particles - 1 + max_size - 2) / (max_size - 1);
    const int coverage_bound =
        static_cast<int>((pair_total + pairs_per_step - 1) / pairs_per_step);
    for (int m = std::max(per_particle_bound, coverage_bound);; ++m) {
        PairMask covered(words, 0);
        if (dfs(dfs, covered, m)) {
            return m;
        }
    }
}

double exact_p_m0(int particles, int max_size, int m0, std::uint64_t sequence_cap) {
    check_sizes(particles, max_size);
    if (m0 < 1) {
        throw ConfigError("exact_p_m0: window length must be >= 1");
    }
    const auto partitions = enumerate_partitions(particles, max_size, 1u << 18);
    const std::uint64_t count = partitions.size();
    std::uint64_t sequences = 1;
    for (int t = 0; t < m0; ++t) {
        if (sequences > sequence_cap / count) {
            throw ResourceError("exact_p_m0: |A|^m0 exceeds cap " + std::to_string(sequence_cap));
        }
        sequences *= count;
    }

    std::vector<std::size_t> odometer(static_cast<std::size_t>(m0), 0);
    std::vector<BatchPartition> window(static_cast<std::size_t>(m0));
    for (int t = 0; t < m0; ++t) {
        window[static_cast<std::size_t>(t)] = partitions[0];
    }
    long double sum = 0.0L;
    for (std::uint64_t s = 0; s < sequences; ++s) {
        sum += static_cast<long double>(
            connectivity_count(std::span<const BatchPartition>(window), particles));
        for (int t = 0; t < m0; ++t) {
            auto& pos = odometer[static_cast<std::size_t>(t)];
            if (++pos < count) {
                window[static_cast<std::size_t>(t)] = partitions[pos];
                break;
            }
            pos = 0;
            window[static_cast<std::size_t>(t)] = partitions[0];
        }
    }
    return static_cast<double>(sum / static_cast<long double>(sequences));
}

MonteCarloEstimate estimate_p_m0(int particles, int max_size, int m0, long replicates,
                                 RngStream& rng) {
    check_sizes(particles, max_size);
    if (m0 < 1 || replicates < 1) {
        throw ConfigError("estimate_p_m0: need m0 >= 1 and replicates >= 1");
    }
    long double sum = 0.0L;
    long double sumsq = 0.0L;
    std::vector<BatchPartition> window(static_cast<std::size_t>(m0));
    for (long r = 0; r < replicates; ++r) {
        for (int t = 0; t < m0; ++t) {
            window[static_cast<std::size_t>(t)] = sample_partition(particles, max_size, rng);
        }
        const long g = connectivity_count(std::span<const BatchPartition>(window), particles);
        sum += static_cast<long double>(g);
        sumsq += static_cast<long double>(g) * g;
    }
    MonteCarloEstimate est;
    est.replicates = replicates;
    est.value = static_cast<double>(sum / static_cast<long double>(replicates));
    if (replicates > 1) {
        long double var = (sumsq - sum * sum / static_cast<long double>(replicates)) /
                          static_cast<long double>(replicates - 1);
        if (var < 0) var = 0;
        est.standard_error =
            std::sqrt(static_cast<double>(var) / static_cast<double>(replicates));
    }
    return est;
}

void write_schedule(std::ostream& out, const PartitionSchedule& schedule) {
    for (std::size_t n = 0; n < schedule.steps.size(); ++n) {
        out << n << ' ';
        const auto& batches = schedule.steps[n].batches;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            if (b) out << '|';
            for (std::size_t k = 0; k < batches[b].size(); ++k) {
                if (k) out << ',';
                out << batches[b][k] + 1; // 1-based on the wire
            }
        }
        out << '\n';
    }
}

PartitionSchedule read_schedule(std::istream& in) {
    PartitionSchedule schedule;
    std::string line;
    long expected_step = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long step = -1;
        ls >> step;
        if (!ls || step != expected_step) {
            throw UsageError("read_schedule: bad or out-of-order step index");
        }
        std::string body;
        ls >> body;
        if (body.empty()) {
            throw UsageError("read_schedule: missing batches");
        }
        BatchPartition partition;
        std::vector<int> batch;
        int particle_count = 0;
        std::string token;
        auto push_token = [&]() {
            if (token.empty()) {
                throw UsageError("read_schedule: empty index token");
            }
            batch.push_back(std::stoi(token) - 1);
            token.clear();
        };
        auto flush_batch = [&]() {
            if (batch.empty()) {
                throw UsageError("read_schedule: empty batch");
            }
            std::sort(batch.begin(), batch.end());
            particle_count += static_cast<int>(batch.size());
            partition.batches.push_back(std::move(batch));
            batch = {};
        };
        for (char c : body) {
            if (c == ',') {
                push_token();
            } else if (c == '|') {
                push_token();
                flush_batch();
            } else {
                token += c;
            }
        }
        push_token();
        flush_batch();

        std::size_t max_batch = 0;
        for (const auto& b : partition.batches) max_batch = std::max(max_batch, b.size());
        partition.max_size = static_cast<int>(max_batch);
        rebuild_index(partition, particle_count);
        if (schedule.steps.empty()) {
            schedule.particles = particle_count;
        } else if (particle_count != schedule.particles) {
            throw UsageError("read_schedule: inconsistent particle count");
        }
        schedule.max_size = std::max(schedule.max_size, partition.max_size);
        schedule.steps.push_back(std::move(partition));
        ++expected_step;
    }
    return schedule;
}

} // namespace cbo
