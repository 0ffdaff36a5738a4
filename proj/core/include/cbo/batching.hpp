#ifndef CBO_BATCHING_HPP
#define CBO_BATCHING_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cbo/rng.hpp"

namespace cbo {

/// Partition of {0..N-1} into ceil(N/P)-1 batches of size exactly P plus a
/// final batch of size N - P*(ceil(N/P)-1).
struct BatchPartition {
    int max_size = 0;                      // P
    std::vector<std::vector<int>> batches; // each sorted ascending
    std::vector<int> batch_index;          // particle -> index into `batches`

    int particles() const { return static_cast<int>(batch_index.size()); }
    bool co_batched(int i, int j) const { return batch_index[i] == batch_index[j]; }
};

/// Throws UsageError if the size/cover invariants are violated.
void validate_partition(const BatchPartition& partition, int particles, int max_size);

/// Uniform draw over the set A of all admissible partitions; implemented by
/// shuffling 0..N-1 and chunking into consecutive blocks of size P. Every
/// unordered partition corresponds to the same number of shuffles, so the
/// chunking is uniform on A.
BatchPartition sample_partition(int particles, int max_size, RngStream& rng);

/// Batch containing particle i. Out of range -> UsageError.
const std::vector<int>& batch_of(const BatchPartition& partition, int i);

struct PartitionSchedule {
    int particles = 0;
    int max_size = 0;
    std::vector<BatchPartition> steps;
};

PartitionSchedule sample_schedule(int particles, int max_size, long steps, RngStream& rng);

/// Connectivity statistic over [begin, end): the minimum over particle pairs
/// of the number of steps at which the pair shares a batch. Empty window -> 0.
long connectivity_count(const PartitionSchedule& schedule, long begin, long end);
long connectivity_count(std::span<const BatchPartition> window, int particles);

/// All admissible partitions (the set A). Throws ResourceError when |A| would
/// exceed `cap`.
std::vector<BatchPartition> enumerate_partitions(int particles, int max_size,
                                                 std::uint64_t cap = 1u << 20);

/// |A| by closed-form multinomial count. Throws ResourceError on overflow.
std::uint64_t count_partitions(int particles, int max_size);

/// Minimal window length m such that some sequence of m partitions co-batches
/// every pair at least once. P == N gives 1. P == 1 with N >= 2 has no such
/// window (ConfigError). Exact search; throws ResourceError when the search
/// exceeds its node budget (supply the window length explicitly instead).
int find_m0(int particles, int max_size);

/// E[connectivity over an m0-window], exactly, by enumerating all |A|^m0
/// partition sequences. Throws ResourceError beyond `sequence_cap`.
double exact_p_m0(int particles, int max_size, int m0,
                  std::uint64_t sequence_cap = 20'000'000ULL);

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    long replicates = 0;
};

/// Monte Carlo mean of the connectivity statistic over fresh m0-windows.
MonteCarloEstimate estimate_p_m0(int particles, int max_size, int m0, long replicates,
                                 RngStream& rng);

/// Line-oriented text: "<step> a,b,c|d,e|f" with 1-based particle indices.
void write_schedule(std::ostream& out, const PartitionSchedule& schedule);
PartitionSchedule read_schedule(std::istream& in);

} // namespace cbo

#endif
