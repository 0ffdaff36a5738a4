#ifndef CBO_CONFIG_HPP
#define CBO_CONFIG_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cbo/harness.hpp"

namespace cbo {

/// Experiment file: INI-style key = value lines grouped in sections.
/// Unknown sections or keys and malformed values are reported as
/// "path:line: message". Defaults reproduce the reference benchmark setup.

struct ObjectiveSection {
    std::string name = "rastrigin";
    std::vector<double> shift{1.0}; // scalar entries broadcast per dimension
    double offset = 0.0;
};

struct RunSection {
    int particles = 100;
    int dimension = 2;
    int batch_size = 10;
    std::string rule = "argmin"; // argmin | gibbs
    double beta = 30.0;
    std::string scheme = "generalized"; // generalized | model_a | model_b | model_c
    double gamma = 0.01;
    std::string noise = "gaussian"; // none | gaussian | scheme_b | scheme_c
    double zeta = 0.5;
    double lambda = 1.0;
    double sigma = 0.1;
    double h = 0.01;
    bool heterogeneous = true;
    long max_steps = 100000;
    double tolerance = 1e-3;
    double init_lower = -3.0;
    double init_upper = 3.0;
    std::uint64_t seed = 42;
};

struct RecordSection {
    bool diameters = true;
    bool best_objective = true;
    long snapshot_every = 0;
    bool transitions = false;
};

struct BenchmarkSection {
    std::vector<int> dimensions{2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> batch_sizes{10, 50, 100};
    int replicates = 200;
    double success_threshold = 0.25;
};

struct DiagnosticsSection {
    int window_length = 0; // 0 -> minimal covering window for (N, P)
    int windows = 100;
};

struct PartitionStatsSection {
    int m0 = 0; // 0 -> minimal covering window
    long replicates = 100000;
};

struct ExperimentConfig {
    ObjectiveSection objective;
    RunSection run;
    RecordSection record;
    BenchmarkSection benchmark;
    DiagnosticsSection diagnostics;
    PartitionStatsSection partition_stats;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// Library-level configs assembled from the file sections.
RunConfig make_run_config(const ExperimentConfig& config);
BenchmarkConfig make_benchmark_config(const ExperimentConfig& config, int jobs);

/// Canonical "section.key = value" lines (sorted, fully resolved); data files
/// embed these so every output is reproducible from its own header.
std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentConfig& config);
std::string resolved_text(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

} // namespace cbo

#endif
