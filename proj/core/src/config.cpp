#include "cbo/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cbo/errors.hpp"
#include "cbo/io.hpp"

namespace cbo {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct RawEntry {
    std::string value;
    int line = 0;
};

using RawConfig = std::map<std::string, std::map<std::string, RawEntry>>;

[[noreturn]] void fail(const std::string& path, int line, const std::string& message) {
    throw ConfigError(path + ":" + std::to_string(line) + ": " + message);
}

RawConfig parse_ini(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    RawConfig raw;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                fail(path, lineno, "malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail(path, lineno, "expected key = value");
        }
        if (section.empty()) {
            fail(path, lineno, "key outside any section");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            fail(path, lineno, "empty key or value");
        }
        if (raw[section].count(key)) {
            fail(path, lineno, "duplicate key '" + key + "'");
        }
        raw[section][key] = RawEntry{value, lineno};
    }
    return raw;
}

class SectionReader {
public:
    SectionReader(const std::string& path, const RawConfig& raw, std::string section)
        : path_(path), section_(std::move(section)) {
        auto it = raw.find(section_);
        if (it != raw.end()) {
            entries_ = it->second;
        }
    }

    bool has(const std::string& key) {
        consumed_.insert(key);
        return entries_.count(key) != 0;
    }

    template <class Parse>
    void read(const std::string& key, Parse&& parse) {
        consumed_.insert(key);
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        try {
            parse(it->second.value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(path_, it->second.line,
                 "bad value for '" + key + "' in [" + section_ + "]: " + e.what());
        }
    }

    void get(const std::string& key, std::string& out) {
        read(key, [&](const std::string& v) { out = v; });
    }
    void get(const std::string& key, double& out) {
        read(key, [&](const std::string& v) { out = parse_double(key, v); });
    }
    void get(const std::string& key, int& out) {
        read(key, [&](const std::string& v) { out = static_cast<int>(parse_long(key, v)); });
    }
    void get(const std::string& key, long& out) {
        read(key, [&](const std::string& v) { out = parse_long(key, v); });
    }
    void get(const std::string& key, std::uint64_t& out) {
        read(key, [&](const std::string& v) {
            std::size_t pos = 0;
            out = std::stoull(v, &pos);
            if (pos != v.size()) throw ConfigError(error_at(key, "not an unsigned integer"));
        });
    }
    void get(const std::string& key, bool& out) {
        read(key, [&](const std::string& v) {
            if (v == "true" || v == "1") {
                out = true;
            } else if (v == "false" || v == "0") {
                out = false;
            } else {
                throw ConfigError(error_at(key, "expected true/false"));
            }
        });
    }
    void get(const std::string& key, std::vector<double>& out) {
        read(key, [&](const std::string& v) {
            out.clear();
            std::stringstream ss(v);
            std::string token;
            while (std::getline(ss, token, ',')) {
                out.push_back(parse_double(key, trim(token)));
            }
            if (out.empty()) throw ConfigError(error_at(key, "empty list"));
        });
    }
    void get(const std::string& key, std::vector<int>& out) {
        read(key, [&](const std::string& v) {
            out.clear();
            std::stringstream ss(v);
            std::string token;
            while (std::getline(ss, token, ',')) {
                out.push_back(static_cast<int>(parse_long(key, trim(token))));
            }
            if (out.empty()) throw ConfigError(error_at(key, "empty list"));
        });
    }

    void finish() const {
        for (const auto& [key, entry] : entries_) {
            if (!consumed_.count(key)) {
                fail(path_, entry.line, "unknown key '" + key + "' in [" + section_ + "]");
            }
        }
    }

private:
    double parse_double(const std::string& key, const std::string& v) {
        std::size_t pos = 0;
        const double value = std::stod(v, &pos);
        if (pos != v.size()) throw ConfigError(error_at(key, "not a number"));
        return value;
    }
    long parse_long(const std::string& key, const std::string& v) {
        std::size_t pos = 0;
        const long value = std::stol(v, &pos);
        if (pos != v.size()) throw ConfigError(error_at(key, "not an integer"));
        return value;
    }
    std::string error_at(const std::string& key, const std::string& message) {
        auto it = entries_.find(key);
        const int line = it == entries_.end() ? 0 : it->second.line;
        return path_ + ":" + std::to_string(line) + ": bad value for '" + key + "': " + message;
    }

    std::string path_;
    std::string section_;
    std::map<std::string, RawEntry> entries_;
    std::set<std::string> consumed_;
};

} // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    const RawConfig raw = parse_ini(path);
    static const std::set<std::string> known_sections{
        "objective", "run", "record", "benchmark", "diagnostics", "partition_stats"};
    for (const auto& [section, entries] : raw) {
        if (!known_sections.count(section)) {
            fail(path, entries.begin()->second.line, "unknown section [" + section + "]");
        }
    }

    ExperimentConfig config;

    SectionReader objective(path, raw, "objective");
    objective.get("name", config.objective.name);
    objective.get("shift", config.objective.shift);
    objective.get("offset", config.objective.offset);
    objective.finish();

    SectionReader run(path, raw, "run");
    run.get("particles", config.run.particles);
    run.get("dimension", config.run.dimension);
    run.get("batch_size", config.run.batch_size);
    run.get("rule", config.run.rule);
    run.get("beta", config.run.beta);
    run.get("scheme", config.run.scheme);
    run.get("gamma", config.run.gamma);
    run.get("noise", config.run.noise);
    run.get("zeta", config.run.zeta);
    run.get("lambda", config.run.lambda);
    run.get("sigma", config.run.sigma);
    run.get("h", config.run.h);
    run.get("heterogeneous", config.run.heterogeneous);
    run.get("max_steps", config.run.max_steps);
    run.get("tolerance", config.run.tolerance);
    run.get("init_lower", config.run.init_lower);
    run.get("init_upper", config.run.init_upper);
    run.get("seed", config.run.seed);
    run.finish();

    SectionReader record(path, raw, "record");
    record.get("diameters", config.record.diameters);
    record.get("best_objective", config.record.best_objective);
    record.get("snapshot_every", config.record.snapshot_every);
    record.get("transitions", config.record.transitions);
    record.finish();

    SectionReader bench(path, raw, "benchmark");
    bench.get("dimensions", config.benchmark.dimensions);
    bench.get("batch_sizes", config.benchmark.batch_sizes);
    bench.get("replicates", config.benchmark.replicates);
    bench.get("success_threshold", config.benchmark.success_threshold);
    bench.finish();

    SectionReader diag(path, raw, "diagnostics");
    diag.get("window_length", config.diagnostics.window_length);
    diag.get("windows", config.diagnostics.windows);
    diag.finish();

    SectionReader stats(path, raw, "partition_stats");
    stats.get("m0", config.partition_stats.m0);
    stats.get("replicates", config.partition_stats.replicates);
    stats.finish();

    return config;
}

namespace {

NoiseModel make_noise(const RunSection& run) {
    const auto het = run.heterogeneous ? NoiseModel::Heterogeneity::heterogeneous
                                       : NoiseModel::Heterogeneity::homogeneous;
    if (run.noise == "none") return NoiseModel::none();
    if (run.noise == "gaussian") return NoiseModel::gaussian(run.zeta, het);
    if (run.noise == "scheme_b") return NoiseModel::scheme_b(run.lambda, run.sigma, run.h, het);
    if (run.noise == "scheme_c") return NoiseModel::scheme_c(run.lambda, run.sigma, run.h, het);
    throw ConfigError("run.noise: unknown noise model '" + run.noise + "'");
}

SchemeConfig make_scheme(const RunSection& run) {
    const auto het = run.heterogeneous ? NoiseModel::Heterogeneity::heterogeneous
                                       : NoiseModel::Heterogeneity::homogeneous;
    if (run.scheme == "generalized") {
        return SchemeConfig::generalized(run.gamma, make_noise(run));
    }
    if (run.scheme == "model_a") return SchemeConfig::model_a(run.lambda, run.sigma, run.h, het);
    if (run.scheme == "model_b") return SchemeConfig::model_b(run.lambda, run.sigma, run.h, het);
    if (run.scheme == "model_c") return SchemeConfig::model_c(run.lambda, run.sigma, run.h, het);
    throw ConfigError("run.scheme: unknown scheme '" + run.scheme + "'");
}

RepresentativeRule make_rule(const RunSection& run) {
    if (run.rule == "argmin") return RepresentativeRule::argmin();
    if (run.rule == "gibbs") return RepresentativeRule::gibbs(run.beta);
    throw ConfigError("run.rule: unknown rule '" + run.rule + "'");
}

} // namespace

RunConfig make_run_config(const ExperimentConfig& config) {
    RunConfig run;
    run.particles = config.run.particles;
    run.dimension = config.run.dimension;
    run.objective = make_objective(config.objective.name, config.run.dimension,
                                   config.objective.shift, config.objective.offset);
    run.rule = make_rule(config.run);
    run.scheme = make_scheme(config.run);
    run.batch_size = config.run.batch_size;
    run.max_steps = config.run.max_steps;
    run.tolerance = config.run.tolerance;
    run.init_lower = config.run.init_lower;
    run.init_upper = config.run.init_upper;
    run.record.diameters = config.record.diameters;
    run.record.best_objective = config.record.best_objective;
    run.record.snapshot_every = config.record.snapshot_every;
    run.record.transitions = config.record.transitions;
    validate(run);
    return run;
}

BenchmarkConfig make_benchmark_config(const ExperimentConfig& config, int jobs) {
    BenchmarkConfig bench;
    bench.base = make_run_config(config);
    bench.objective_name = config.objective.name;
    bench.objective_shift = config.objective.shift;
    bench.objective_offset = config.objective.offset;
    bench.dimensions = config.benchmark.dimensions;
    bench.batch_sizes = config.benchmark.batch_sizes;
    bench.replicates = config.benchmark.replicates;
    bench.success_threshold = config.benchmark.success_threshold;
    bench.base_seed = config.run.seed;
    bench.jobs = jobs;
    for (int d : bench.dimensions) {
        if (d < 1) throw ConfigError("benchmark.dimensions: entries must be >= 1");
    }
    for (int p : bench.batch_sizes) {
        if (p < 1 || p > bench.base.particles) {
            throw ConfigError("benchmark.batch_sizes: entries must satisfy 1 <= P <= N");
        }
    }
    return bench;
}

namespace {

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::string>> resolved_entries(const ExperimentConfig& c) {
    std::vector<std::pair<std::string, std::string>> entries;
    auto put = [&](const std::string& key, const std::string& value) {
        entries.emplace_back(key, value);
    };
    put("objective.name", c.objective.name);
    put("objective.shift", join_doubles(c.objective.shift));
    put("objective.offset", format_double(c.objective.offset));
    put("run.particles", std::to_string(c.run.particles));
    put("run.dimension", std::to_string(c.run.dimension));
    put("run.batch_size", std::to_string(c.run.batch_size));
    put("run.rule", c.run.rule);
    put("run.beta", format_double(c.run.beta));
    put("run.scheme", c.run.scheme);
    put("run.gamma", format_double(c.run.gamma));
    put("run.noise", c.run.noise);
    put("run.zeta", format_double(c.run.zeta));
    put("run.lambda", format_double(c.run.lambda));
    put("run.sigma", format_double(c.run.sigma));
    put("run.h", format_double(c.run.h));
    put("run.heterogeneous", c.run.heterogeneous ? "true" : "false");
    put("run.max_steps", std::to_string(c.run.max_steps));
    put("run.tolerance", format_double(c.run.tolerance));
    put("run.init_lower", format_double(c.run.init_lower));
    put("run.init_upper", format_double(c.run.init_upper));
    put("run.seed", std::to_string(c.run.seed));
    put("record.diameters", c.record.diameters ? "true" : "false");
    put("record.best_objective", c.record.best_objective ? "true" : "false");
    put("record.snapshot_every", std::to_string(c.record.snapshot_every));
    put("record.transitions", c.record.transitions ? "true" : "false");
    put("benchmark.dimensions", join_ints(c.benchmark.dimensions));
    put("benchmark.batch_sizes", join_ints(c.benchmark.batch_sizes));
    put("benchmark.replicates", std::to_string(c.benchmark.replicates));
    put("benchmark.success_threshold", format_double(c.benchmark.success_threshold));
    put("diagnostics.window_length", std::to_string(c.diagnostics.window_length));
    put("diagnostics.windows", std::to_string(c.diagnostics.windows));
    put("partition_stats.m0", std::to_string(c.partition_stats.m0));
    put("partition_stats.replicates", std::to_string(c.partition_stats.replicates));
    return entries;
}

std::string resolved_text(const ExperimentConfig& config) {
    std::string text;
    for (const auto& [key, value] : resolved_entries(config)) {
        text += key;
        text += " = ";
        text += value;
        text += '\n';
    }
    return text;
}

std::string config_hash(const ExperimentConfig& config) {
    return fnv1a_hex(resolved_text(config));
}

} // namespace cbo
