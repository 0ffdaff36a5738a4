#include "cbo/objectives.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "cbo/errors.hpp"

namespace cbo {

double rastrigin(std::span<const double> x, const RastriginSpec& spec) {
    if (static_cast<int>(x.size()) != spec.dimension ||
        static_cast<int>(spec.shift.size()) != spec.dimension) {
        throw ConfigError("rastrigin: dimension mismatch");
    }
    double sum = 0.0;
    for (int i = 0; i < spec.dimension; ++i) {
        double t = x[i] - spec.shift[i];
        sum += t * t - 10.0 * std::cos(2.0 * std::numbers::pi * t) + 10.0;
    }
    return sum / static_cast<double>(spec.dimension) + spec.offset;
}

double sphere(std::span<const double> x, std::span<const double> shift) {
    if (x.size() != shift.size()) {
        throw ConfigError("sphere: dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double t = x[i] - shift[i];
        sum += t * t;
    }
    return sum;
}

RastriginObjective::RastriginObjective(RastriginSpec spec) : spec_(std::move(spec)) {
    if (spec_.dimension < 1) {
        throw ConfigError("rastrigin: dimension must be >= 1");
    }
    if (static_cast<int>(spec_.shift.size()) != spec_.dimension) {
        throw ConfigError("rastrigin: shift size does not match dimension");
    }
}

SphereObjective::SphereObjective(int dimension, std::vector<double> shift)
    : dimension_(dimension), shift_(std::move(shift)) {
    if (dimension_ < 1) {
        throw ConfigError("sphere: dimension must be >= 1");
    }
    if (static_cast<int>(shift_.size()) != dimension_) {
        throw ConfigError("sphere: shift size does not match dimension");
    }
}

std::shared_ptr<const Objective> make_objective(const std::string& name, int dimension,
                                                std::vector<double> shift, double offset) {
    if (dimension < 1) {
        throw ConfigError("objective: dimension must be >= 1");
    }
    if (shift.size() == 1 && dimension > 1) {
        shift.assign(static_cast<std::size_t>(dimension), shift[0]);
    }
    if (static_cast<int>(shift.size()) != dimension) {
        throw ConfigError("objective: shift must have 1 or `dimension` entries");
    }
    if (name == "rastrigin") {
        return std::make_shared<RastriginObjective>(
            RastriginSpec{dimension, std::move(shift), offset});
    }
    if (name == "sphere") {
        return std::make_shared<SphereObjective>(dimension, std::move(shift));
    }
    throw ConfigError("objective: unknown name '" + name + "'");
}

std::vector<double> objective_minimizer(const Objective& objective) {
    if (const auto* r = dynamic_cast<const RastriginObjective*>(&objective)) {
        return r->minimizer();
    }
    if (const auto* s = dynamic_cast<const SphereObjective*>(&objective)) {
        return s->minimizer();
    }
    throw UsageError("objective_minimizer: minimizer unknown for this objective");
}

} // namespace cbo
