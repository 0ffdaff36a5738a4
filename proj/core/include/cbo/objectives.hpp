#ifndef CBO_OBJECTIVES_HPP
#define CBO_OBJECTIVES_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cbo {

/// Deterministic objective function on R^d. Evaluation must return a finite
/// value for finite input. Implementations are immutable after construction
/// and safe to evaluate concurrently.
class Objective {
public:
    virtual ~Objective() = default;
    virtual int dimension() const = 0;
    virtual double value(std::span<const double> x) const = 0;
};

/// Shifted Rastrigin parameters: minimizer `shift` (value there is exactly
/// `offset`), dimension-normalized sum of the classic summands.
struct RastriginSpec {
    int dimension = 1;
    std::vector<double> shift;   // size == dimension
    double offset = 0.0;
};

/// (1/d) * sum_i [(x_i - B_i)^2 - 10 cos(2 pi (x_i - B_i)) + 10] + C
double rastrigin(std::span<const double> x, const RastriginSpec& spec);

/// sum_i (x_i - shift_i)^2
double sphere(std::span<const double> x, std::span<const double> shift);

class RastriginObjective final : public Objective {
public:
    explicit RastriginObjective(RastriginSpec spec);
    int dimension() const override { return spec_.dimension; }
    double value(std::span<const double> x) const override { return rastrigin(x, spec_); }
    const RastriginSpec& spec() const { return spec_; }
    const std::vector<double>& minimizer() const { return spec_.shift; }

private:
    RastriginSpec spec_;
};

class SphereObjective final : public Objective {
public:
    SphereObjective(int dimension, std::vector<double> shift);
    int dimension() const override { return dimension_; }
    double value(std::span<const double> x) const override { return sphere(x, shift_); }
    const std::vector<double>& minimizer() const { return shift_; }

private:
    int dimension_;
    std::vector<double> shift_;
};

/// Factory used by the config layer. `name` is "rastrigin" or "sphere";
/// `shift` is broadcast to `dimension` entries when it holds a single value.
std::shared_ptr<const Objective> make_objective(const std::string& name, int dimension,
                                                std::vector<double> shift, double offset);

/// Known global minimizer of a factory-built objective.
std::vector<double> objective_minimizer(const Objective& objective);

} // namespace cbo

#endif
