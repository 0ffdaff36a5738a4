#ifndef CBO_ERRORS_HPP
#define CBO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cbo {

/// Invalid configuration value (bad parameter range, malformed config file).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// API misuse: index out of range, missing recorded series, empty input.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested exact computation exceeds a configured enumeration cap.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// A trajectory produced a non-finite state; carries the offending step.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(long step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

} // namespace cbo

#endif
