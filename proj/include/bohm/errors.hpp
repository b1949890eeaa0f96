#pragma once

/**
 * @file errors.hpp
 * @brief Exception types shared by the models, numerics and the CLI.
 */

#include <stdexcept>
#include <string>

namespace bohm {

/// Evaluation outside the domain of a model: a node of the wavefunction,
/// a slit point, or an undefined phase.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parameter set for which a formula is degenerate (e.g. a == b where the
/// relative-coordinate solution divides by a^2 - b^2).
class DegenerateParameters : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bracketed root search called on an interval without a sign change.
class NoSignChange : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Too few usable samples for a statistical comparison.
class InsufficientSamples : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace bohm
