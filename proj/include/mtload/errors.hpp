#pragma once

#include <stdexcept>
#include <string>

namespace mtload {

// Caller passed something outside an operation's domain.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Gravity overwhelms the magnetic confinement; the density does not normalize.
class UntrappedCloud : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Loading with no loss channel never reaches a steady state.
class NoSteadyState : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Base for numeric failures (exit code 3 in the CLI).
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationFailure : public NumericFailure {
public:
    IntegrationFailure(const std::string& what, double t, double step)
        : NumericFailure(what + " (t = " + std::to_string(t) + " s, step = " + std::to_string(step) + " s)"),
          time(t), last_step(step) {}

    double time;
    double last_step;
};

}  // namespace mtload
