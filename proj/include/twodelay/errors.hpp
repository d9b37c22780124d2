#pragma once

#include <stdexcept>
#include <string>

namespace twodelay {

/// Invalid model, solver or analysis parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The integrated state became non-finite or left the divergence guard.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double time, int component, const std::string& what)
        : std::runtime_error(what), time_(time), component_(component) {}

    double time() const noexcept { return time_; }
    /// Index of the offending state component (0 for scalar systems).
    int component() const noexcept { return component_; }

private:
    double time_;
    int component_;
};

/// A dense-output lookup asked for a time the solver has not reached.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Time-series analysis could not run on the supplied data.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace twodelay
