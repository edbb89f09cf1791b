#pragma once

#include <stdexcept>
#include <string>

namespace lightlike {

// Malformed or inconsistent user input (spec text, flags, constraint violations).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Spec-file syntax or resolution error, carrying a 1-based source position.
class SyntaxError : public InputError {
public:
    SyntaxError(const std::string& what, int line, int column)
        : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// A computation that could not be completed numerically (non-finite values,
// rank loss, degenerate metric where a nondegenerate one is required).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::string stage = {})
        : std::runtime_error(what), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Thrown when a frozen pivot sequence no longer applies at a nearby point.
class FrozenPivotLost : public NumericalError {
public:
    explicit FrozenPivotLost(const std::string& what)
        : NumericalError(what, "frame_field") {}
};

// Indefinite orthonormalization hit a null direction.
class DegenerateMetricError : public NumericalError {
public:
    explicit DegenerateMetricError(const std::string& what)
        : NumericalError(what, "orthonormalize") {}
};

} // namespace lightlike
