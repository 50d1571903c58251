#pragma once

#include <stdexcept>
#include <string>

namespace npr {

// Shapes or indices that do not line up (W vs X, provenance vs design, ...).
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The data or the optimizer could not produce a usable model.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateDesign : ModelError {
    using ModelError::ModelError;
};

struct SeparationError : ModelError {
    using ModelError::ModelError;
};

struct SingularMatrix : ModelError {
    using ModelError::ModelError;
};

struct ConvergenceError : ModelError {
    using ModelError::ModelError;
};

// A file could not be opened, read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries a 1-based location when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, long row, long column, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(row) + ":" + std::to_string(column) + ": " + what),
          row_(row),
          column_(column) {}

    long row() const { return row_; }
    long column() const { return column_; }

private:
    long row_;
    long column_;
};

}  // namespace npr
