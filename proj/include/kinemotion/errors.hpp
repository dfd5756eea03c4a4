#pragma once

#include <stdexcept>
#include <string>

namespace kinemotion {

// Base class for all library errors so callers can catch one type at the CLI
// boundary.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A text input (CSV, JSON) failed to parse. `line` and `column` are 1-based;
// for CSV input `column` is the field index.
struct ParseError : Error {
    ParseError(const std::string& what, int line_, int column_)
        : Error(what + " (line " + std::to_string(line_) + ", column " +
                std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
    int line = 0;
    int column = 0;
};

// The two Stiefel column seeds are (numerically) parallel or zero, so no
// rotation can be recovered.
struct DegenerateStiefel : Error {
    using Error::Error;
};

// A pose or dataset does not match the skeleton it is being used with.
struct TopologyMismatch : Error {
    using Error::Error;
};

// Tensor/vector shapes disagree (packed widths, window lengths, ...).
struct DimensionMismatch : Error {
    using Error::Error;
};

// Two sequences/vectors that must be compared elementwise have different
// shapes (loss and metric inputs).
struct ShapeMismatch : Error {
    using Error::Error;
};

// Spatial attention needs at least three frames (velocity and acceleration
// differences).
struct TooFewFrames : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct UnknownPreset : Error {
    using Error::Error;
};

// Training aborted: the loss became NaN/inf at `iteration`.
struct NonFiniteLoss : Error {
    NonFiniteLoss(int iteration_)
        : Error("loss became non-finite at iteration " +
                std::to_string(iteration_)),
          iteration(iteration_) {}
    int iteration = 0;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace kinemotion
