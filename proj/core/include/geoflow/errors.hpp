#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

/// Two operands were defined on different grids.
class GridMismatch : public std::invalid_argument {
public:
    explicit GridMismatch(const std::string &where)
        : std::invalid_argument(where + ": operands are defined on different grids") {}
};

/// Tensor, channel or layer shapes do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A time integrator produced a non-finite value.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string &what, int step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

/// Malformed on-disk data. `kind()` distinguishes the failure.
class FormatError : public std::runtime_error {
public:
    enum class Kind { BadMagic, BadVersion, Truncated, DimOverflow, Io, Schema };

    FormatError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Non-finite loss or unrecoverable state during training.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace geoflow
