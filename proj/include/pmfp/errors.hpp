#pragma once

#include <stdexcept>
#include <string>

namespace pmfp {

/// Base class of everything this library throws on purpose.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed expression source. Carries the byte offset of the first
/// offending character.
class parse_error : public error {
public:
    parse_error(const std::string& msg, std::size_t offset)
        : error(msg + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Arithmetic failure while evaluating an expression (division by zero,
/// sqrt of a negative number, non-finite result, ...).
class eval_error : public error {
public:
    using error::error;
};

/// A point was used that does not belong to the carrier.
class domain_error : public error {
public:
    using error::error;
};

/// A distance expression produced a negative, NaN or infinite value.
class invalid_metric_error : public error {
public:
    using error::error;
};

/// A map sent a carrier point outside the carrier, or no guard matched.
class not_self_map_error : public error {
public:
    not_self_map_error(const std::string& msg, double point, double image)
        : error(msg), point_(point), image_(image) {}

    double point() const noexcept { return point_; }
    double image() const noexcept { return image_; }

private:
    double point_;
    double image_;
};

/// Invalid argument to an operation (empty sample, non-positive radius, ...).
class input_error : public error {
public:
    using error::error;
};

/// f never reaches the queried value below the bracket cap.
class range_error : public error {
public:
    using error::error;
};

/// Numerical evidence that a comparison-function hypothesis is violated
/// (typically non-monotone f detected mid-bisection).
class hypothesis_error : public error {
public:
    using error::error;
};

}  // namespace pmfp
