#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace belief {

// Value outside the annotation scale.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Precondition on domain data violated (missing responses, unknown group, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Input too large for an enumeration oracle.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

class DesignError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::uint64_t sequence_no)
        : std::runtime_error(what), sequence_no_(sequence_no) {}
    std::uint64_t sequence_no() const noexcept { return sequence_no_; }

private:
    std::uint64_t sequence_no_;
};

class EmptyExportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace belief
