// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace divbar {

/// Input failed a documented precondition.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The smooth-fit function q never changed sign on the scan range.
class NoBoundaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An assembled solution failed one of its post-construction checks.
class ConstructionError : public std::runtime_error {
public:
    ConstructionError(std::string check, std::string const& detail)
        : std::runtime_error(check + ": " + detail), check_(std::move(check))
    {
    }

    std::string const& check() const noexcept { return check_; }

private:
    std::string check_;
};

/// Malformed or invalid configuration document.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace divbar
