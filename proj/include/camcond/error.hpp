// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace camcond {

/// Error categories, numbered to match the CLI exit codes.
enum class ErrorKind {
    Usage = 1,     ///< bad command line
    Format = 2,    ///< unreadable/invalid input files, I/O failures
    Contract = 3,  ///< precondition or invariant violations
    Numeric = 4,   ///< undefined metrics, impossible calibrations
};

/// Base exception. what() is the single-line "error_code: message" form
/// the CLI prints on failure.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
    std::string code_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error(ErrorKind::Usage, "usage", m) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error(ErrorKind::Format, "format", m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorKind::Format, "io", m) {}
};

struct ContractError : Error {
    explicit ContractError(const std::string& m) : Error(ErrorKind::Contract, "contract", m) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& m) : Error(ErrorKind::Numeric, "numeric", m) {}
};

}  // namespace camcond
