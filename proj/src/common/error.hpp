// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace jointvid {

/// Failure category. The C API maps these onto its status codes and the CLI
/// onto process exit codes.
enum class ErrorKind {
    InvalidArgument,
    Config,
    Io,
    Stage,
    Numeric,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace jointvid
