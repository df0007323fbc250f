// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace pickpoint {

/// Error raised for invalid inputs, malformed files and contract violations.
/// The CLI maps it to exit code 2 (usage/input error).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Human-readable diagnostics go to stderr, never stdout (stdout carries
/// machine-readable summaries only).
inline void log_warning(const std::string& msg) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

}  // namespace pickpoint
