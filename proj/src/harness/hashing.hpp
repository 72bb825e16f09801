// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace jointvid::harness {

/// Lower-case hex SHA-256 digests.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);
/// Digest over every regular file below `dir`: sorted relative paths and
/// contents. A missing directory hashes as the empty string.
std::string sha256_tree(const std::string& dir);

/// Stable fraction in [0, 1) derived from a string.
double stable_fraction(std::string_view key);

}  // namespace jointvid::harness
