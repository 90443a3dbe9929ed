// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace treeskel {

/// Bad input: unreadable files, malformed records, violated preconditions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure; the message names the line or byte offset.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Degenerate geometry or solver failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace treeskel
