// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace geossf {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or size mismatch between operands (includes too-short inputs).
struct DimensionError : Error {
  using Error::Error;
};

// Malformed or unsupported file contents.
struct FormatError : Error {
  using Error::Error;
};

// Invalid, inconsistent, or unsatisfiable configuration, including
// shape-contract violations detected at construction time.
struct ConfigError : Error {
  using Error::Error;
};

// Source or microphone placed outside the room.
struct PlacementError : Error {
  using Error::Error;
};

// Degenerate input that leaves an operation undefined (reference axis
// through the centroid, zero-power source, zero reference signal).
struct DegenerateError : Error {
  using Error::Error;
};

// NaN or other numeric failure encountered mid-computation.
struct NumericError : Error {
  using Error::Error;
};

// Filesystem-level failure (unwritable path, missing file).
struct IoError : Error {
  using Error::Error;
};

// Checkpoint/dataset mismatch (different M or F).
struct CompatibilityError : Error {
  using Error::Error;
};

}  // namespace geossf
