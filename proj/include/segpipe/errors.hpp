// Copyright 2026 The segpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace segpipe {

// Base of every error thrown by the library. The CLI maps subclasses to
// exit codes, so new error kinds should derive from one of the groups below.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shapes that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Spatial sizes that do not divide (conv output size, encoder stride).
class GeometryError : public Error {
public:
    using Error::Error;
};

// Out-of-range scalar parameter (alpha, factor, ratio, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// NaN/Inf where finite values are required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Class index outside [0, num_classes).
class LabelError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent data (empty input, mismatched rasters, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Malformed image file. Carries the byte offset where parsing stopped.
class FormatError : public DataError {
public:
    FormatError(const std::string& what, std::size_t offset)
        : DataError(what + " (at byte " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t offset_;
};

class CheckpointError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

// Bad configuration file or flag value. Treated as a usage error.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergedError : public Error {
public:
    DivergedError(std::size_t epoch, std::size_t batch)
        : Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                ", batch " + std::to_string(batch)),
          epoch_(epoch),
          batch_(batch) {}

    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

}  // namespace segpipe
