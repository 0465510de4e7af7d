// Copyright 2026 The kmips Authors.
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

#include <stdexcept>
#include <string>

namespace kmips {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (counts, ranges, dimension mismatches).
struct ArgumentError : Error {
    using Error::Error;
};

// File does not match the expected binary layout (bad magic, version, ...).
struct FormatError : Error {
    using Error::Error;
};

// Payload shorter or longer than the header declares.
struct LengthError : Error {
    using Error::Error;
};

// Non-finite values where finite reals are required.
struct DataError : Error {
    using Error::Error;
};

// Underlying I/O failure; message carries the path.
struct IoError : Error {
    using Error::Error;
};

// Input degenerate for the requested operation (e.g. all-zero vectors).
struct DegenerateDataError : Error {
    using Error::Error;
};

// Speedup target not reachable with the available hyperparameter range.
struct CalibrationError : Error {
    using Error::Error;
};

}  // namespace kmips
