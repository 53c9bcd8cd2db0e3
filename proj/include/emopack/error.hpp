// Copyright 2026 The emopack Authors
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

namespace emopack {

// Bad configuration such as a missing file or an out-of-range option.
// Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data, e.g. a malformed manifest or unreadable audio. Maps to
// CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A postcondition the library guarantees did not hold. Maps to CLI exit
// code 4.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace emopack
