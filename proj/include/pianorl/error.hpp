// Copyright 2026 The pianorl Authors
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

#ifndef PIANORL_ERROR_HPP_
#define PIANORL_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pianorl {

// Every library failure derives from Error. The CLI maps the concrete type
// onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Misuse of an API (stepping a finished episode, bad argument ranges).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or config value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : ConfigError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class SongFormatError : public ConfigError {
 public:
  SongFormatError(const std::string& what, int line)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ChecksumError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class VersionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Plant timeout or bridge protocol violation.
class PlantError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public PlantError {
 public:
  using PlantError::PlantError;
};

// Non-finite state or loss.
class NumericalFault : public Error {
 public:
  using Error::Error;
};

}  // namespace pianorl

#endif  // PIANORL_ERROR_HPP_
