/*
 * Copyright (c) 2026 The vacgrip Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vacgrip {

/// Base of every domain error raised by the library. The CLI maps these to
/// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ChannelMismatch : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

class DesyncError : public Error {
 public:
  using Error::Error;
};

class StreamClosed : public Error {
 public:
  using Error::Error;
};

class EmptyEpisode : public Error {
 public:
  using Error::Error;
};

class SchemaVersionMismatch : public Error {
 public:
  using Error::Error;
};

/// A persisted record that cannot be parsed or fails validation. `index` is the
/// zero-based step index (-1 for the header record).
class CorruptRecord : public Error {
 public:
  CorruptRecord(long index, const std::string& what)
      : Error("corrupt record at step " + std::to_string(index) + ": " + what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

/// An in-memory episode that breaks a data invariant; `index` is the step
/// (-1 for episode-level problems).
class ValidationError : public Error {
 public:
  ValidationError(long index, const std::string& what)
      : Error(index < 0 ? what : "step " + std::to_string(index) + ": " + what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class LidAbsent : public Error {
 public:
  using Error::Error;
};

class SessionClosed : public Error {
 public:
  using Error::Error;
};

class BufferOverflow : public Error {
 public:
  using Error::Error;
};

class PrimitiveInfeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace vacgrip
