// Copyright 2026 The dyntemp Authors
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

namespace dyntemp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (non-finite logits, empty corpus, bad flags).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument outside the domain of the function (t <= 0, negative entropy).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized model; carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A failure inside the generation loop; carries the step that failed.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t step)
      : Error("decode failed at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// An upstream invariant was violated (e.g. sampling from an all-zero distribution).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dyntemp
