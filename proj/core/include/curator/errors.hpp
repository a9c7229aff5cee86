/*
 * Copyright 2026 The Curator Authors
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

namespace curator {

/// Base of every error thrown by the library.
class CuratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A manifest line failed to parse or violated a record invariant.
class ManifestError : public CuratorError {
 public:
  ManifestError(const std::string& path, std::size_t line, const std::string& what)
      : CuratorError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidArgument : public CuratorError {
 public:
  using CuratorError::CuratorError;
};

}  // namespace curator
