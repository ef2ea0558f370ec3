// Copyright (c) 2026 The articodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace articodec {

// Failure classes map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kUsage = 1,         // bad arguments or configuration
  kData = 2,          // malformed or inconsistent input data
  kMissingAsset = 3,  // model asset, checkpoint or plug-in not available
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& what) {
  return Error(ErrorKind::kUsage, what);
}
inline Error data_error(const std::string& what) {
  return Error(ErrorKind::kData, what);
}
inline Error missing_asset(const std::string& what) {
  return Error(ErrorKind::kMissingAsset, what);
}

// Structured parse failure for the binary containers. `field` names the
// header field or section that failed validation.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(ErrorKind::kData, what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace articodec
