// Copyright 2026 The lowprev Authors
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

#ifndef LOWPREV_ERROR_HPP
#define LOWPREV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lowprev {

/// Coarse classification used by callers (the CLI maps these to exit codes).
enum class ErrorKind {
  /// A precondition was violated: dimension mismatch, point outside the domain, bad parameter.
  domain,
  /// The numbers went bad at run time, e.g. every importance weight underflowed.
  numerical,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_domain_error(const std::string& what) {
  throw Error(ErrorKind::domain, what);
}

[[noreturn]] inline void throw_numerical_error(const std::string& what) {
  throw Error(ErrorKind::numerical, what);
}

}  // namespace lowprev

#endif  // LOWPREV_ERROR_HPP
