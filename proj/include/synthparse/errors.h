// Copyright 2026 The synthparse Authors.
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

#ifndef SYNTHPARSE_ERRORS_H_
#define SYNTHPARSE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace synthparse {

// Base for every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  int line_;
  int column_;
};

class GrammarError : public Error {
 public:
  using Error::Error;
};

class ProgramError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or violated precondition of a library operation.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Failure talking to an external process or service.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace synthparse

#endif  // SYNTHPARSE_ERRORS_H_
