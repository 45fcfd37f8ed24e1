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

#ifndef SYNTHPARSE_IO_H_
#define SYNTHPARSE_IO_H_

#include <string>
#include <string_view>

namespace synthparse::io {

std::string read_file(const std::string& path);

// Writes `contents` to a temporary file next to `path`, then renames it.
void write_file_atomic(const std::string& path, std::string_view contents);

// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

}  // namespace synthparse::io

#endif  // SYNTHPARSE_IO_H_
