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

#ifndef SYNTHPARSE_ADAPTER_H_
#define SYNTHPARSE_ADAPTER_H_

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace synthparse {

// Client side of the model-adapter HTTP protocol:
//   POST /score       {"utterances": [...]} -> {"results": [{"logprob", "token_count"}]}
//   POST /paraphrase  {"utterance", "beam", "wh_prefixes"} -> {"candidates": [...]}
//   GET  /health      -> {"status": "ok", "models": {...}}
// Connection failures, non-200 statuses and schema mismatches raise
// TransportError, except that health() reports a non-200 status in its
// result instead.
class AdapterClient {
 public:
  struct Options {
    std::chrono::milliseconds timeout{30'000};
    int retries = 0;
  };

  struct ScoreItem {
    double logprob = 0.0;
    std::size_t token_count = 0;
  };

  struct Health {
    int status = 0;  // HTTP status
    bool ok = false;
    std::string body;
  };

  explicit AdapterClient(std::string base_url);
  AdapterClient(std::string base_url, Options options);
  ~AdapterClient();
  AdapterClient(AdapterClient&&) noexcept;
  AdapterClient& operator=(AdapterClient&&) noexcept;

  const std::string& base_url() const { return base_url_; }

  std::vector<ScoreItem> score(const std::vector<std::string>& utterances);
  std::vector<std::string> paraphrase(
      const std::string& utterance, std::size_t beam,
      const std::optional<std::vector<std::string>>& wh_prefixes);
  Health health();

 private:
  struct Impl;
  std::string base_url_;
  std::unique_ptr<Impl> impl_;
};

// Base URL from SYNTHPARSE_ADAPTER_URL when set and non-empty, otherwise
// `fallback`.
std::string adapter_url_from_env(const std::string& fallback);

}  // namespace synthparse

#endif  // SYNTHPARSE_ADAPTER_H_
