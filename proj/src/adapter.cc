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

#include "synthparse/adapter.h"

#include <cmath>
#include <cstdlib>
#include <mutex>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "synthparse/errors.h"

namespace synthparse {

using Json = nlohmann::json;

struct AdapterClient::Impl {
  Impl(const std::string& url, Options opts) : client(url), options(opts) {
    const auto ms = options.timeout.count();
    client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_write_timeout(ms / 1000, (ms % 1000) * 1000);
  }

  httplib::Result post(const std::string& path, const std::string& body) {
    std::lock_guard lock(mu);
    httplib::Result res = client.Post(path, body, "application/json");
    for (int i = 0; i < options.retries && !res; ++i) {
      res = client.Post(path, body, "application/json");
    }
    return res;
  }

  httplib::Result get(const std::string& path) {
    std::lock_guard lock(mu);
    return client.Get(path);
  }

  httplib::Client client;
  Options options;
  std::mutex mu;
};

AdapterClient::AdapterClient(std::string base_url)
    : AdapterClient(std::move(base_url), Options{}) {}

AdapterClient::AdapterClient(std::string base_url, Options options)
    : base_url_(std::move(base_url)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.rfind("http://", 0) != 0) {
    throw UsageError(
        fmt::format("adapter url '{}' must start with http://", base_url_));
  }
  impl_ = std::make_unique<Impl>(base_url_, options);
  if (!impl_->client.is_valid()) {
    throw UsageError(fmt::format("invalid adapter url '{}'", base_url_));
  }
}

AdapterClient::~AdapterClient() = default;
AdapterClient::AdapterClient(AdapterClient&&) noexcept = default;
AdapterClient& AdapterClient::operator=(AdapterClient&&) noexcept = default;

namespace {

Json checked_json(const httplib::Result& res, const std::string& url,
                  const char* path) {
  if (!res) {
    throw TransportError(fmt::format("{}{}: {}", url, path,
                                     httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw TransportError(
        fmt::format("{}{}: HTTP {}: {}", url, path, res->status, res->body));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::exception& e) {
    throw TransportError(
        fmt::format("{}{}: malformed response: {}", url, path, e.what()));
  }
}

}  // namespace

std::vector<AdapterClient::ScoreItem> AdapterClient::score(
    const std::vector<std::string>& utterances) {
  const Json request = {{"utterances", utterances}};
  const Json body =
      checked_json(impl_->post("/score", request.dump()), base_url_, "/score");
  std::vector<ScoreItem> out;
  try {
    const Json& results = body.at("results");
    if (!results.is_array() || results.size() != utterances.size()) {
      throw TransportError(fmt::format(
          "{}/score: expected {} results, got {}", base_url_,
          utterances.size(), results.is_array() ? results.size() : 0));
    }
    for (const auto& r : results) {
      ScoreItem item;
      item.logprob = r.at("logprob").get<double>();
      const auto count = r.at("token_count").get<long long>();
      if (!std::isfinite(item.logprob) || count < 0) {
        throw TransportError(
            fmt::format("{}/score: invalid result {}", base_url_, r.dump()));
      }
      item.token_count = static_cast<std::size_t>(count);
      out.push_back(item);
    }
  } catch (const Json::exception& e) {
    throw TransportError(
        fmt::format("{}/score: schema mismatch: {}", base_url_, e.what()));
  }
  return out;
}

std::vector<std::string> AdapterClient::paraphrase(
    const std::string& utterance, std::size_t beam,
    const std::optional<std::vector<std::string>>& wh_prefixes) {
  Json request = {{"utterance", utterance}, {"beam", beam}};
  request["wh_prefixes"] = wh_prefixes ? Json(*wh_prefixes) : Json(nullptr);
  const Json body = checked_json(impl_->post("/paraphrase", request.dump()),
                                 base_url_, "/paraphrase");
  try {
    auto out = body.at("candidates").get<std::vector<std::string>>();
    if (out.size() > beam) {
      throw TransportError(fmt::format(
          "{}/paraphrase: {} candidates exceed beam {}", base_url_,
          out.size(), beam));
    }
    return out;
  } catch (const Json::exception& e) {
    throw TransportError(fmt::format("{}/paraphrase: schema mismatch: {}",
                                     base_url_, e.what()));
  }
}

AdapterClient::Health AdapterClient::health() {
  Health h;
  const httplib::Result res = impl_->get("/health");
  if (!res) {
    throw TransportError(fmt::format("{}/health: {}", base_url_,
                                     httplib::to_string(res.error())));
  }
  h.status = res->status;
  h.body = res->body;
  if (res->status == 200) {
    try {
      const Json j = Json::parse(res->body);
      h.ok = j.value("status", "") == "ok";
    } catch (const Json::exception&) {
      h.ok = false;
    }
  }
  return h;
}

std::string adapter_url_from_env(const std::string& fallback) {
  const char* env = std::getenv("SYNTHPARSE_ADAPTER_URL");
  if (env != nullptr && *env != '\0') return env;
  return fallback;
}

}  // namespace synthparse
