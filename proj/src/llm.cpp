#include "researchagent/llm.hpp"

#include <filesystem>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"

#ifndef RA_NO_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace ra {

using nlohmann::json;

std::string ChatRequest::digest() const {
  // length-prefixed field concatenation so no two field tuples collide
  // structurally; temperature serialized with full precision
  std::ostringstream ss;
  auto field = [&ss](const std::string& v) { ss << v.size() << ':' << v << ';'; };
  field(system_message);
  field(user_message);
  field(model_name);
  ss.precision(17);
  ss << temperature << ';' << max_output_tokens;
  return to_hex(fnv1a64(ss.str()));
}

ChatClient::ChatClient(Options opts) : opts_(std::move(opts)) {
  if (opts_.backend != Backend::Live && opts_.cache_dir.empty()) {
    throw Error(ErrorCode::InvalidInput,
                "cache/replay backend requires a cache directory");
  }
}

std::string ChatClient::cache_path(const std::string& digest) const {
  return opts_.cache_dir + "/" + digest + ".txt";
}

long ChatClient::calls_total() const {
  std::lock_guard lock(mu_);
  return total_;
}

long ChatClient::calls_live() const {
  std::lock_guard lock(mu_);
  return live_;
}

Completion ChatClient::complete(const ChatRequest& req) {
  if (req.system_message.empty() && req.user_message.empty()) {
    throw Error(ErrorCode::InvalidInput, "empty chat request");
  }
  const std::string digest = req.digest();
  const auto started = std::chrono::steady_clock::now();
  Completion c;

  switch (opts_.backend) {
    case Backend::Replay: {
      const std::string path = cache_path(digest);
      if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::ReplayMiss, "replay miss for digest " + digest);
      }
      c.text = read_file(path);
      c.backend = Backend::Replay;
      break;
    }
    case Backend::Cache: {
      const std::string path = cache_path(digest);
      if (std::filesystem::exists(path)) {
        c.text = read_file(path);
        c.backend = Backend::Cache;
      } else {
        c.text = live_call(req);
        c.backend = Backend::Live;
        write_file_atomic(path, c.text);
      }
      break;
    }
    case Backend::Live: {
      c.text = live_call(req);
      c.backend = Backend::Live;
      break;
    }
  }

  c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  {
    std::lock_guard lock(mu_);
    ++total_;
    if (c.backend == Backend::Live) ++live_;
    const char* b = c.backend == Backend::Live    ? "live"
                    : c.backend == Backend::Cache ? "cache"
                                                  : "replay";
    log_.push_back(std::string(b) + " " + digest);
  }
  return c;
}

std::string ChatClient::live_call(const ChatRequest& req) {
  if (opts_.base_url.empty()) {
    throw Error(ErrorCode::InvalidInput, "live backend requires a base URL");
  }
  json body;
  body["model"] = req.model_name;
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_output_tokens;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", req.system_message}},
      json{{"role", "user"}, {"content", req.user_message}},
  });

  httplib::Client client(opts_.base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!opts_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + opts_.api_key);
  }

  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, opts_.max_retries); ++attempt) {
    if (attempt > 0) {
      const double delay = opts_.backoff_base_seconds * (1 << (attempt - 1));
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(delay * 1000)));
    }
    auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      if (res->status >= 400 && res->status < 500 && res->status != 429) break;
      continue;
    }
    try {
      json j = json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("malformed completion response: ") + e.what();
      break;
    }
  }
  throw Error(ErrorCode::TransportError, last_error);
}

}  // namespace ra
