#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ra {

struct ChatRequest {
  std::string system_message;
  std::string user_message;
  std::string model_name;
  double temperature = 1.0;
  int max_output_tokens = 2048;

  // Stable digest over every field; any change changes the digest.
  std::string digest() const;
};

enum class Backend { Live, Cache, Replay };

struct Completion {
  std::string text;
  Backend backend = Backend::Replay;
  std::chrono::milliseconds latency{0};
};

inline constexpr double kGenerationTemperature = 1.0;
inline constexpr double kReviewTemperature = 0.0;

// Single-turn chat-completions client. The only module that ever opens a
// network connection.
class ChatClient {
 public:
  struct Options {
    Backend backend = Backend::Replay;
    std::string base_url;    // live/cache: chat-completions endpoint
    std::string api_key;     // from environment, never logged
    std::string cache_dir;   // cache: store; replay: read-only source
    int max_retries = 3;
    double backoff_base_seconds = 1.0;
  };

  explicit ChatClient(Options opts);
  virtual ~ChatClient() = default;

  virtual Completion complete(const ChatRequest& req);

  // Per-backend call counters, for call-budget audits.
  long calls_total() const;
  long calls_live() const;
  const std::vector<std::string>& access_log() const { return log_; }

 protected:
  ChatClient() = default;

 private:
  std::string live_call(const ChatRequest& req);
  std::string cache_path(const std::string& digest) const;

  Options opts_;
  mutable std::mutex mu_;
  long total_ = 0;
  long live_ = 0;
  std::vector<std::string> log_;  // "<backend> <digest>" per call
};

}  // namespace ra
