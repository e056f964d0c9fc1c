// Shared test scaffolding: source-tree paths, temp dirs, and an in-process
// deterministic chat-completions server used to record replay fixtures.
#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>

#include <json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "researchagent/text.hpp"

namespace testsupport {

inline std::string source_dir() {
  const char* d = std::getenv("RA_SOURCE_DIR");
  return d ? d : ".";
}

inline std::string fixture(const std::string& rel) {
  return source_dir() + "/tests/fixtures/" + rel;
}

inline std::string golden(const std::string& rel) {
  return source_dir() + "/tests/golden/" + rel;
}

inline std::string template_dir() { return source_dir() + "/data/templates"; }

inline std::string criteria_file() {
  return source_dir() + "/data/criteria/default_criteria.json";
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<unsigned> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("ra_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// Deterministic stand-in for a chat-completions endpoint. Routes on system
// message markers; review ratings derive from a hash of the user message so
// reruns agree byte-for-byte.
class ScriptedChatServer {
 public:
  ScriptedChatServer() {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handle(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~ScriptedChatServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  long requests() const { return requests_.load(); }

 private:
  static bool contains(const std::string& hay, const char* needle) {
    return hay.find(needle) != std::string::npos;
  }

  static std::string reply_for(const std::string& system,
                               const std::string& user) {
    const std::string tag =
        ra::to_hex(ra::fnv1a64(user)).substr(0, 8);  // per-prompt marker
    if (contains(system, "identify promising, new, and key scientific problems")) {
      return "Problem: How to improve sample efficiency in setting " + tag +
             "?\nRationale: The target paper leaves gap " + tag + " open.";
    }
    if (contains(system, "propose innovative, rigorous, and valid methodologies")) {
      return "Method: Apply contrastive pretraining variant " + tag +
             ".\nRationale: Directly addresses the stated problem (" + tag + ").";
    }
    if (contains(system, "design robust, feasible, and impactful experiments")) {
      return "Experiment: Benchmark on three datasets with protocol " + tag +
             ".\nRationale: Isolates the method's contribution (" + tag + ").";
    }
    if (contains(system, "assess the quality and validity of scientific problems") ||
        contains(system, "assess the quality and soundness of scientific methods") ||
        contains(system, "meticulously evaluate the experimental designs")) {
      const int rating = 1 + static_cast<int>(ra::fnv1a64(user) % 5);
      return "Review: The submission is coherent (case " + tag +
             ").\nFeedback: Tighten the evaluation plan (" + tag +
             ").\nRating (1-5): " + std::to_string(rating);
    }
    if (contains(system, "distill human evaluation standards")) {
      return "1: Fails the bar entirely (" + tag + ").\n2: Major gaps.\n"
             "3: Adequate but unremarkable.\n4: Strong with minor flaws.\n"
             "5: Exemplary on every axis.";
    }
    if (contains(system, "judge pairs of research ideas")) {
      // position-independent "preference": lexicographically smaller idea
      // text wins, so mirrored presentations agree on the real winner
      const auto p1 = user.find("Idea 1:\n");
      const auto p2 = user.find("\n\nIdea 2:\n");
      const auto end = user.find("\n\nAfter", p2 == std::string::npos ? 0 : p2);
      if (p1 == std::string::npos || p2 == std::string::npos ||
          end == std::string::npos) {
        return "I cannot decide.";
      }
      const std::string one = user.substr(p1 + 8, p2 - (p1 + 8));
      const std::string two = user.substr(p2 + 10, end - (p2 + 10));
      return one <= two ? "Better: Idea 1" : "Better: Idea 2";
    }
    if (contains(system, "extracts scientific entities")) {
      return "transformer\nattention mechanism\ntransformer\nfine-tuning";
    }
    return "Unrecognized prompt kind (" + tag + ")";
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    nlohmann::json body = nlohmann::json::parse(req.body);
    std::string system, user;
    for (const auto& msg : body.at("messages")) {
      if (msg.at("role") == "system") system = msg.at("content");
      if (msg.at("role") == "user") user = msg.at("content");
    }
    nlohmann::json out;
    out["choices"] = nlohmann::json::array(
        {{{"message", {{"role", "assistant"}, {"content", reply_for(system, user)}}}}});
    res.set_content(out.dump(), "application/json");
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<long> requests_{0};
};

}  // namespace testsupport
