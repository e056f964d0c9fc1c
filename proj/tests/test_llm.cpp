#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "researchagent/errors.hpp"
#include "researchagent/llm.hpp"
#include "researchagent/text.hpp"
#include "support/helpers.hpp"

using namespace ra;

namespace {

ChatRequest make_request() {
  ChatRequest req;
  req.system_message = "You are an AI assistant whose primary goal is to "
                       "identify promising, new, and key scientific problems";
  req.user_message = "Please formulate a problem.";
  req.model_name = "gpt-4";
  return req;
}

}  // namespace

TEST_CASE("digest is stable and sensitive to every field") {
  const ChatRequest base = make_request();
  const std::string d = base.digest();
  CHECK(d.size() == 16);
  CHECK(base.digest() == d);  // deterministic

  ChatRequest r = base;
  r.system_message += "x";
  CHECK(r.digest() != d);
  r = base;
  r.user_message += "x";
  CHECK(r.digest() != d);
  r = base;
  r.model_name = "other";
  CHECK(r.digest() != d);
  r = base;
  r.temperature = 0.0;
  CHECK(r.digest() != d);
  r = base;
  r.max_output_tokens += 1;
  CHECK(r.digest() != d);

  SUBCASE("field boundaries are unambiguous") {
    ChatRequest a = base, b = base;
    a.system_message = "xy";
    a.user_message = "z";
    b.system_message = "x";
    b.user_message = "yz";
    CHECK(a.digest() != b.digest());
  }
}

TEST_CASE("cache backend records, replay backend replays") {
  testsupport::ScriptedChatServer server;
  testsupport::TempDir dir;
  const ChatRequest req = make_request();

  ChatClient::Options opts;
  opts.backend = Backend::Cache;
  opts.base_url = server.base_url();
  opts.cache_dir = dir.str();

  std::string first;
  {
    ChatClient llm(opts);
    const Completion c1 = llm.complete(req);
    CHECK(c1.backend == Backend::Live);  // miss -> live call, stored
    first = c1.text;
    CHECK(llm.calls_live() == 1);
    const Completion c2 = llm.complete(req);
    CHECK(c2.backend == Backend::Cache);  // hit
    CHECK(c2.text == first);
    CHECK(llm.calls_live() == 1);
    CHECK(llm.calls_total() == 2);
    REQUIRE(llm.access_log().size() == 2);
    CHECK(llm.access_log()[0] == "live " + req.digest());
    CHECK(llm.access_log()[1] == "cache " + req.digest());
  }
  CHECK(std::filesystem::exists(dir.file(req.digest() + ".txt")));

  SUBCASE("replay serves the recorded bytes with zero live calls") {
    const long before = server.requests();
    ChatClient::Options ropts;
    ropts.backend = Backend::Replay;
    ropts.cache_dir = dir.str();
    ChatClient replay(ropts);
    const Completion c = replay.complete(req);
    CHECK(c.backend == Backend::Replay);
    CHECK(c.text == first);
    CHECK(replay.calls_live() == 0);
    CHECK(server.requests() == before);
  }
  SUBCASE("replay miss names the digest") {
    ChatClient::Options ropts;
    ropts.backend = Backend::Replay;
    ropts.cache_dir = dir.str();
    ChatClient replay(ropts);
    ChatRequest other = req;
    other.user_message = "something never recorded";
    try {
      replay.complete(other);
      FAIL("expected Error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ReplayMiss);
      CHECK(std::string(e.what()).find(other.digest()) != std::string::npos);
    }
  }
}

TEST_CASE("cache and replay backends require a cache directory") {
  ChatClient::Options opts;
  opts.backend = Backend::Replay;
  CHECK_THROWS_AS(ChatClient{opts}, Error);
  opts.backend = Backend::Cache;
  CHECK_THROWS_AS(ChatClient{opts}, Error);
}

TEST_CASE("live transport failure surfaces as TransportError") {
  ChatClient::Options opts;
  opts.backend = Backend::Live;
  opts.base_url = "http://127.0.0.1:1";  // nothing listens here
  opts.max_retries = 1;
  opts.backoff_base_seconds = 0.0;
  ChatClient llm(opts);
  try {
    llm.complete(make_request());
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TransportError);
  }
}

TEST_CASE("empty request is rejected before any backend work") {
  testsupport::TempDir dir;
  ChatClient::Options opts;
  opts.backend = Backend::Replay;
  opts.cache_dir = dir.str();
  ChatClient llm(opts);
  CHECK_THROWS_AS(llm.complete(ChatRequest{}), Error);
}
