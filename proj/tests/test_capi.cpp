#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "researchagent.h"
#include "support/pipeline_fixture.hpp"

using namespace testsupport;

namespace {

struct Report {
  char* text = nullptr;
  ~Report() { ra_string_free(text); }
  std::string str() const { return text ? text : ""; }
};

ra_config* config_for(PipelineFixture& fx) {
  ra_config* cfg = nullptr;
  REQUIRE(ra_config_load(fx.config_path().c_str(), &cfg) == RA_OK);
  return cfg;
}

}  // namespace

TEST_CASE("config handles: load, set, unknown keys") {
  PipelineFixture fx;
  ra_config* cfg = config_for(fx);
  CHECK(ra_config_set(cfg, "top_k", "3") == RA_OK);
  CHECK(ra_config_set(cfg, "nonsense", "1") == RA_ERR_PARSE);
  CHECK(std::string(ra_last_error()).find("nonsense") != std::string::npos);
  CHECK(ra_config_set(nullptr, "top_k", "3") == RA_ERR_INVALID_INPUT);
  ra_config_free(cfg);

  SUBCASE("missing config file") {
    ra_config* c2 = nullptr;
    CHECK(ra_config_load("/nonexistent.conf", &c2) == RA_ERR_IO);
  }
  SUBCASE("defaults") {
    ra_config* c3 = nullptr;
    REQUIRE(ra_config_default(&c3) == RA_OK);
    ra_config_free(c3);
  }
}

TEST_CASE("pipeline through the C API: build, generate, review, evaluate") {
  PipelineFixture fx;
  fx.cfg.max_rounds = 1;  // keep the unit test snappy
  ra_config* cfg = config_for(fx);

  Report build;
  REQUIRE(ra_build_store(cfg, &build.text) == RA_OK);
  CHECK(build.str().find("entities: 7") != std::string::npos);

  Report gen;
  REQUIRE(ra_generate(cfg, "core-1", &gen.text) == RA_OK);
  const std::string idea_path = fx.cfg.output_dir + "/idea.json";
  CHECK(std::filesystem::exists(idea_path));

  Report rev;
  CHECK(ra_review(cfg, idea_path.c_str(), &rev.text) == RA_OK);
  CHECK(rev.str().find("reviews: 15") != std::string::npos);

  Report eval;
  const std::string csv = fx.cfg.output_dir + "/scores.csv";
  CHECK(ra_evaluate(cfg, csv.c_str(), &eval.text) == RA_OK);
  CHECK(eval.str().find("rows: 15") != std::string::npos);

  Report stats;
  CHECK(ra_stats(cfg, &stats.text) == RA_OK);
  CHECK(stats.str().find("entities: 7") != std::string::npos);

  SUBCASE("error paths set the status and message") {
    Report r;
    CHECK(ra_generate(cfg, "missing-id", &r.text) == RA_ERR_NOT_FOUND);
    CHECK(std::string(ra_last_error()).find("missing-id") != std::string::npos);
    CHECK(ra_generate(cfg, nullptr, &r.text) == RA_ERR_INVALID_INPUT);
    CHECK(ra_evaluate(cfg, "/nonexistent.csv", &r.text) == RA_ERR_IO);
  }
  ra_config_free(cfg);
}

TEST_CASE("store queries through the C API") {
  PipelineFixture fx;
  ra_config* cfg = config_for(fx);
  Report build;
  REQUIRE(ra_build_store(cfg, &build.text) == RA_OK);
  ra_config_free(cfg);

  const std::string store_path = fx.cfg.output_dir + "/kstore.txt";
  ra_store* store = nullptr;
  REQUIRE(ra_store_open(store_path.c_str(), &store) == RA_OK);

  int64_t m = 0, total = 0, pairs = 0;
  CHECK(ra_store_size(store, &m, &total, &pairs) == RA_OK);
  CHECK(m == 7);
  CHECK(total == 13);

  double prior = 0;
  CHECK(ra_store_prior(store, "message passing", &prior) == RA_OK);
  CHECK(std::abs(prior - 4.0 / 13.0) < 1e-12);
  CHECK(ra_store_prior(store, "nope", &prior) == RA_ERR_NOT_FOUND);

  double cond = 0;
  CHECK(ra_store_conditional(store, "message passing", "molecular graphs", 1.0,
                             &cond) == RA_OK);
  CHECK(cond > 0.0);
  CHECK(ra_store_conditional(store, "message passing", "message passing", 1.0,
                             &cond) != RA_OK);

  char* result = nullptr;
  CHECK(ra_store_retrieve(store, R"({"message passing": 2})", 3, 1.0,
                          &result) == RA_OK);
  REQUIRE(result != nullptr);
  const auto parsed = nlohmann::json::parse(result);
  CHECK(parsed.is_array());
  CHECK(parsed.size() == 3);
  CHECK(parsed[0].contains("entity"));
  CHECK(parsed[0].contains("log_score"));
  // scores are non-increasing
  for (std::size_t i = 1; i < parsed.size(); ++i) {
    CHECK(parsed[i - 1]["log_score"].get<double>() >=
          parsed[i]["log_score"].get<double>());
  }
  ra_string_free(result);

  CHECK(ra_store_retrieve(store, "not json", 3, 1.0, &result) == RA_ERR_PARSE);

  ra_store_free(store);

  SUBCASE("opening a missing store fails") {
    ra_store* s2 = nullptr;
    CHECK(ra_store_open("/nonexistent.kstore", &s2) != RA_OK);
  }
}
