#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "researchagent/corpus.hpp"
#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"
#include "support/helpers.hpp"

using namespace ra;

namespace {

Paper make_paper(std::string id, long citations, const char* date,
                 std::string abstract = "some abstract text") {
  Paper p;
  p.id = std::move(id);
  p.title = "Title of " + p.id;
  p.abstract_text = std::move(abstract);
  p.citation_count = citations;
  p.published = Date::parse(date);
  p.missing_abstract = p.abstract_text.empty();
  return p;
}

}  // namespace

TEST_CASE("Date parses and formats ISO dates") {
  const Date d = Date::parse("2023-05-01");
  CHECK(d.year == 2023);
  CHECK(d.month == 5);
  CHECK(d.day == 1);
  CHECK(d.str() == "2023-05-01");
  CHECK(Date::parse("2024-01-02") > d);
  CHECK_THROWS_AS(Date::parse("not-a-date"), Error);
  CHECK_THROWS_AS(Date::parse("2023-13-01"), Error);
}

TEST_CASE("Paper::validate rejects broken invariants") {
  Paper p = make_paper("p1", 5, "2023-06-01");
  CHECK_NOTHROW(p.validate());
  SUBCASE("empty id") {
    p.id = "";
    CHECK_THROWS_AS(p.validate(), Error);
  }
  SUBCASE("negative citations") {
    p.citation_count = -1;
    CHECK_THROWS_AS(p.validate(), Error);
  }
  SUBCASE("duplicate references") {
    p.reference_ids = {"a", "b", "a"};
    CHECK_THROWS_AS(p.validate(), Error);
  }
}

TEST_CASE("select_core_papers filters and orders") {
  std::vector<Paper> corpus{
      make_paper("old", 100, "2022-01-01"),   // too early
      make_paper("few", 5, "2023-06-01"),     // too few citations
      make_paper("b", 50, "2023-06-01"),
      make_paper("a", 50, "2023-07-01"),      // tie on citations, id wins
      make_paper("top", 90, "2023-05-01"),    // boundary date included
  };
  CorpusFilter filter;  // defaults: >= 20 citations, >= 2023-05-01
  const auto cores = select_core_papers(corpus, filter);
  REQUIRE(cores.size() == 3);
  CHECK(cores[0].id == "top");
  CHECK(cores[1].id == "a");
  CHECK(cores[2].id == "b");
}

TEST_CASE("abstract_similarity basics") {
  CHECK(abstract_similarity("", "") == 0.0);
  CHECK(abstract_similarity("same Tokens here", "same tokens HERE!") == 1.0);
  const double s = abstract_similarity("a b c", "x y z");
  CHECK(s == 0.0);
  SUBCASE("partial overlap matches the frozen oracle") {
    // tf-idf cosine of ("a b c", "a b d"), idf = ln((1+N)/(1+df)) + 1, N = 2
    const double v = abstract_similarity("a b c", "a b d");
    CHECK(std::abs(v - 0.5031026124151313) < 1e-12);
  }
  SUBCASE("symmetric") {
    CHECK(abstract_similarity("alpha beta gamma", "beta gamma delta") ==
          abstract_similarity("beta gamma delta", "alpha beta gamma"));
  }
}

TEST_CASE("rank_references orders by similarity, skips missing abstracts") {
  const Paper core = make_paper("core", 10, "2023-06-01", "graph neural networks for molecules");
  std::vector<Paper> candidates{
      make_paper("far", 1, "2023-01-01", "cooking recipes and food"),
      make_paper("near", 1, "2023-01-01", "graph neural networks for proteins"),
      make_paper("noabs", 1, "2023-01-01", ""),
      make_paper("mid", 1, "2023-01-01", "neural networks for images"),
  };
  std::vector<std::string> warnings;
  const auto ranked = rank_references(core, candidates, 2, &warnings);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].id == "near");
  CHECK(ranked[1].id == "mid");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("noabs") != std::string::npos);

  SUBCASE("ties break by ascending id") {
    std::vector<Paper> same{
        make_paper("z", 1, "2023-01-01", "identical words"),
        make_paper("a", 1, "2023-01-01", "identical words"),
    };
    const auto tied = rank_references(core, same, 2);
    CHECK(tied[0].id == "a");
    CHECK(tied[1].id == "z");
  }
  SUBCASE("core without abstract is an error") {
    Paper bad = core;
    bad.abstract_text = "";
    CHECK_THROWS_AS(rank_references(bad, candidates, 2), Error);
  }
}

TEST_CASE("corpus JSONL round-trips in canonical id order") {
  testsupport::TempDir dir;
  std::vector<Paper> papers{
      make_paper("zebra", 3, "2023-06-01"),
      make_paper("apple", 7, "2023-07-02"),
  };
  papers[0].reference_ids = {"apple"};
  papers[0].fields_of_study = {"Biology"};
  const std::string path = dir.file("corpus.jsonl");
  save_corpus(papers, path);
  const auto loaded = load_corpus(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "apple");  // canonical order
  CHECK(loaded[1].id == "zebra");
  CHECK(loaded[1].reference_ids == std::vector<std::string>{"apple"});
  CHECK(loaded[1].fields_of_study == std::vector<std::string>{"Biology"});
  CHECK(loaded[1].published.str() == "2023-06-01");

  SUBCASE("save is byte-deterministic regardless of input order") {
    const std::string bytes = read_file(path);
    std::swap(papers[0], papers[1]);
    save_corpus(papers, path);
    CHECK(read_file(path) == bytes);
  }
  SUBCASE("parse errors carry the line number") {
    const std::string bad = dir.file("bad.jsonl");
    write_file_atomic(bad, paper_to_json(papers[0]) + "\n{broken\n");
    try {
      load_corpus(bad);
      FAIL("expected Error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
}

TEST_CASE("GraphClient replays recorded responses offline") {
  testsupport::TempDir dir;
  const std::string id = "abc123";
  const std::string path =
      "/graph/v1/paper/" + id +
      "?fields=title,abstract,citationCount,references,publicationDate,fieldsOfStudy";
  const std::string body = R"({
    "paperId": "abc123",
    "title": "A Paper",
    "abstract": "An abstract.",
    "citationCount": 42,
    "publicationDate": "2023-08-15",
    "fieldsOfStudy": ["Computer Science"],
    "references": [{"paperId": "r1"}, {"paperId": "r2"}, {"paperId": "r1"}]
  })";
  write_file_atomic(dir.file(to_hex(fnv1a64(path)) + ".json"), body);

  GraphClient::Options opts;
  opts.replay_dir = dir.str();
  GraphClient client(opts);
  const Paper p = client.fetch_paper(id);
  CHECK(p.id == "abc123");
  CHECK(p.title == "A Paper");
  CHECK(p.citation_count == 42);
  CHECK(p.published.str() == "2023-08-15");
  // duplicate reference ids in the response are deduplicated
  CHECK(p.reference_ids == std::vector<std::string>{"r1", "r2"});

  SUBCASE("missing replay entry raises ReplayMiss") {
    try {
      client.fetch_paper("unknown");
      FAIL("expected Error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ReplayMiss);
    }
  }
  SUBCASE("citations endpoint") {
    const std::string cpath =
        "/graph/v1/paper/" + id + "/citations?fields=paperId&limit=1000";
    write_file_atomic(
        dir.file(to_hex(fnv1a64(cpath)) + ".json"),
        R"({"data": [{"citingPaper": {"paperId": "c1"}}, {"citingPaper": {"paperId": "c2"}}]})");
    CHECK(client.fetch_citing_ids(id) == std::vector<std::string>{"c1", "c2"});
  }
}
