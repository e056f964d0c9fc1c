// End-to-end workspace: a small corpus + annotations on disk, plus a config
// wired to a scripted chat backend.
#pragma once

#include <string>

#include "researchagent/config.hpp"
#include "researchagent/corpus.hpp"
#include "researchagent/text.hpp"
#include "support/helpers.hpp"

namespace testsupport {

struct PipelineFixture {
  TempDir dir;
  ScriptedChatServer server;
  ra::Config cfg;

  PipelineFixture() {
    using ra::Paper;
    auto paper = [](std::string id, std::string title, std::string abs,
                    long citations, std::vector<std::string> refs) {
      Paper p;
      p.id = std::move(id);
      p.title = std::move(title);
      p.abstract_text = std::move(abs);
      p.citation_count = citations;
      p.published = ra::Date::parse("2023-06-01");
      p.reference_ids = std::move(refs);
      return p;
    };
    const std::vector<Paper> corpus{
        paper("core-1", "Graph Neural Networks for Molecules",
              "We study message passing on molecular graphs.", 40,
              {"ref-1", "ref-2", "ref-3"}),
        paper("ref-1", "Protein Structure Prediction",
              "Deep learning predicts protein folds on molecular graphs.", 10, {}),
        paper("ref-2", "Contrastive Learning of Representations",
              "A framework for contrastive visual representation learning.", 9,
              {}),
        paper("ref-3", "Molecular Property Prediction",
              "Message passing networks predict molecular properties.", 8, {}),
        paper("other", "Unrelated Systems Paper",
              "Distributed consensus with low latency.", 50, {}),
    };
    ra::save_corpus(corpus, dir.file("corpus.jsonl"));

    ra::write_file_atomic(
        dir.file("annotations.jsonl"),
        R"({"paper_id": "core-1", "mentions": {"message passing": 2, "molecular graphs": 1}})"
        "\n"
        R"({"paper_id": "ref-1", "mentions": {"protein folding": 1, "message passing": 1}})"
        "\n"
        R"({"paper_id": "ref-2", "mentions": {"contrastive learning": 2, "message passing": 1}})"
        "\n"
        R"({"paper_id": "ref-3", "mentions": {"molecular graphs": 1, "property prediction": 2}})"
        "\n"
        R"({"paper_id": "other", "mentions": {"consensus": 1, "latency": 1}})"
        "\n");

    cfg.llm_backend = "cache";
    cfg.llm_base_url = server.base_url();
    cfg.llm_cache_dir = dir.file("llm_cache");
    std::filesystem::create_directories(cfg.llm_cache_dir);
    cfg.corpus_file = dir.file("corpus.jsonl");
    cfg.annotations_file = dir.file("annotations.jsonl");
    cfg.template_dir = template_dir();
    cfg.criteria_file = criteria_file();
    cfg.output_dir = dir.file("out");
    cfg.max_references = 3;
    cfg.top_k = 2;
  }

  std::string config_path() {
    const std::string path = dir.file("run.conf");
    ra::write_file_atomic(path, cfg.to_text());
    return path;
  }
};

}  // namespace testsupport
