#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace ra {

// Single key = value config file; flags override file values. Unknown keys
// are rejected.
struct Config {
  // llm
  std::string llm_backend = "replay";  // live | cache | replay
  std::string llm_base_url;
  std::string llm_model = "gpt-4";
  std::string llm_cache_dir;
  int llm_max_retries = 3;

  // academic graph
  std::string graph_base_url = "https://api.semanticscholar.org";
  std::string graph_replay_dir;
  std::string related_direction = "citations";  // citations | references

  // corpus
  std::string corpus_file;
  std::string annotations_file;
  long min_citations = 20;
  std::string earliest_date = "2023-05-01";
  int max_references = 10;

  // knowledge store
  std::string store_path = "kstore.txt";
  double alpha = 1.0;
  int top_k = 5;
  int entity_cap = 64;

  // pipeline
  int max_rounds = 3;
  bool use_entities = true;
  bool use_references = true;
  bool review_enabled = true;
  std::string template_dir = "data/templates";
  std::string criteria_file = "data/criteria/default_criteria.json";
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  void set(const std::string& key, const std::string& value);
  void validate() const;

  static Config load(const std::string& path);
  static Config from_text(const std::string& text);
  std::string to_text() const;  // canonical snapshot for the run manifest
};

}  // namespace ra
