#pragma once

#include <map>
#include <string>
#include <vector>

#include "researchagent/corpus.hpp"

namespace ra {

class ChatClient;

struct EntityMultiset {
  std::string paper_id;
  // canonical name -> occurrence count, all counts >= 1
  std::map<std::string, long> mentions;

  long total() const;
  void validate() const;
};

// Contract: given title+abstract only, produce the paper's entity multiset.
class EntityExtractor {
 public:
  virtual ~EntityExtractor() = default;
  virtual EntityMultiset extract(const std::string& title,
                                 const std::string& abstract_text) = 0;
};

inline constexpr int kDefaultEntityCap = 64;

// Only title and abstract ever reach the extractor.
EntityMultiset extract_entities(const Paper& paper, EntityExtractor& extractor);

// Precomputed linker output: JSONL of {paper_id, mentions: {name: count}}.
// Duplicate paper ids: last record wins.
std::map<std::string, EntityMultiset> import_annotations(
    const std::string& path, std::vector<std::string>* warnings = nullptr);

void export_annotations(const std::map<std::string, EntityMultiset>& sets,
                        const std::string& path);

// Parses a line-per-entity chat response; one line per mention.
EntityMultiset parse_entity_lines(const std::string& response, int cap,
                                  std::vector<std::string>* warnings = nullptr);

EntityMultiset llm_extract(const std::string& title,
                           const std::string& abstract_text, ChatClient& llm,
                           int cap = kDefaultEntityCap,
                           const std::string& model_name = "gpt-4");

class LlmExtractor : public EntityExtractor {
 public:
  LlmExtractor(ChatClient& llm, int cap = kDefaultEntityCap,
               std::string model_name = "gpt-4")
      : llm_(llm), cap_(cap), model_name_(std::move(model_name)) {}
  EntityMultiset extract(const std::string& title,
                         const std::string& abstract_text) override;

 private:
  ChatClient& llm_;
  int cap_;
  std::string model_name_;
};

class FileExtractor : public EntityExtractor {
 public:
  explicit FileExtractor(std::map<std::string, EntityMultiset> sets)
      : sets_(std::move(sets)) {}
  // Keyed by paper id recorded before extraction; see extract_entities.
  EntityMultiset extract_for(const std::string& paper_id) const;
  EntityMultiset extract(const std::string&, const std::string&) override;
  void set_current(const std::string& paper_id) { current_ = paper_id; }

 private:
  std::map<std::string, EntityMultiset> sets_;
  std::string current_;
};

}  // namespace ra
