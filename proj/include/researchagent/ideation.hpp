#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "researchagent/corpus.hpp"
#include "researchagent/llm.hpp"

namespace ra {

struct IdeaComponent {
  std::string body;
  std::string rationale;
};

struct Provenance {
  std::string core_id;
  std::vector<std::string> reference_ids;
  std::vector<std::string> entities;
  int round = 0;
  int truncated_references = 0;  // whole references dropped for budget
};

struct Idea {
  IdeaComponent problem;
  IdeaComponent method;
  IdeaComponent experiment;
  Provenance provenance;

  std::string to_json() const;
  static Idea from_json(const std::string& text);
  std::string to_markdown() const;
};

// Named-placeholder template; rendering is a single pass over the template
// text, so braces inside bound values are preserved verbatim.
struct PromptTemplate {
  std::string name;
  std::string system_text;
  std::string user_text;

  std::string render_user(const std::map<std::string, std::string>& bindings) const;
  static std::string substitute(const std::string& text,
                                const std::map<std::string, std::string>& bindings);
};

// Loads <dir>/<name>.system.txt and <dir>/<name>.user.txt.
PromptTemplate load_template(const std::string& dir, const std::string& name);

struct GenerationContext {
  Paper core;
  std::vector<Paper> references;       // already ranked
  std::vector<std::string> entities;   // retrieved names, may be empty
  std::string template_dir;
  std::string model_name;
  double temperature = kGenerationTemperature;
  int max_output_tokens = 2048;
  // Whole references beyond this many rendered characters are dropped.
  std::size_t reference_char_budget = 60000;
};

std::string join_numbered_titles(const std::vector<Paper>& refs);
std::string join_numbered_abstracts(const std::vector<Paper>& refs);
std::string join_entities(const std::vector<std::string>& entities);

ChatRequest render_problem_prompt(const GenerationContext& ctx);
ChatRequest render_method_prompt(const GenerationContext& ctx,
                                 const IdeaComponent& problem);
ChatRequest render_experiment_prompt(const GenerationContext& ctx,
                                     const IdeaComponent& problem,
                                     const IdeaComponent& method);

// Splits on line-anchored labels, in order, case-insensitive, tolerating
// markdown bold markers. All labels must be found.
std::map<std::string, std::string> parse_labeled_response(
    const std::string& text, const std::vector<std::string>& labels);

// Appended to each stage prompt when refining (round > 0).
std::string feedback_block(const std::vector<std::string>& reviews);

struct StageResult {
  IdeaComponent component;
  int attempts = 1;
};

// One stage with up to 2 re-prompts on parse failure.
StageResult run_stage(ChatClient& llm, ChatRequest req,
                      const std::string& body_label);

// problem -> method -> experiment, strictly sequential; round 0.
Idea generate_idea(const GenerationContext& ctx, ChatClient& llm,
                   const std::map<std::string, std::string>& stage_feedback = {},
                   int round = 0);

}  // namespace ra
