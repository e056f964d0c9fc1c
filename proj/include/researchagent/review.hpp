#pragma once

#include <map>
#include <string>
#include <vector>

#include "researchagent/ideation.hpp"
#include "researchagent/llm.hpp"

namespace ra {

enum class Stage { Problem, Method, Experiment };

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);

struct Criterion {
  Stage stage = Stage::Problem;
  std::string name;
  std::string definition;            // one-line description
  std::vector<std::string> rubric;   // exactly 5 levels, ratings 1..5

  void validate() const;
};

// Exactly 5 criteria per stage, fixed names per stage.
struct CriteriaSet {
  std::map<Stage, std::vector<Criterion>> by_stage;

  void validate() const;
  const Criterion& get(Stage stage, const std::string& name) const;

  static CriteriaSet load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_json() const;
  static CriteriaSet from_json(const std::string& text);
};

const std::vector<std::string>& criteria_names(Stage stage);

struct Review {
  Stage stage = Stage::Problem;
  std::string criterion;
  std::string review;
  std::string feedback;
  int rating = 0;  // 1..5

  void validate() const;
};

struct ReviewFailure {
  Stage stage;
  std::string criterion;
  std::string message;
};

struct ReviewRun {
  std::vector<Review> reviews;       // complete run: exactly 15
  std::vector<ReviewFailure> failures;
};

ChatRequest render_review_prompt(Stage stage, const Criterion& criterion,
                                 const Idea& idea, const Paper& core,
                                 const std::vector<Paper>& refs,
                                 const std::string& template_dir,
                                 const std::string& model_name,
                                 int max_output_tokens = 1024);

// "Review: ... Feedback: ... Rating (1-5): n"; rating is the first integer
// in the rating section and must be in [1,5].
Review parse_review(const std::string& text, Stage stage,
                    const std::string& criterion);

// 15 reviews: problem criteria in canonical order, then method, experiment.
ReviewRun review_idea(const Idea& idea, const CriteriaSet& criteria,
                      ChatClient& llm, const Paper& core,
                      const std::vector<Paper>& refs,
                      const std::string& template_dir,
                      const std::string& model_name);

// Regenerates all three stages with each stage's 5 reviews appended to its
// prompt; round increments.
Idea refine_idea(const Idea& idea, const std::vector<Review>& reviews,
                 ChatClient& llm, const GenerationContext& ctx);

struct TrajectoryEntry {
  Idea idea;
  std::vector<Review> reviews;
};

std::string trajectory_to_json(const std::vector<TrajectoryEntry>& t);
std::vector<TrajectoryEntry> trajectory_from_json(const std::string& text);

inline constexpr int kDefaultMaxRounds = 3;

// generate -> review -> refine, max_rounds review passes total.
std::vector<TrajectoryEntry> refine_loop(const GenerationContext& ctx,
                                         const CriteriaSet& criteria,
                                         ChatClient& llm, int max_rounds);

struct AnnotatedExample {
  std::string idea_text;
  int rating = 0;  // 1..5
};

// Per-criterion annotated examples, e.g. loaded from the annotations file:
// {"problem": {"Clarity": [{"idea": ..., "rating": n}, ...], ...}, ...}
using AnnotationMap =
    std::map<Stage, std::map<std::string, std::vector<AnnotatedExample>>>;

AnnotationMap load_annotations(const std::string& path);

ChatRequest render_induction_prompt(Stage stage, const std::string& criterion,
                                    const std::vector<AnnotatedExample>& examples,
                                    const std::string& model_name);

// Induces a 5-level rubric per criterion from >=2 examples spanning >=2
// distinct ratings; definitions come from the shipped criteria set.
CriteriaSet induce_criteria(const AnnotationMap& annotations, ChatClient& llm,
                            const CriteriaSet& base,
                            const std::string& model_name);

}  // namespace ra
