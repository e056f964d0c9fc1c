#include "researchagent/review.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"

namespace ra {

using nlohmann::json;

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Problem: return "problem";
    case Stage::Method: return "method";
    case Stage::Experiment: return "experiment";
  }
  throw Error(ErrorCode::InvalidInput, "bad stage");
}

Stage stage_from_name(const std::string& name) {
  if (name == "problem") return Stage::Problem;
  if (name == "method") return Stage::Method;
  if (name == "experiment") return Stage::Experiment;
  throw Error(ErrorCode::InvalidInput, "unknown stage '" + name + "'");
}

const std::vector<std::string>& criteria_names(Stage stage) {
  static const std::vector<std::string> problem{
      "Clarity", "Relevance", "Originality", "Feasibility", "Significance"};
  static const std::vector<std::string> method{
      "Clarity", "Validity", "Rigorousness", "Innovativeness", "Generalizability"};
  static const std::vector<std::string> experiment{
      "Clarity", "Validity", "Robustness", "Feasibility", "Reproducibility"};
  switch (stage) {
    case Stage::Problem: return problem;
    case Stage::Method: return method;
    case Stage::Experiment: return experiment;
  }
  throw Error(ErrorCode::InvalidInput, "bad stage");
}

void Criterion::validate() const {
  if (name.empty()) throw Error(ErrorCode::InvalidInput, "criterion has no name");
  if (definition.empty()) {
    throw Error(ErrorCode::InvalidInput, "criterion " + name + " has no definition");
  }
  if (rubric.size() != 5) {
    throw Error(ErrorCode::InvalidInput,
                "criterion " + name + " rubric must have 5 levels, has " +
                    std::to_string(rubric.size()));
  }
  for (const auto& level : rubric) {
    if (level.empty()) {
      throw Error(ErrorCode::InvalidInput,
                  "criterion " + name + " has an empty rubric level");
    }
  }
}

void CriteriaSet::validate() const {
  for (Stage s : {Stage::Problem, Stage::Method, Stage::Experiment}) {
    auto it = by_stage.find(s);
    if (it == by_stage.end()) {
      throw Error(ErrorCode::InvalidInput,
                  std::string("missing criteria for stage ") + stage_name(s));
    }
    const auto& expected = criteria_names(s);
    if (it->second.size() != expected.size()) {
      throw Error(ErrorCode::InvalidInput,
                  std::string(stage_name(s)) + " must have " +
                      std::to_string(expected.size()) + " criteria");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const Criterion& c = it->second[i];
      if (c.name != expected[i]) {
        throw Error(ErrorCode::InvalidInput,
                    std::string(stage_name(s)) + " criterion " +
                        std::to_string(i) + " must be '" + expected[i] +
                        "', got '" + c.name + "'");
      }
      if (c.stage != s) {
        throw Error(ErrorCode::InvalidInput,
                    "criterion " + c.name + " tagged with wrong stage");
      }
      c.validate();
    }
  }
}

const Criterion& CriteriaSet::get(Stage stage, const std::string& name) const {
  auto it = by_stage.find(stage);
  if (it != by_stage.end()) {
    for (const auto& c : it->second) {
      if (c.name == name) return c;
    }
  }
  throw Error(ErrorCode::NotFound, std::string("no criterion '") + name +
                                       "' for stage " + stage_name(stage));
}

std::string CriteriaSet::to_json() const {
  json j = json::object();
  for (Stage s : {Stage::Problem, Stage::Method, Stage::Experiment}) {
    json arr = json::array();
    auto it = by_stage.find(s);
    if (it != by_stage.end()) {
      for (const auto& c : it->second) {
        arr.push_back({{"name", c.name},
                       {"definition", c.definition},
                       {"rubric", c.rubric}});
      }
    }
    j[stage_name(s)] = std::move(arr);
  }
  return j.dump(2);
}

CriteriaSet CriteriaSet::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad criteria json: ") + e.what());
  }
  CriteriaSet set;
  for (Stage s : {Stage::Problem, Stage::Method, Stage::Experiment}) {
    if (!j.contains(stage_name(s))) {
      throw Error(ErrorCode::ParseError,
                  std::string("criteria json missing stage ") + stage_name(s));
    }
    for (const auto& item : j[stage_name(s)]) {
      Criterion c;
      c.stage = s;
      c.name = item.at("name").get<std::string>();
      c.definition = item.at("definition").get<std::string>();
      c.rubric = item.at("rubric").get<std::vector<std::string>>();
      set.by_stage[s].push_back(std::move(c));
    }
  }
  set.validate();
  return set;
}

CriteriaSet CriteriaSet::load(const std::string& path) {
  return from_json(read_file(path));
}

void CriteriaSet::save(const std::string& path) const {
  validate();
  write_file_atomic(path, to_json() + "\n");
}

void Review::validate() const {
  if (criterion.empty()) throw Error(ErrorCode::InvalidInput, "review has no criterion");
  if (rating < 1 || rating > 5) {
    throw Error(ErrorCode::InvalidInput,
                "rating for " + criterion + " out of range: " + std::to_string(rating));
  }
}

// ---------------------------------------------------------------------------
// review prompts

namespace {

std::string render_rubric(const Criterion& c) {
  std::string out;
  for (std::size_t i = 0; i < c.rubric.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + c.rubric[i];
  }
  return out;
}

const char* review_template_name(Stage s) {
  switch (s) {
    case Stage::Problem: return "review_problem";
    case Stage::Method: return "review_method";
    case Stage::Experiment: return "review_experiment";
  }
  throw Error(ErrorCode::InvalidInput, "bad stage");
}

}  // namespace

ChatRequest render_review_prompt(Stage stage, const Criterion& criterion,
                                 const Idea& idea, const Paper& core,
                                 const std::vector<Paper>& refs,
                                 const std::string& template_dir,
                                 const std::string& model_name,
                                 int max_output_tokens) {
  const PromptTemplate tmpl = load_template(template_dir, review_template_name(stage));
  std::map<std::string, std::string> b{
      {"metric", criterion.name},
      {"criteria", render_rubric(criterion)},
      {"paper['title']", core.title},
      {"paper['abstract']", core.abstract_text},
      {"relatedPaper['titles']", join_numbered_titles(refs)},
      {"relatedPaper['abstracts']", join_numbered_abstracts(refs)},
      {"researchProblem", idea.problem.body},
      {"researchProblemRationale", idea.problem.rationale},
  };
  if (stage == Stage::Method || stage == Stage::Experiment) {
    b["scientificMethod"] = idea.method.body;
    b["scientificMethodRationale"] = idea.method.rationale;
  }
  if (stage == Stage::Experiment) {
    b["experimentDesign"] = idea.experiment.body;
    b["experimentDesignRationale"] = idea.experiment.rationale;
  }
  ChatRequest req;
  req.system_message = tmpl.system_text;
  req.user_message = tmpl.render_user(b);
  req.model_name = model_name;
  req.temperature = kReviewTemperature;
  req.max_output_tokens = max_output_tokens;
  return req;
}

Review parse_review(const std::string& text, Stage stage,
                    const std::string& criterion) {
  auto sections =
      parse_labeled_response(text, {"Review", "Feedback", "Rating (1-5)"});
  Review r;
  r.stage = stage;
  r.criterion = criterion;
  r.review = sections.at("Review");
  r.feedback = sections.at("Feedback");
  const std::string& rating = sections.at("Rating (1-5)");
  std::size_t i = 0;
  while (i < rating.size() && !std::isdigit(static_cast<unsigned char>(rating[i])))
    ++i;
  if (i == rating.size()) {
    throw Error(ErrorCode::ParseError, "no rating value for " + criterion);
  }
  std::size_t j = i;
  while (j < rating.size() && std::isdigit(static_cast<unsigned char>(rating[j])))
    ++j;
  r.rating = std::stoi(rating.substr(i, j - i));
  if (r.rating < 1 || r.rating > 5) {
    throw Error(ErrorCode::ParseError,
                "rating " + std::to_string(r.rating) + " for " + criterion +
                    " out of range 1-5");
  }
  return r;
}

ReviewRun review_idea(const Idea& idea, const CriteriaSet& criteria,
                      ChatClient& llm, const Paper& core,
                      const std::vector<Paper>& refs,
                      const std::string& template_dir,
                      const std::string& model_name) {
  criteria.validate();
  ReviewRun run;
  for (Stage s : {Stage::Problem, Stage::Method, Stage::Experiment}) {
    for (const auto& name : criteria_names(s)) {
      const Criterion& c = criteria.get(s, name);
      ChatRequest req = render_review_prompt(s, c, idea, core, refs,
                                             template_dir, model_name);
      const Completion completion = llm.complete(req);
      try {
        run.reviews.push_back(parse_review(completion.text, s, name));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ParseError) throw;
        run.failures.push_back({s, name, e.what()});
      }
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// refinement

namespace {

std::vector<std::string> stage_feedback_texts(const std::vector<Review>& reviews,
                                              Stage stage) {
  std::vector<std::string> out;
  for (const auto& r : reviews) {
    if (r.stage != stage) continue;
    out.push_back(r.criterion + " (rating " + std::to_string(r.rating) +
                  "/5)\nReview: " + r.review + "\nFeedback: " + r.feedback);
  }
  return out;
}

}  // namespace

Idea refine_idea(const Idea& idea, const std::vector<Review>& reviews,
                 ChatClient& llm, const GenerationContext& ctx) {
  std::map<std::string, std::string> feedback;
  for (Stage s : {Stage::Problem, Stage::Method, Stage::Experiment}) {
    auto texts = stage_feedback_texts(reviews, s);
    if (!texts.empty()) feedback[stage_name(s)] = feedback_block(texts);
  }
  return generate_idea(ctx, llm, feedback, idea.provenance.round + 1);
}

// ---------------------------------------------------------------------------
// trajectory

namespace {

json review_to_json(const Review& r) {
  return {{"stage", stage_name(r.stage)},
          {"criterion", r.criterion},
          {"review", r.review},
          {"feedback", r.feedback},
          {"rating", r.rating}};
}

Review review_from_json(const json& j) {
  Review r;
  r.stage = stage_from_name(j.at("stage").get<std::string>());
  r.criterion = j.at("criterion").get<std::string>();
  r.review = j.at("review").get<std::string>();
  r.feedback = j.at("feedback").get<std::string>();
  r.rating = j.at("rating").get<int>();
  r.validate();
  return r;
}

}  // namespace

std::string trajectory_to_json(const std::vector<TrajectoryEntry>& t) {
  json arr = json::array();
  for (const auto& entry : t) {
    json reviews = json::array();
    for (const auto& r : entry.reviews) reviews.push_back(review_to_json(r));
    arr.push_back({{"idea", json::parse(entry.idea.to_json())},
                   {"reviews", std::move(reviews)}});
  }
  return arr.dump(2);
}

std::vector<TrajectoryEntry> trajectory_from_json(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string("bad trajectory json: ") + e.what());
  }
  if (!arr.is_array()) {
    throw Error(ErrorCode::ParseError, "trajectory json must be an array");
  }
  std::vector<TrajectoryEntry> out;
  for (const auto& item : arr) {
    TrajectoryEntry entry;
    entry.idea = Idea::from_json(item.at("idea").dump());
    for (const auto& rj : item.at("reviews")) {
      entry.reviews.push_back(review_from_json(rj));
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<TrajectoryEntry> refine_loop(const GenerationContext& ctx,
                                         const CriteriaSet& criteria,
                                         ChatClient& llm, int max_rounds) {
  if (max_rounds < 1) {
    throw Error(ErrorCode::InvalidInput, "max_rounds must be >= 1");
  }
  std::vector<TrajectoryEntry> trajectory;
  Idea idea = generate_idea(ctx, llm);
  for (int round = 0; round < max_rounds; ++round) {
    ReviewRun run = review_idea(idea, criteria, llm, ctx.core, ctx.references,
                                ctx.template_dir, ctx.model_name);
    trajectory.push_back({idea, run.reviews});
    if (round + 1 < max_rounds) {
      idea = refine_idea(idea, run.reviews, llm, ctx);
    }
  }
  return trajectory;
}

// ---------------------------------------------------------------------------
// criteria induction

AnnotationMap load_annotations(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string("bad annotations json: ") + e.what());
  }
  AnnotationMap out;
  for (const auto& [stage_key, per_criterion] : j.items()) {
    const Stage s = stage_from_name(stage_key);
    for (const auto& [crit, examples] : per_criterion.items()) {
      const auto& known = criteria_names(s);
      if (std::find(known.begin(), known.end(), crit) == known.end()) {
        throw Error(ErrorCode::ParseError, "unknown criterion '" + crit +
                                               "' for stage " + stage_key);
      }
      for (const auto& ex : examples) {
        AnnotatedExample a;
        a.idea_text = ex.at("idea").get<std::string>();
        a.rating = ex.at("rating").get<int>();
        if (a.rating < 1 || a.rating > 5) {
          throw Error(ErrorCode::ParseError,
                      "annotation rating out of range for " + crit);
        }
        out[s][crit].push_back(std::move(a));
      }
    }
  }
  return out;
}

ChatRequest render_induction_prompt(Stage stage, const std::string& criterion,
                                    const std::vector<AnnotatedExample>& examples,
                                    const std::string& model_name) {
  std::ostringstream user;
  user << "You are going to write a 5-level scoring rubric for evaluating the "
       << criterion << " of a research " << stage_name(stage)
       << ", based on human-annotated examples.\n\n"
       << "Each example below is a " << stage_name(stage)
       << " followed by the rating (1-5, 1 lowest) a human expert assigned for "
       << criterion << ".\n";
  for (std::size_t i = 0; i < examples.size(); ++i) {
    user << "\nExample " << (i + 1) << " (rating " << examples[i].rating
         << "):\n" << examples[i].idea_text << "\n";
  }
  user << "\nWrite one rubric level per rating so that the examples above "
          "would receive their annotated ratings. Respond in the format of\n"
          "1:\n2:\n3:\n4:\n5:";
  ChatRequest req;
  req.system_message =
      "You are an AI assistant whose primary goal is to distill human "
      "evaluation standards into explicit scoring rubrics for research ideas.";
  req.user_message = user.str();
  req.model_name = model_name;
  req.temperature = kReviewTemperature;
  req.max_output_tokens = 1024;
  return req;
}

CriteriaSet induce_criteria(const AnnotationMap& annotations, ChatClient& llm,
                            const CriteriaSet& base,
                            const std::string& model_name) {
  base.validate();
  CriteriaSet out = base;
  for (const auto& [stage, per_criterion] : annotations) {
    for (const auto& [crit, examples] : per_criterion) {
      if (examples.size() < 2) {
        throw Error(ErrorCode::InductionError,
                    "criterion " + crit + " needs >= 2 annotated examples, has " +
                        std::to_string(examples.size()));
      }
      bool spans = false;
      for (std::size_t i = 1; i < examples.size(); ++i) {
        if (examples[i].rating != examples[0].rating) spans = true;
      }
      if (!spans) {
        throw Error(ErrorCode::InductionError,
                    "criterion " + crit +
                        " annotations must span >= 2 distinct ratings");
      }
      const ChatRequest req =
          render_induction_prompt(stage, crit, examples, model_name);
      const Completion c = llm.complete(req);
      auto sections = parse_labeled_response(c.text, {"1", "2", "3", "4", "5"});
      std::vector<std::string> rubric;
      for (const char* k : {"1", "2", "3", "4", "5"}) {
        if (sections.at(k).empty()) {
          throw Error(ErrorCode::InductionError,
                      "induced rubric for " + crit + " has an empty level " + k);
        }
        rubric.push_back(sections.at(k));
      }
      for (auto& c2 : out.by_stage.at(stage)) {
        if (c2.name == crit) c2.rubric = rubric;
      }
    }
  }
  out.validate();
  return out;
}

}  // namespace ra
