#include "researchagent/ideation.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"

namespace ra {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Idea serialization

std::string Idea::to_json() const {
  json j;
  j["problem"] = {{"body", problem.body}, {"rationale", problem.rationale}};
  j["method"] = {{"body", method.body}, {"rationale", method.rationale}};
  j["experiment"] = {{"body", experiment.body},
                     {"rationale", experiment.rationale}};
  j["provenance"] = {
      {"core_id", provenance.core_id},
      {"reference_ids", provenance.reference_ids},
      {"entities", provenance.entities},
      {"round", provenance.round},
      {"truncated_references", provenance.truncated_references},
  };
  return j.dump(2);
}

Idea Idea::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad idea json: ") + e.what());
  }
  Idea idea;
  auto comp = [&j](const char* key) {
    return IdeaComponent{j.at(key).at("body").get<std::string>(),
                         j.at(key).at("rationale").get<std::string>()};
  };
  idea.problem = comp("problem");
  idea.method = comp("method");
  idea.experiment = comp("experiment");
  const auto& p = j.at("provenance");
  idea.provenance.core_id = p.value("core_id", "");
  if (p.contains("reference_ids")) {
    idea.provenance.reference_ids =
        p["reference_ids"].get<std::vector<std::string>>();
  }
  if (p.contains("entities")) {
    idea.provenance.entities = p["entities"].get<std::vector<std::string>>();
  }
  idea.provenance.round = p.value("round", 0);
  idea.provenance.truncated_references = p.value("truncated_references", 0);
  return idea;
}

std::string Idea::to_markdown() const {
  std::ostringstream out;
  out << "# Research Idea (round " << provenance.round << ")\n\n";
  out << "Core paper: " << provenance.core_id << "\n\n";
  out << "## Problem\n\n" << problem.body << "\n\n";
  out << "*Rationale:* " << problem.rationale << "\n\n";
  out << "## Method\n\n" << method.body << "\n\n";
  out << "*Rationale:* " << method.rationale << "\n\n";
  out << "## Experiment Design\n\n" << experiment.body << "\n\n";
  out << "*Rationale:* " << experiment.rationale << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// templates

std::string PromptTemplate::substitute(
    const std::string& text, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    const std::size_t close = text.find('}', open);
    if (close == std::string::npos) {
      throw Error(ErrorCode::RenderError, "unterminated placeholder");
    }
    out.append(text, pos, open - pos);
    // placeholder names may themselves contain one bracket pair, e.g.
    // {paper['title']} or {len(references)}; extend to the matching brace
    const std::string name = text.substr(open + 1, close - open - 1);
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw Error(ErrorCode::RenderError, "unbound placeholder {" + name + "}");
    }
    out += it->second;
    pos = close + 1;
  }
  return out;
}

std::string PromptTemplate::render_user(
    const std::map<std::string, std::string>& bindings) const {
  return substitute(user_text, bindings);
}

namespace {

std::string strip_trailing_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

PromptTemplate load_template(const std::string& dir, const std::string& name) {
  PromptTemplate t;
  t.name = name;
  t.system_text = strip_trailing_newline(read_file(dir + "/" + name + ".system.txt"));
  t.user_text = strip_trailing_newline(read_file(dir + "/" + name + ".user.txt"));
  return t;
}

// ---------------------------------------------------------------------------
// bindings

std::string join_numbered_titles(const std::vector<Paper>& refs) {
  std::string out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + refs[i].title;
  }
  return out;
}

std::string join_numbered_abstracts(const std::vector<Paper>& refs) {
  std::string out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + refs[i].abstract_text;
  }
  return out;
}

std::string join_entities(const std::vector<std::string>& entities) {
  std::string out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (i) out += ", ";
    out += entities[i];
  }
  return out;
}

namespace {

// Whole references are dropped (never split) once the rendered titles +
// abstracts exceed the budget.
std::vector<Paper> budget_references(const GenerationContext& ctx,
                                     int* truncated) {
  std::vector<Paper> kept;
  std::size_t used = 0;
  for (const auto& r : ctx.references) {
    const std::size_t cost = r.title.size() + r.abstract_text.size() + 16;
    if (used + cost > ctx.reference_char_budget && !kept.empty()) {
      if (truncated) *truncated = static_cast<int>(ctx.references.size() - kept.size());
      return kept;
    }
    used += cost;
    kept.push_back(r);
  }
  if (truncated) *truncated = 0;
  return kept;
}

std::map<std::string, std::string> base_bindings(const GenerationContext& ctx,
                                                 const std::vector<Paper>& refs) {
  if (ctx.core.abstract_text.empty()) {
    throw Error(ErrorCode::RenderError,
                "core paper " + ctx.core.id + " has no abstract");
  }
  return {
      {"len(references)", std::to_string(refs.size())},
      {"len(entities)", std::to_string(ctx.entities.size())},
      {"paper['title']", ctx.core.title},
      {"paper['abstract']", ctx.core.abstract_text},
      {"relatedPaper['titles']", join_numbered_titles(refs)},
      {"relatedPaper['abstracts']", join_numbered_abstracts(refs)},
      {"Entities", join_entities(ctx.entities)},
  };
}

ChatRequest make_request(const GenerationContext& ctx,
                         const PromptTemplate& tmpl,
                         const std::map<std::string, std::string>& bindings) {
  ChatRequest req;
  req.system_message = tmpl.system_text;
  req.user_message = tmpl.render_user(bindings);
  req.model_name = ctx.model_name;
  req.temperature = ctx.temperature;
  req.max_output_tokens = ctx.max_output_tokens;
  return req;
}

void require_component(const IdeaComponent& c, const char* what) {
  if (c.body.empty() || c.rationale.empty()) {
    throw Error(ErrorCode::RenderError,
                std::string(what) + " component has an empty body or rationale");
  }
}

}  // namespace

ChatRequest render_problem_prompt(const GenerationContext& ctx) {
  const auto refs = budget_references(ctx, nullptr);
  return make_request(ctx, load_template(ctx.template_dir, "problem"),
                      base_bindings(ctx, refs));
}

ChatRequest render_method_prompt(const GenerationContext& ctx,
                                 const IdeaComponent& problem) {
  require_component(problem, "problem");
  const auto refs = budget_references(ctx, nullptr);
  auto b = base_bindings(ctx, refs);
  b["researchProblem"] = problem.body;
  b["researchProblemRationale"] = problem.rationale;
  return make_request(ctx, load_template(ctx.template_dir, "method"), b);
}

ChatRequest render_experiment_prompt(const GenerationContext& ctx,
                                     const IdeaComponent& problem,
                                     const IdeaComponent& method) {
  require_component(problem, "problem");
  require_component(method, "method");
  const auto refs = budget_references(ctx, nullptr);
  auto b = base_bindings(ctx, refs);
  b["researchProblem"] = problem.body;
  b["researchProblemRationale"] = problem.rationale;
  b["scientificMethod"] = method.body;
  b["scientificMethodRationale"] = method.rationale;
  return make_request(ctx, load_template(ctx.template_dir, "experiment"), b);
}

// ---------------------------------------------------------------------------
// response parsing

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

// Matches "<label>:" at the start of a line, tolerating leading ** / ## and
// bold markers around the label itself. Returns position after the colon
// (and any closing ** following it), or npos.
std::size_t match_label(const std::string& text, std::size_t line_start,
                        const std::string& label) {
  std::size_t p = line_start;
  while (p < text.size() && (text[p] == '*' || text[p] == '#' || text[p] == ' '))
    ++p;
  if (p + label.size() > text.size()) return std::string::npos;
  if (!iequals(std::string_view(text).substr(p, label.size()), label))
    return std::string::npos;
  p += label.size();
  while (p < text.size() && text[p] == '*') ++p;
  if (p >= text.size() || text[p] != ':') return std::string::npos;
  ++p;
  while (p < text.size() && text[p] == '*') ++p;
  return p;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_labeled_response(
    const std::string& text, const std::vector<std::string>& labels) {
  if (labels.empty()) {
    throw Error(ErrorCode::InvalidInput, "labels must be non-empty");
  }
  // locate each label in order at line starts
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (content start, label line start)
  std::size_t search_from = 0;
  for (const auto& label : labels) {
    std::size_t line_start = search_from;
    std::size_t found_content = std::string::npos;
    std::size_t found_line = std::string::npos;
    while (line_start <= text.size()) {
      const std::size_t after = match_label(text, line_start, label);
      if (after != std::string::npos) {
        found_content = after;
        found_line = line_start;
        break;
      }
      const std::size_t nl = text.find('\n', line_start);
      if (nl == std::string::npos) break;
      line_start = nl + 1;
    }
    if (found_content == std::string::npos) {
      std::string found, missing;
      for (std::size_t i = 0; i < spans.size(); ++i) {
        found += (found.empty() ? "" : ", ") + labels[i];
      }
      for (std::size_t i = spans.size(); i < labels.size(); ++i) {
        missing += (missing.empty() ? "" : ", ") + labels[i];
      }
      throw Error(ErrorCode::ParseError,
                  "label(s) missing: " + missing +
                      (found.empty() ? "" : " (found: " + found + ")"));
    }
    spans.emplace_back(found_content, found_line);
    search_from = found_content;
  }

  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t begin = spans[i].first;
    const std::size_t end = (i + 1 < spans.size()) ? spans[i + 1].second : text.size();
    out[labels[i]] = trim(text.substr(begin, end - begin));
  }
  return out;
}

std::string feedback_block(const std::vector<std::string>& reviews) {
  std::string out = "Reviews and feedback on the previous attempt:";
  for (const auto& r : reviews) {
    out += "\n\n" + r;
  }
  return out;
}

StageResult run_stage(ChatClient& llm, ChatRequest req,
                      const std::string& body_label) {
  const std::vector<std::string> labels{body_label, "Rationale"};
  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) {
      req.user_message += "\n\nRespond strictly in the requested format.";
    }
    const Completion c = llm.complete(req);
    try {
      auto sections = parse_labeled_response(c.text, labels);
      IdeaComponent comp{sections.at(body_label), sections.at("Rationale")};
      if (comp.body.empty() || comp.rationale.empty()) {
        throw Error(ErrorCode::ParseError, "empty section");
      }
      return StageResult{std::move(comp), attempt + 1};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseError) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::StageError,
              "stage '" + body_label + "' failed after 3 attempts: " + last_error);
}

Idea generate_idea(const GenerationContext& ctx, ChatClient& llm,
                   const std::map<std::string, std::string>& stage_feedback,
                   int round) {
  int truncated = 0;
  GenerationContext budgeted = ctx;
  budgeted.references = budget_references(ctx, &truncated);

  auto with_feedback = [&stage_feedback](ChatRequest req, const char* stage) {
    auto it = stage_feedback.find(stage);
    if (it != stage_feedback.end() && !it->second.empty()) {
      req.user_message += "\n\n" + it->second;
    }
    return req;
  };

  Idea idea;
  idea.provenance.core_id = ctx.core.id;
  for (const auto& r : budgeted.references) {
    idea.provenance.reference_ids.push_back(r.id);
  }
  idea.provenance.entities = ctx.entities;
  idea.provenance.round = round;
  idea.provenance.truncated_references = truncated;

  idea.problem =
      run_stage(llm, with_feedback(render_problem_prompt(budgeted), "problem"),
                "Problem")
          .component;
  idea.method = run_stage(llm,
                          with_feedback(render_method_prompt(budgeted, idea.problem),
                                        "method"),
                          "Method")
                    .component;
  idea.experiment =
      run_stage(llm,
                with_feedback(
                    render_experiment_prompt(budgeted, idea.problem, idea.method),
                    "experiment"),
                "Experiment")
          .component;
  return idea;
}

}  // namespace ra
