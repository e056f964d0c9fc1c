#include "researchagent/entities.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "researchagent/errors.hpp"
#include "researchagent/llm.hpp"
#include "researchagent/text.hpp"

namespace ra {

using nlohmann::json;

long EntityMultiset::total() const {
  long t = 0;
  for (const auto& [_, c] : mentions) t += c;
  return t;
}

void EntityMultiset::validate() const {
  for (const auto& [name, count] : mentions) {
    if (name.empty() || count < 1 ||
        name != canonicalize_entity(name)) {
      throw Error(ErrorCode::InvalidInput,
                  "bad entity mention '" + name + "' in " + paper_id);
    }
  }
}

EntityMultiset extract_entities(const Paper& paper,
                                EntityExtractor& extractor) {
  if (paper.title.empty()) {
    throw Error(ErrorCode::InvalidInput, "paper " + paper.id + " has no title");
  }
  if (auto* fe = dynamic_cast<FileExtractor*>(&extractor)) {
    fe->set_current(paper.id);
  }
  EntityMultiset ms;
  try {
    ms = extractor.extract(paper.title, paper.abstract_text);
  } catch (const Error& e) {
    throw Error(ErrorCode::ExtractionError,
                "extraction failed for " + paper.id + ": " + e.what());
  }
  ms.paper_id = paper.id;
  ms.validate();
  return ms;
}

std::map<std::string, EntityMultiset> import_annotations(
    const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open annotations: " + path);
  std::map<std::string, EntityMultiset> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    EntityMultiset ms;
    ms.paper_id = j.at("paper_id").get<std::string>();
    for (const auto& [name, count] : j.at("mentions").items()) {
      const std::string canon = canonicalize_entity(name);
      if (canon.empty()) {
        throw Error(ErrorCode::ParseError,
                    path + ":" + std::to_string(lineno) + ": empty entity name");
      }
      ms.mentions[canon] += count.get<long>();
    }
    ms.validate();
    if (out.count(ms.paper_id) && warnings) {
      warnings->push_back("duplicate paper id " + ms.paper_id +
                          " at line " + std::to_string(lineno) +
                          "; last record wins");
    }
    out[ms.paper_id] = std::move(ms);
  }
  return out;
}

void export_annotations(const std::map<std::string, EntityMultiset>& sets,
                        const std::string& path) {
  std::string out;
  for (const auto& [id, ms] : sets) {
    json j;
    j["paper_id"] = id;
    j["mentions"] = json::object();
    for (const auto& [name, count] : ms.mentions) j["mentions"][name] = count;
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

EntityMultiset parse_entity_lines(const std::string& response, int cap,
                                  std::vector<std::string>* warnings) {
  EntityMultiset ms;
  std::istringstream in(response);
  std::string line;
  long kept = 0;
  bool truncated = false;
  while (std::getline(in, line)) {
    // tolerate bullet markers around entity names
    std::string s = line;
    std::size_t pos = s.find_first_not_of(" \t");
    if (pos == std::string::npos) continue;
    s = s.substr(pos);
    if (s.rfind("- ", 0) == 0 || s.rfind("* ", 0) == 0) s = s.substr(2);
    const std::string canon = canonicalize_entity(s);
    if (canon.empty()) continue;
    // prose lines (sentences) are ignored; entities are short noun phrases
    if (canon.size() > 80 || canon.find(". ") != std::string::npos) continue;
    if (kept >= cap) {
      truncated = true;
      break;
    }
    ++ms.mentions[canon];
    ++kept;
  }
  if (truncated && warnings) {
    warnings->push_back("entity list truncated at cap " + std::to_string(cap));
  }
  return ms;
}

EntityMultiset llm_extract(const std::string& title,
                           const std::string& abstract_text, ChatClient& llm,
                           int cap, const std::string& model_name) {
  ChatRequest req;
  req.system_message =
      "You are an assistant that extracts scientific entities (concepts, "
      "methods, materials, datasets, organisms) from paper text.";
  req.user_message =
      "List each distinct scientific entity on its own line, repeating a line "
      "once per mention. Output entity names only, no numbering or prose.\n\n"
      "Title: " + title + "\nAbstract: " + abstract_text;
  req.model_name = model_name;
  req.temperature = 0.0;
  req.max_output_tokens = 512;
  const Completion c = llm.complete(req);
  return parse_entity_lines(c.text, cap);
}

EntityMultiset LlmExtractor::extract(const std::string& title,
                                     const std::string& abstract_text) {
  return llm_extract(title, abstract_text, llm_, cap_, model_name_);
}

EntityMultiset FileExtractor::extract_for(const std::string& paper_id) const {
  auto it = sets_.find(paper_id);
  if (it == sets_.end()) {
    throw Error(ErrorCode::NotFound, "no annotation for paper " + paper_id);
  }
  return it->second;
}

EntityMultiset FileExtractor::extract(const std::string&, const std::string&) {
  return extract_for(current_);
}

}  // namespace ra
