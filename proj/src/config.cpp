#include "researchagent/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "researchagent/corpus.hpp"
#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"

namespace ra {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long parse_long(const std::string& key, const std::string& value) {
  long out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::ParseError, key + ": bad integer '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, key + ": bad number '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::ParseError, key + ": bad boolean '" + value + "'");
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  if (key == "llm_backend") llm_backend = value;
  else if (key == "llm_base_url") llm_base_url = value;
  else if (key == "llm_model") llm_model = value;
  else if (key == "llm_cache_dir") llm_cache_dir = value;
  else if (key == "llm_max_retries") llm_max_retries = static_cast<int>(parse_long(key, value));
  else if (key == "graph_base_url") graph_base_url = value;
  else if (key == "graph_replay_dir") graph_replay_dir = value;
  else if (key == "related_direction") related_direction = value;
  else if (key == "corpus_file") corpus_file = value;
  else if (key == "annotations_file") annotations_file = value;
  else if (key == "min_citations") min_citations = parse_long(key, value);
  else if (key == "earliest_date") earliest_date = value;
  else if (key == "max_references") max_references = static_cast<int>(parse_long(key, value));
  else if (key == "store_path") store_path = value;
  else if (key == "alpha") alpha = parse_double(key, value);
  else if (key == "top_k") top_k = static_cast<int>(parse_long(key, value));
  else if (key == "entity_cap") entity_cap = static_cast<int>(parse_long(key, value));
  else if (key == "max_rounds") max_rounds = static_cast<int>(parse_long(key, value));
  else if (key == "use_entities") use_entities = parse_bool(key, value);
  else if (key == "use_references") use_references = parse_bool(key, value);
  else if (key == "review_enabled") review_enabled = parse_bool(key, value);
  else if (key == "template_dir") template_dir = value;
  else if (key == "criteria_file") criteria_file = value;
  else if (key == "output_dir") output_dir = value;
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_long(key, value));
  else throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
}

void Config::validate() const {
  if (llm_backend != "live" && llm_backend != "cache" && llm_backend != "replay") {
    throw Error(ErrorCode::InvalidInput,
                "llm_backend must be live, cache, or replay; got '" + llm_backend + "'");
  }
  if ((llm_backend == "cache" || llm_backend == "replay") && llm_cache_dir.empty()) {
    throw Error(ErrorCode::InvalidInput,
                "llm_cache_dir is required for backend '" + llm_backend + "'");
  }
  if (related_direction != "citations" && related_direction != "references") {
    throw Error(ErrorCode::InvalidInput,
                "related_direction must be citations or references");
  }
  Date::parse(earliest_date);  // throws on bad format
  if (min_citations < 0) throw Error(ErrorCode::InvalidInput, "min_citations < 0");
  if (max_references < 1) throw Error(ErrorCode::InvalidInput, "max_references < 1");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidInput, "alpha must be > 0");
  if (top_k < 1) throw Error(ErrorCode::InvalidInput, "top_k < 1");
  if (entity_cap < 1) throw Error(ErrorCode::InvalidInput, "entity_cap < 1");
  if (max_rounds < 1) throw Error(ErrorCode::InvalidInput, "max_rounds < 1");
  if (llm_max_retries < 0) throw Error(ErrorCode::InvalidInput, "llm_max_retries < 0");
  if (output_dir.empty()) throw Error(ErrorCode::InvalidInput, "output_dir is empty");
  if (template_dir.empty()) throw Error(ErrorCode::InvalidInput, "template_dir is empty");
}

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  return from_text(read_file(path));
}

std::string Config::to_text() const {
  std::ostringstream out;
  out << "alpha = " << alpha << '\n'
      << "annotations_file = " << annotations_file << '\n'
      << "corpus_file = " << corpus_file << '\n'
      << "criteria_file = " << criteria_file << '\n'
      << "earliest_date = " << earliest_date << '\n'
      << "entity_cap = " << entity_cap << '\n'
      << "graph_base_url = " << graph_base_url << '\n'
      << "graph_replay_dir = " << graph_replay_dir << '\n'
      << "llm_backend = " << llm_backend << '\n'
      << "llm_base_url = " << llm_base_url << '\n'
      << "llm_cache_dir = " << llm_cache_dir << '\n'
      << "llm_max_retries = " << llm_max_retries << '\n'
      << "llm_model = " << llm_model << '\n'
      << "max_references = " << max_references << '\n'
      << "max_rounds = " << max_rounds << '\n'
      << "min_citations = " << min_citations << '\n'
      << "output_dir = " << output_dir << '\n'
      << "related_direction = " << related_direction << '\n'
      << "review_enabled = " << (review_enabled ? "true" : "false") << '\n'
      << "seed = " << seed << '\n'
      << "store_path = " << store_path << '\n'
      << "template_dir = " << template_dir << '\n'
      << "top_k = " << top_k << '\n'
      << "use_entities = " << (use_entities ? "true" : "false") << '\n'
      << "use_references = " << (use_references ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace ra
