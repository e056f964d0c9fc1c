#include "researchagent/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"

#ifndef RA_NO_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace ra {

using nlohmann::json;

Date Date::parse(const std::string& iso) {
  Date d;
  char dash1 = 0, dash2 = 0;
  std::istringstream ss(iso);
  if (!(ss >> d.year >> dash1 >> d.month >> dash2 >> d.day) || dash1 != '-' ||
      dash2 != '-' || d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) {
    throw Error(ErrorCode::ParseError, "bad date: '" + iso + "'");
  }
  return d;
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

void Paper::validate() const {
  if (id.empty()) throw Error(ErrorCode::InvalidInput, "paper id is empty");
  if (citation_count < 0) {
    throw Error(ErrorCode::InvalidInput, "negative citation count: " + id);
  }
  std::set<std::string> seen;
  for (const auto& r : reference_ids) {
    if (!seen.insert(r).second) {
      throw Error(ErrorCode::InvalidInput,
                  "duplicate reference " + r + " in paper " + id);
    }
  }
}

std::vector<Paper> select_core_papers(const std::vector<Paper>& corpus,
                                      const CorpusFilter& filter) {
  std::vector<Paper> out;
  for (const auto& p : corpus) {
    if (p.citation_count >= filter.min_citations &&
        p.published >= filter.earliest_date) {
      out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end(), [](const Paper& a, const Paper& b) {
    if (a.citation_count != b.citation_count)
      return a.citation_count > b.citation_count;
    return a.id < b.id;
  });
  return out;
}

namespace {

// tf-idf weights with idf = ln((1+N)/(1+df)) + 1 over the given collection.
using TokenCounts = std::map<std::string, int>;

TokenCounts count_tokens(const std::string& text) {
  TokenCounts tc;
  for (auto& t : tokenize(text)) ++tc[t];
  return tc;
}

std::map<std::string, double> idf_weights(
    const std::vector<const TokenCounts*>& docs) {
  std::map<std::string, int> df;
  for (const auto* d : docs) {
    for (const auto& [t, _] : *d) ++df[t];
  }
  const double n = static_cast<double>(docs.size());
  std::map<std::string, double> idf;
  for (const auto& [t, c] : df) {
    idf[t] = std::log((1.0 + n) / (1.0 + c)) + 1.0;
  }
  return idf;
}

double cosine(const TokenCounts& a, const TokenCounts& b,
              const std::map<std::string, double>& idf) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, c] : a) {
    const double w = c * idf.at(t);
    na += w * w;
    auto it = b.find(t);
    if (it != b.end()) dot += w * it->second * idf.at(t);
  }
  for (const auto& [t, c] : b) {
    const double w = c * idf.at(t);
    nb += w * w;
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double abstract_similarity(const std::string& a, const std::string& b) {
  const auto ta = tokenize(a), tb = tokenize(b);
  if (ta.empty() && tb.empty()) return 0.0;
  if (ta == tb) return 1.0;
  const TokenCounts ca = count_tokens(a), cb = count_tokens(b);
  const auto idf = idf_weights({&ca, &cb});
  return cosine(ca, cb, idf);
}

std::vector<Paper> rank_references(const Paper& core,
                                   const std::vector<Paper>& candidates,
                                   int n,
                                   std::vector<std::string>* warnings) {
  if (core.abstract_text.empty()) {
    throw Error(ErrorCode::InvalidInput,
                "core paper " + core.id + " has an empty abstract");
  }
  if (n < 1) throw Error(ErrorCode::InvalidInput, "n must be >= 1");

  std::vector<const Paper*> usable;
  for (const auto& c : candidates) {
    if (c.abstract_text.empty()) {
      if (warnings) {
        warnings->push_back("skipping candidate without abstract: " + c.id);
      }
      continue;
    }
    usable.push_back(&c);
  }

  const TokenCounts core_counts = count_tokens(core.abstract_text);
  std::vector<TokenCounts> cand_counts;
  cand_counts.reserve(usable.size());
  for (const auto* c : usable) cand_counts.push_back(count_tokens(c->abstract_text));

  std::vector<const TokenCounts*> docs{&core_counts};
  for (const auto& cc : cand_counts) docs.push_back(&cc);
  const auto idf = idf_weights(docs);

  std::vector<std::pair<double, const Paper*>> scored;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    double s = tokenize(core.abstract_text) == tokenize(usable[i]->abstract_text)
                   ? 1.0
                   : cosine(core_counts, cand_counts[i], idf);
    scored.emplace_back(s, usable[i]);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id < b.second->id;
  });

  std::vector<Paper> out;
  for (const auto& [s, p] : scored) {
    if (static_cast<int>(out.size()) >= n) break;
    out.push_back(*p);
  }
  return out;
}

Paper paper_from_json(const std::string& line) {
  json j = json::parse(line);
  Paper p;
  p.id = j.at("id").get<std::string>();
  p.title = j.value("title", "");
  p.abstract_text = j.value("abstract", "");
  p.citation_count = j.value("citation_count", 0L);
  if (j.contains("reference_ids")) {
    p.reference_ids = j["reference_ids"].get<std::vector<std::string>>();
  }
  p.published = Date::parse(j.value("published", "1970-01-01"));
  if (j.contains("fields_of_study")) {
    p.fields_of_study = j["fields_of_study"].get<std::vector<std::string>>();
  }
  p.missing_abstract = p.abstract_text.empty();
  p.validate();
  return p;
}

std::string paper_to_json(const Paper& p) {
  json j;
  j["id"] = p.id;
  j["title"] = p.title;
  j["abstract"] = p.abstract_text;
  j["citation_count"] = p.citation_count;
  j["reference_ids"] = p.reference_ids;
  j["published"] = p.published.str();
  j["fields_of_study"] = p.fields_of_study;
  return j.dump();
}

std::vector<Paper> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus: " + path);
  std::vector<Paper> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(paper_from_json(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_corpus(const std::vector<Paper>& papers, const std::string& path) {
  std::vector<const Paper*> sorted;
  for (const auto& p : papers) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const Paper* a, const Paper* b) { return a->id < b->id; });
  std::string out;
  for (const auto* p : sorted) {
    out += paper_to_json(*p);
    out += '\n';
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// GraphClient

GraphClient::GraphClient(Options opts) : opts_(std::move(opts)) {}

namespace {

constexpr const char* kPaperFields =
    "title,abstract,citationCount,references,publicationDate,fieldsOfStudy";

std::string replay_file(const std::string& dir, const std::string& path) {
  return dir + "/" + to_hex(fnv1a64(path)) + ".json";
}

}  // namespace

std::string GraphClient::get(const std::string& path) const {
  if (!opts_.replay_dir.empty() && !opts_.record) {
    const std::string file = replay_file(opts_.replay_dir, path);
    if (!std::filesystem::exists(file)) {
      throw Error(ErrorCode::ReplayMiss,
                  "no replay entry for " + path + " (" + file + ")");
    }
    return read_file(file);
  }

  httplib::Client client(opts_.base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  httplib::Headers headers;
  if (!opts_.api_key.empty()) headers.emplace("x-api-key", opts_.api_key);

  std::string body;
  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, opts_.max_retries); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::seconds(1 << (attempt - 1)));
    }
    auto res = client.Get(path, headers);
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 404) {
      throw Error(ErrorCode::NotFound, "not found: " + path);
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      if (res->status >= 400 && res->status < 500 && res->status != 429) break;
      continue;
    }
    body = res->body;
    last_error.clear();
    break;
  }
  if (!last_error.empty()) {
    throw Error(ErrorCode::TransportError, last_error + " for " + path);
  }
  if (!opts_.replay_dir.empty()) {
    write_file_atomic(replay_file(opts_.replay_dir, path), body);
  }
  return body;
}

Paper GraphClient::fetch_paper(const std::string& id) const {
  const std::string path =
      "/graph/v1/paper/" + id + "?fields=" + kPaperFields;
  json j;
  try {
    j = json::parse(get(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string("bad graph response: ") + e.what());
  }
  Paper p;
  p.id = j.value("paperId", id);
  if (j.contains("title") && !j["title"].is_null()) p.title = j["title"];
  if (j.contains("abstract") && !j["abstract"].is_null()) {
    p.abstract_text = j["abstract"];
  }
  p.missing_abstract = p.abstract_text.empty();
  if (j.contains("citationCount") && !j["citationCount"].is_null()) {
    p.citation_count = j["citationCount"].get<long>();
  }
  if (j.contains("references") && j["references"].is_array()) {
    std::set<std::string> seen;
    for (const auto& r : j["references"]) {
      if (r.contains("paperId") && !r["paperId"].is_null()) {
        std::string rid = r["paperId"];
        if (seen.insert(rid).second) p.reference_ids.push_back(std::move(rid));
      }
    }
  }
  if (j.contains("publicationDate") && j["publicationDate"].is_string()) {
    p.published = Date::parse(j["publicationDate"]);
  }
  if (j.contains("fieldsOfStudy") && j["fieldsOfStudy"].is_array()) {
    for (const auto& f : j["fieldsOfStudy"]) {
      if (f.is_string()) p.fields_of_study.push_back(f);
    }
  }
  p.validate();
  return p;
}

std::vector<std::string> GraphClient::fetch_citing_ids(
    const std::string& id) const {
  const std::string path =
      "/graph/v1/paper/" + id + "/citations?fields=paperId&limit=1000";
  json j;
  try {
    j = json::parse(get(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string("bad graph response: ") + e.what());
  }
  std::vector<std::string> out;
  for (const auto& row : j.value("data", json::array())) {
    if (row.contains("citingPaper") && row["citingPaper"].contains("paperId") &&
        !row["citingPaper"]["paperId"].is_null()) {
      out.push_back(row["citingPaper"]["paperId"]);
    }
  }
  return out;
}

}  // namespace ra
