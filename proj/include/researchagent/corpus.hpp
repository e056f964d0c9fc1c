#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ra {

// Calendar date, no time zone. Compared lexicographically on (y, m, d).
struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  static Date parse(const std::string& iso);  // "YYYY-MM-DD"
  std::string str() const;
};

struct Paper {
  std::string id;
  std::string title;
  std::string abstract_text;
  long citation_count = 0;
  std::vector<std::string> reference_ids;
  Date published;
  std::vector<std::string> fields_of_study;
  bool missing_abstract = false;  // warning flag, not an error

  void validate() const;  // throws InvalidInput on broken invariants
};

struct CorpusFilter {
  long min_citations = 20;
  Date earliest_date{2023, 5, 1};
  int max_references = 10;
};

// Papers with citation_count >= min_citations and published >= earliest_date,
// in descending citation order, ties by ascending id.
std::vector<Paper> select_core_papers(const std::vector<Paper>& corpus,
                                      const CorpusFilter& filter);

// TF-IDF cosine over unigram tokens; IDF from the 2-document collection.
double abstract_similarity(const std::string& a, const std::string& b);

// Top-n candidates by abstract similarity to the core paper, descending,
// ties by ascending id. Candidates without abstracts are skipped.
std::vector<Paper> rank_references(const Paper& core,
                                   const std::vector<Paper>& candidates,
                                   int n,
                                   std::vector<std::string>* warnings = nullptr);

// JSONL corpus file, one Paper per line, canonical form sorted by id.
std::vector<Paper> load_corpus(const std::string& path);
void save_corpus(const std::vector<Paper>& papers, const std::string& path);

Paper paper_from_json(const std::string& line);
std::string paper_to_json(const Paper& p);

// Academic-graph client over the Semantic Scholar response schema. All
// traffic can be redirected to a replay directory for offline runs.
class GraphClient {
 public:
  struct Options {
    std::string base_url;          // e.g. https://api.semanticscholar.org
    std::string api_key;           // empty = unauthenticated
    std::string replay_dir;        // non-empty = fully offline
    bool record = false;           // with replay_dir: fetch live then store
    int max_retries = 3;
  };

  explicit GraphClient(Options opts);

  Paper fetch_paper(const std::string& id) const;
  // Ids of papers citing `id` (direction per §Open Questions config flag).
  std::vector<std::string> fetch_citing_ids(const std::string& id) const;

 private:
  std::string get(const std::string& path) const;
  Options opts_;
};

}  // namespace ra
