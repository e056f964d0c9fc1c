#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "researchagent/entities.hpp"

namespace ra {

// Bijective name <-> dense id map; ids assigned by ascending name so that
// identical corpora serialize identically regardless of input order.
class EntityVocabulary {
 public:
  int id_of(const std::string& name) const;  // -1 when absent
  const std::string& name_of(int id) const;
  int size() const { return static_cast<int>(names_.size()); }
  bool contains(const std::string& name) const;

  static EntityVocabulary from_names(std::vector<std::string> names);

 private:
  std::vector<std::string> names_;            // id -> name, sorted
  std::map<std::string, int> ids_;            // name -> id
};

struct RetrievalResult {
  // (entity name, log score), log scores non-increasing.
  std::vector<std::pair<std::string, double>> entries;
  std::vector<std::string> warnings;  // context entities absent from vocab
};

// Sparse symmetric co-occurrence matrix plus per-entity totals.
class CooccurrenceStore {
 public:
  const EntityVocabulary& vocab() const { return vocab_; }
  std::int64_t pair_count(int i, int j) const;  // symmetric accessor
  std::int64_t entity_count(int id) const;
  std::int64_t total_occurrences() const { return total_; }
  std::int64_t row_sum(int id) const;
  std::size_t pair_entries() const { return pairs_.size(); }
  bool empty() const { return vocab_.size() == 0; }

  double prior(int id) const;
  // (pair{i,j} + alpha) / (row_sum(i) + alpha*(m-1)); i is the conditioning
  // entity, j the predicted one. Throws on i == j.
  double conditional(int j, int i, double alpha) const;

  RetrievalResult retrieve(const EntityMultiset& context, int k,
                           double alpha,
                           bool repetition_weighted = false) const;

  void save(const std::string& path) const;
  std::string serialize() const;  // canonical KSTORE v1 bytes
  static CooccurrenceStore load(const std::string& path);
  static CooccurrenceStore deserialize(const std::string& bytes);

  void check_invariants() const;

  friend CooccurrenceStore build_store(const std::vector<EntityMultiset>&);
  friend CooccurrenceStore merge_stores(const CooccurrenceStore&,
                                        const CooccurrenceStore&);

 private:
  EntityVocabulary vocab_;
  std::map<std::pair<int, int>, std::int64_t> pairs_;  // key i < j
  std::vector<std::int64_t> counts_;                   // per id
  std::int64_t total_ = 0;
};

// entity_counts from total mentions; pair{i,j} += m_i * m_j per paper for
// distinct co-occurring entities (same-entity position pairs dropped).
CooccurrenceStore build_store(const std::vector<EntityMultiset>& corpus);

// Counts add under a unioned vocabulary; merge(build(A), build(B)) ==
// build(A ∪ B) for disjoint paper sets.
CooccurrenceStore merge_stores(const CooccurrenceStore& a,
                               const CooccurrenceStore& b);

inline constexpr double kDefaultAlpha = 1.0;
inline constexpr int kDefaultTopK = 5;

}  // namespace ra
