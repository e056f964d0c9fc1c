#include "researchagent/kstore.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"

namespace ra {

// ---------------------------------------------------------------------------
// EntityVocabulary

EntityVocabulary EntityVocabulary::from_names(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  EntityVocabulary v;
  v.names_ = std::move(names);
  for (int i = 0; i < static_cast<int>(v.names_.size()); ++i) {
    v.ids_[v.names_[i]] = i;
  }
  return v;
}

int EntityVocabulary::id_of(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& EntityVocabulary::name_of(int id) const {
  if (id < 0 || id >= static_cast<int>(names_.size())) {
    throw Error(ErrorCode::InvalidInput, "entity id out of range");
  }
  return names_[id];
}

bool EntityVocabulary::contains(const std::string& name) const {
  return ids_.count(name) > 0;
}

// ---------------------------------------------------------------------------
// construction

CooccurrenceStore build_store(const std::vector<EntityMultiset>& corpus) {
  std::vector<std::string> names;
  for (const auto& ms : corpus) {
    for (const auto& [name, _] : ms.mentions) names.push_back(name);
  }
  CooccurrenceStore s;
  s.vocab_ = EntityVocabulary::from_names(std::move(names));
  s.counts_.assign(s.vocab_.size(), 0);

  for (const auto& ms : corpus) {
    ms.validate();
    for (const auto& [name, count] : ms.mentions) {
      s.counts_[s.vocab_.id_of(name)] += count;
      s.total_ += count;
    }
    // cross pairs of the position multiset; same-entity pairs dropped
    for (auto it = ms.mentions.begin(); it != ms.mentions.end(); ++it) {
      auto jt = it;
      for (++jt; jt != ms.mentions.end(); ++jt) {
        int i = s.vocab_.id_of(it->first);
        int j = s.vocab_.id_of(jt->first);
        if (i > j) std::swap(i, j);
        s.pairs_[{i, j}] += static_cast<std::int64_t>(it->second) * jt->second;
      }
    }
  }
  return s;
}

CooccurrenceStore merge_stores(const CooccurrenceStore& a,
                               const CooccurrenceStore& b) {
  std::vector<std::string> names;
  for (int i = 0; i < a.vocab_.size(); ++i) names.push_back(a.vocab_.name_of(i));
  for (int i = 0; i < b.vocab_.size(); ++i) names.push_back(b.vocab_.name_of(i));
  CooccurrenceStore m;
  m.vocab_ = EntityVocabulary::from_names(std::move(names));
  m.counts_.assign(m.vocab_.size(), 0);

  auto add = [&m](const CooccurrenceStore& s) {
    for (int i = 0; i < s.vocab_.size(); ++i) {
      m.counts_[m.vocab_.id_of(s.vocab_.name_of(i))] += s.counts_[i];
    }
    m.total_ += s.total_;
    for (const auto& [key, count] : s.pairs_) {
      int i = m.vocab_.id_of(s.vocab_.name_of(key.first));
      int j = m.vocab_.id_of(s.vocab_.name_of(key.second));
      if (i > j) std::swap(i, j);
      m.pairs_[{i, j}] += count;
    }
  };
  add(a);
  add(b);
  return m;
}

// ---------------------------------------------------------------------------
// queries

std::int64_t CooccurrenceStore::pair_count(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = pairs_.find({i, j});
  return it == pairs_.end() ? 0 : it->second;
}

std::int64_t CooccurrenceStore::entity_count(int id) const {
  if (id < 0 || id >= static_cast<int>(counts_.size())) return 0;
  return counts_[id];
}

std::int64_t CooccurrenceStore::row_sum(int id) const {
  std::int64_t sum = 0;
  for (const auto& [key, count] : pairs_) {
    if (key.first == id || key.second == id) sum += count;
  }
  return sum;
}

double CooccurrenceStore::prior(int id) const {
  if (total_ == 0) {
    throw Error(ErrorCode::InvalidInput, "prior on an empty store");
  }
  const std::int64_t c = entity_count(id);
  return static_cast<double>(c) / static_cast<double>(total_);
}

double CooccurrenceStore::conditional(int j, int i, double alpha) const {
  if (i == j) {
    throw Error(ErrorCode::InvalidInput, "conditional requires i != j");
  }
  if (empty()) {
    throw Error(ErrorCode::InvalidInput, "conditional on an empty store");
  }
  const double m = vocab_.size();
  const double denom = static_cast<double>(row_sum(i)) + alpha * (m - 1.0);
  if (denom == 0.0) return 0.0;
  return (static_cast<double>(pair_count(i, j)) + alpha) / denom;
}

RetrievalResult CooccurrenceStore::retrieve(const EntityMultiset& context,
                                            int k, double alpha,
                                            bool repetition_weighted) const {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be >= 1");
  RetrievalResult result;
  if (empty()) return result;

  std::set<int> context_ids;
  std::map<int, long> context_weights;
  for (const auto& [name, count] : context.mentions) {
    const int id = vocab_.id_of(name);
    if (id < 0) {
      result.warnings.push_back("context entity not in vocabulary: " + name);
      continue;
    }
    context_ids.insert(id);
    context_weights[id] = repetition_weighted ? count : 1;
  }

  std::vector<std::pair<std::string, double>> scored;
  for (int cand = 0; cand < vocab_.size(); ++cand) {
    if (context_ids.count(cand)) continue;
    double score = std::log(prior(cand));
    for (const auto& [ctx_id, weight] : context_weights) {
      const double p = conditional(ctx_id, cand, alpha);
      if (p <= 0.0) {
        score = -std::numeric_limits<double>::infinity();
        break;
      }
      score += weight * std::log(p);
    }
    scored.emplace_back(vocab_.name_of(cand), score);
  }

  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(scored.size()) > k) scored.resize(k);
  result.entries = std::move(scored);
  return result;
}

void CooccurrenceStore::check_invariants() const {
  std::int64_t sum = 0;
  for (auto c : counts_) {
    if (c < 0) throw Error(ErrorCode::InvalidInput, "negative entity count");
    sum += c;
  }
  if (sum != total_) {
    throw Error(ErrorCode::InvalidInput, "total_occurrences mismatch");
  }
  for (const auto& [key, count] : pairs_) {
    if (key.first >= key.second) {
      throw Error(ErrorCode::InvalidInput, "pair key not canonical (i < j)");
    }
    if (count < 1) throw Error(ErrorCode::InvalidInput, "non-positive pair");
    if (count > counts_[key.first] * counts_[key.second]) {
      throw Error(ErrorCode::InvalidInput, "pair count exceeds sanity bound");
    }
  }
}

// ---------------------------------------------------------------------------
// serialization: canonical KSTORE v1

std::string CooccurrenceStore::serialize() const {
  std::ostringstream out;
  out << "KSTORE v1\n";
  out << "M " << vocab_.size() << " TOTAL " << total_ << "\n";
  for (int i = 0; i < vocab_.size(); ++i) {
    out << "ENT " << i << " " << counts_[i] << " " << vocab_.name_of(i) << "\n";
  }
  for (const auto& [key, count] : pairs_) {
    out << "PAIR " << key.first << " " << key.second << " " << count << "\n";
  }
  std::string body = out.str();
  body += "CRC32 " + crc32_hex(body) + "\n";
  return body;
}

void CooccurrenceStore::save(const std::string& path) const {
  write_file_atomic(path, serialize());
}

namespace {

[[noreturn]] void load_fail(int lineno, const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "store line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

CooccurrenceStore CooccurrenceStore::deserialize(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string line;
  int lineno = 0;

  auto next = [&](const char* what) {
    if (!std::getline(in, line)) load_fail(lineno + 1, std::string("truncated, expected ") + what);
    ++lineno;
  };

  next("header");
  if (line != "KSTORE v1") load_fail(lineno, "bad header or version: " + line);

  next("M line");
  std::int64_t m = 0, total = 0;
  {
    std::istringstream ss(line);
    std::string kw1, kw2;
    if (!(ss >> kw1 >> m >> kw2 >> total) || kw1 != "M" || kw2 != "TOTAL" ||
        m < 0 || total < 0) {
      load_fail(lineno, "bad M line: " + line);
    }
  }

  CooccurrenceStore s;
  std::vector<std::string> names(m);
  std::vector<std::int64_t> counts(m);
  for (std::int64_t i = 0; i < m; ++i) {
    next("ENT line");
    std::istringstream ss(line);
    std::string kw;
    std::int64_t id = 0, count = 0;
    if (!(ss >> kw >> id >> count) || kw != "ENT" || id != i || count < 1) {
      load_fail(lineno, "bad ENT line: " + line);
    }
    std::string name;
    std::getline(ss, name);
    if (name.empty() || name[0] != ' ') load_fail(lineno, "missing name");
    name = name.substr(1);
    if (name.empty()) load_fail(lineno, "empty name");
    names[i] = name;
    counts[i] = count;
  }
  if (!std::is_sorted(names.begin(), names.end()) ||
      std::adjacent_find(names.begin(), names.end()) != names.end()) {
    load_fail(lineno, "entity names not strictly sorted");
  }

  std::string checksum;
  std::string body = "KSTORE v1\nM " + std::to_string(m) + " TOTAL " +
                     std::to_string(total) + "\n";
  {
    // recompute the body as-parsed for the checksum
    std::ostringstream b;
    for (std::int64_t i = 0; i < m; ++i) {
      b << "ENT " << i << " " << counts[i] << " " << names[i] << "\n";
    }
    body += b.str();
  }

  std::pair<int, int> prev{-1, -1};
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("CRC32 ", 0) == 0) {
      checksum = line.substr(6);
      if (std::getline(in, line)) load_fail(lineno + 1, "trailing data");
      break;
    }
    std::istringstream ss(line);
    std::string kw;
    std::int64_t i = 0, j = 0, count = 0;
    if (!(ss >> kw >> i >> j >> count) || kw != "PAIR" || count < 1) {
      load_fail(lineno, "bad PAIR line: " + line);
    }
    if (i < 0 || j >= m || i >= j) {
      load_fail(lineno, "PAIR ids must satisfy 0 <= i < j < m: " + line);
    }
    std::pair<int, int> key{static_cast<int>(i), static_cast<int>(j)};
    if (!(prev < key)) load_fail(lineno, "PAIR lines out of order");
    prev = key;
    s.pairs_[key] = count;
    body += "PAIR " + std::to_string(i) + " " + std::to_string(j) + " " +
            std::to_string(count) + "\n";
  }
  if (checksum.empty()) load_fail(lineno, "missing CRC32 line");
  if (crc32_hex(body) != checksum) {
    throw Error(ErrorCode::ParseError, "store checksum mismatch");
  }

  s.vocab_ = EntityVocabulary::from_names(names);
  s.counts_ = std::move(counts);
  s.total_ = total;
  s.check_invariants();
  return s;
}

CooccurrenceStore CooccurrenceStore::load(const std::string& path) {
  return deserialize(read_file(path));
}

}  // namespace ra
