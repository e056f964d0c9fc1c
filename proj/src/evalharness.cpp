#include "researchagent/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "researchagent/errors.hpp"
#include "researchagent/text.hpp"

namespace ra {

// ---------------------------------------------------------------------------
// ScoreTable

std::map<Stage, double> ScoreTable::stage_averages() const {
  std::map<Stage, double> sums;
  std::map<Stage, long> counts;
  for (const auto& r : rows) {
    sums[r.stage] += r.rating;
    counts[r.stage] += 1;
  }
  std::map<Stage, double> out;
  for (const auto& [stage, sum] : sums) out[stage] = sum / counts[stage];
  return out;
}

std::map<int, long> ScoreTable::distribution() const {
  std::map<int, long> out;
  for (const auto& r : rows) out[r.rating] += 1;
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

ScoreTable ScoreTable::load_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, path + ": empty scores file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "idea_id,stage,criterion,rating") {
    throw Error(ErrorCode::ParseError, path + ": bad header '" + line + "'");
  }
  ScoreTable table;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    ScoreRow row;
    row.idea_id = fields[0];
    row.stage = stage_from_name(fields[1]);
    row.criterion = fields[2];
    try {
      row.rating = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": bad rating");
    }
    if (row.rating < 1 || row.rating > 5) {
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": rating out of range");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void ScoreTable::save_csv(const std::string& path) const {
  std::string out = "idea_id,stage,criterion,rating\n";
  for (const auto& r : rows) {
    out += csv_quote(r.idea_id);
    out += ',';
    out += stage_name(r.stage);
    out += ',';
    out += csv_quote(r.criterion);
    out += ',';
    out += std::to_string(r.rating);
    out += '\n';
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// statistics

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::Undefined, "correlation undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::InvalidInput, "spearman: length mismatch");
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::InvalidInput, "spearman: need at least 2 points");
  }
  return pearson(average_ranks(xs), average_ranks(ys));
}

double cohen_kappa(const std::vector<std::string>& a,
                   const std::vector<std::string>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::InvalidInput, "cohen_kappa: length mismatch");
  }
  if (a.empty()) {
    throw Error(ErrorCode::InvalidInput, "cohen_kappa: empty input");
  }
  const double n = static_cast<double>(a.size());
  long agree = 0;
  std::map<std::string, long> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
    ca[a[i]] += 1;
    cb[b[i]] += 1;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : ca) {
    auto it = cb.find(label);
    if (it != cb.end()) pe += (count / n) * (it->second / n);
  }
  if (pe == 1.0) {
    if (po == 1.0) return 1.0;
    throw Error(ErrorCode::Undefined, "cohen_kappa: p_e == 1 with disagreement");
  }
  return (po - pe) / (1.0 - pe);
}

// ---------------------------------------------------------------------------
// pairwise comparison

namespace {

std::string stage_text(const Idea& idea, Stage stage) {
  const IdeaComponent* c = nullptr;
  switch (stage) {
    case Stage::Problem: c = &idea.problem; break;
    case Stage::Method: c = &idea.method; break;
    case Stage::Experiment: c = &idea.experiment; break;
  }
  if (c->body.empty()) {
    throw Error(ErrorCode::InvalidInput,
                std::string("idea has no ") + stage_name(stage) + " component");
  }
  std::string out = c->body;
  if (!c->rationale.empty()) out += "\nRationale: " + c->rationale;
  return out;
}

}  // namespace

ChatRequest render_pairwise_prompt(const Idea& a, const Idea& b, Stage stage,
                                   const CriteriaSet& criteria, bool swapped,
                                   const std::string& model_name) {
  const Idea& first = swapped ? b : a;
  const Idea& second = swapped ? a : b;
  std::ostringstream user;
  user << "You are going to compare two research " << stage_name(stage)
       << " proposals and decide which one is better overall.\n\n"
       << "Judge them on the following criteria:\n";
  for (const auto& name : criteria_names(stage)) {
    user << "- " << name << ": " << criteria.get(stage, name).definition << "\n";
  }
  user << "\nIdea 1:\n" << stage_text(first, stage) << "\n\nIdea 2:\n"
       << stage_text(second, stage)
       << "\n\nAfter weighing the criteria, respond in the format of\n"
          "Better: Idea 1 or Idea 2";
  ChatRequest req;
  req.system_message =
      "You are an AI assistant whose primary goal is to judge pairs of "
      "research ideas impartially against explicit criteria.";
  req.user_message = user.str();
  req.model_name = model_name;
  req.temperature = kReviewTemperature;
  req.max_output_tokens = 512;
  return req;
}

PairwiseOutcome pairwise_compare(const Idea& a, const Idea& b, Stage stage,
                                 const CriteriaSet& criteria, ChatClient& llm,
                                 std::uint64_t seed,
                                 const std::string& model_name) {
  std::mt19937_64 rng(seed);
  const bool swapped = (rng() & 1u) != 0;
  const ChatRequest req =
      render_pairwise_prompt(a, b, stage, criteria, swapped, model_name);
  const Completion c = llm.complete(req);

  PairwiseOutcome out;
  out.idea_a = a.provenance.core_id;
  out.idea_b = b.provenance.core_id;
  out.swapped = swapped;
  out.seed = seed;
  out.transcript = c.text;

  // find the verdict on the "Better:" line; anything unparseable is a tie
  int slot = 0;  // 1 or 2
  std::istringstream lines(c.text);
  std::string line;
  while (std::getline(lines, line)) {
    auto pos = line.find("Better");
    if (pos == std::string::npos) continue;
    const bool has1 = line.find("Idea 1", pos) != std::string::npos;
    const bool has2 = line.find("Idea 2", pos) != std::string::npos;
    if (has1 != has2) slot = has1 ? 1 : 2;
    break;
  }
  if (slot == 0) {
    out.winner = PairwiseWinner::Tie;
  } else {
    const bool first_won = (slot == 1);
    out.winner = (first_won != swapped) ? PairwiseWinner::A : PairwiseWinner::B;
  }
  return out;
}

double win_ratio(const std::vector<PairwiseOutcome>& outcomes,
                 PairwiseWinner side) {
  if (outcomes.empty()) {
    throw Error(ErrorCode::InvalidInput, "win_ratio: no outcomes");
  }
  long wins = 0;
  for (const auto& o : outcomes) {
    if (o.winner == side) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(outcomes.size());
}

// ---------------------------------------------------------------------------
// citation buckets

std::vector<Bucket> citation_buckets(const ScoreTable& scores,
                                     const std::vector<Paper>& papers,
                                     const std::vector<long>& edges) {
  if (edges.empty()) {
    throw Error(ErrorCode::InvalidInput, "citation_buckets: no edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) {
      throw Error(ErrorCode::InvalidInput,
                  "citation_buckets: edges must be strictly increasing");
    }
  }
  std::map<std::string, long> citations;
  for (const auto& p : papers) citations[p.id] = p.citation_count;

  // mean rating per scored paper
  std::map<std::string, std::pair<double, long>> per_paper;  // sum, count
  for (const auto& r : scores.rows) {
    per_paper[r.idea_id].first += r.rating;
    per_paper[r.idea_id].second += 1;
  }

  const std::size_t nbuckets = edges.size();  // last bucket is open-ended
  std::vector<long> population(nbuckets, 0);
  std::vector<double> sum(nbuckets, 0.0);
  for (const auto& [id, agg] : per_paper) {
    auto it = citations.find(id);
    if (it == citations.end()) continue;
    const long c = it->second;
    if (c < edges.front()) continue;  // below range
    std::size_t bi = nbuckets - 1;
    for (std::size_t i = 0; i + 1 < nbuckets; ++i) {
      if (c >= edges[i] && c < edges[i + 1]) {
        bi = i;
        break;
      }
    }
    population[bi] += 1;
    sum[bi] += agg.first / agg.second;
  }

  std::vector<Bucket> out;
  for (std::size_t i = 0; i < nbuckets; ++i) {
    if (population[i] == 0) continue;
    Bucket b;
    b.lo = edges[i];
    if (i + 1 < nbuckets) b.hi = edges[i + 1];
    b.population = population[i];
    b.mean_score = sum[i] / population[i];
    out.push_back(b);
  }
  return out;
}

}  // namespace ra
