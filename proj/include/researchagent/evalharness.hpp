#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "researchagent/review.hpp"

namespace ra {

struct ScoreRow {
  std::string idea_id;
  Stage stage;
  std::string criterion;
  int rating = 0;
};

struct ScoreTable {
  std::vector<ScoreRow> rows;

  // Averages are always recomputed from rows.
  std::map<Stage, double> stage_averages() const;
  std::map<int, long> distribution() const;  // rating 1..5 -> count

  static ScoreTable load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

// Rank correlation with average ranks for ties. Throws on length mismatch,
// n < 2, or a constant vector.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// (p_o - p_e) / (1 - p_e); p_e == 1 is defined as 1.0 when p_o == 1.
double cohen_kappa(const std::vector<std::string>& a,
                   const std::vector<std::string>& b);

enum class PairwiseWinner { A, B, Tie };

struct PairwiseOutcome {
  std::string idea_a;
  std::string idea_b;
  PairwiseWinner winner = PairwiseWinner::Tie;
  bool swapped = false;        // B presented as "Idea 1"
  std::uint64_t seed = 0;
  std::string transcript;      // raw judge response
};

ChatRequest render_pairwise_prompt(const Idea& a, const Idea& b, Stage stage,
                                   const CriteriaSet& criteria, bool swapped,
                                   const std::string& model_name);

// Positions randomized from the seed; verdict de-anonymized afterwards.
// An unparseable verdict becomes an explicit tie.
PairwiseOutcome pairwise_compare(const Idea& a, const Idea& b, Stage stage,
                                 const CriteriaSet& criteria, ChatClient& llm,
                                 std::uint64_t seed,
                                 const std::string& model_name);

double win_ratio(const std::vector<PairwiseOutcome>& outcomes,
                 PairwiseWinner side);

struct Bucket {
  long lo = 0;                     // inclusive
  std::optional<long> hi;          // exclusive; nullopt = open-ended
  long population = 0;
  double mean_score = 0.0;
};

// Half-open buckets from strictly increasing edges; empty buckets absent.
std::vector<Bucket> citation_buckets(const ScoreTable& scores,
                                     const std::vector<Paper>& papers,
                                     const std::vector<long>& edges);

}  // namespace ra
