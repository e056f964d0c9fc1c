#include "researchagent/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "researchagent/entities.hpp"
#include "researchagent/errors.hpp"
#include "researchagent/evalharness.hpp"
#include "researchagent/kstore.hpp"
#include "researchagent/review.hpp"
#include "researchagent/text.hpp"

namespace fs = std::filesystem;

namespace ra {

namespace {

std::string resolve(const Config& cfg, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(cfg.output_dir) / path).string();
}

void ensure_output_dir(const Config& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
                "cannot create output directory " + cfg.output_dir + ": " +
                    ec.message());
  }
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

ChatClient make_chat_client(const Config& cfg) {
  ChatClient::Options opts;
  if (cfg.llm_backend == "live") opts.backend = Backend::Live;
  else if (cfg.llm_backend == "cache") opts.backend = Backend::Cache;
  else opts.backend = Backend::Replay;
  opts.base_url = cfg.llm_base_url;
  opts.api_key = env_or_empty("LLM_API_KEY");
  opts.cache_dir = cfg.llm_cache_dir;
  opts.max_retries = cfg.llm_max_retries;
  return ChatClient(opts);
}

// Annotations file when configured, otherwise LLM extraction per paper.
std::map<std::string, EntityMultiset> corpus_entities(
    const Config& cfg, const std::vector<Paper>& papers, ChatClient& llm,
    std::ostream& out) {
  if (!cfg.annotations_file.empty()) {
    std::vector<std::string> warnings;
    auto sets = import_annotations(cfg.annotations_file, &warnings);
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    return sets;
  }
  std::map<std::string, EntityMultiset> sets;
  LlmExtractor extractor(llm, cfg.entity_cap, cfg.llm_model);
  for (const auto& p : papers) {
    EntityMultiset m = extract_entities(p, extractor);
    m.paper_id = p.id;
    sets[p.id] = std::move(m);
  }
  return sets;
}

std::vector<Paper> papers_by_ids(const std::vector<Paper>& corpus,
                                 const std::vector<std::string>& ids) {
  std::map<std::string, const Paper*> index;
  for (const auto& p : corpus) index[p.id] = &p;
  std::vector<Paper> out;
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it != index.end()) out.push_back(*it->second);
  }
  return out;
}

const Paper& find_paper(const std::vector<Paper>& corpus, const std::string& id) {
  for (const auto& p : corpus) {
    if (p.id == id) return p;
  }
  throw Error(ErrorCode::NotFound, "paper '" + id + "' not in corpus");
}

GenerationContext make_context(const Config& cfg, const Paper& core,
                               std::vector<Paper> refs,
                               std::vector<std::string> entities) {
  GenerationContext ctx;
  ctx.core = core;
  ctx.references = std::move(refs);
  ctx.entities = std::move(entities);
  ctx.template_dir = cfg.template_dir;
  ctx.model_name = cfg.llm_model;
  return ctx;
}

std::vector<Paper> select_references(const Config& cfg,
                                     const std::vector<Paper>& corpus,
                                     const Paper& core, std::ostream& out) {
  if (!cfg.use_references) return {};
  const auto candidates = papers_by_ids(corpus, core.reference_ids);
  std::vector<std::string> warnings;
  auto refs = rank_references(core, candidates, cfg.max_references, &warnings);
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return refs;
}

std::vector<std::string> retrieve_entity_names(const Config& cfg,
                                               const EntityMultiset& context,
                                               std::ostream& out) {
  const std::string path = resolve(cfg, cfg.store_path);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::NotFound,
                "knowledge store not found at " + path +
                    "; run build-store first");
  }
  const CooccurrenceStore store = CooccurrenceStore::load(path);
  const RetrievalResult result = store.retrieve(context, cfg.top_k, cfg.alpha);
  for (const auto& w : result.warnings) out << "warning: " << w << "\n";
  std::vector<std::string> names;
  for (const auto& [name, score] : result.entries) names.push_back(name);
  return names;
}

ScoreTable scores_from_reviews(const std::string& idea_id,
                               const std::vector<Review>& reviews) {
  ScoreTable t;
  for (const auto& r : reviews) {
    t.rows.push_back({idea_id, r.stage, r.criterion, r.rating});
  }
  return t;
}

void print_stage_averages(const ScoreTable& scores, std::ostream& out) {
  for (const auto& [stage, avg] : scores.stage_averages()) {
    out << stage_name(stage) << " average: " << std::fixed
        << std::setprecision(2) << avg << "\n";
    out.unsetf(std::ios::floatfield);
  }
}

}  // namespace

void write_run_manifest(const Config& cfg, const std::string& out_dir) {
  std::ostringstream m;
  m << "[config]\n" << cfg.to_text() << "\n[digests]\n";
  auto digest_of = [](const std::string& path) -> std::string {
    if (path.empty() || !fs::exists(path)) return "absent";
    return to_hex(fnv1a64(read_file(path)));
  };
  m << "store = " << digest_of(resolve(cfg, cfg.store_path)) << "\n";
  m << "criteria = " << digest_of(cfg.criteria_file) << "\n";
  if (fs::is_directory(cfg.template_dir)) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(cfg.template_dir)) {
      if (e.is_regular_file()) files.push_back(e.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      m << "template " << f << " = "
        << to_hex(fnv1a64(read_file((fs::path(cfg.template_dir) / f).string())))
        << "\n";
    }
  }
  write_file_atomic((fs::path(out_dir) / "manifest.txt").string(), m.str());
}

void cmd_build_store(const Config& cfg, std::ostream& out) {
  cfg.validate();
  ensure_output_dir(cfg);
  std::vector<Paper> papers;
  if (!cfg.corpus_file.empty()) papers = load_corpus(cfg.corpus_file);
  ChatClient llm = make_chat_client(cfg);
  const auto sets = corpus_entities(cfg, papers, llm, out);
  std::vector<EntityMultiset> multisets;
  for (const auto& p : papers) {
    auto it = sets.find(p.id);
    if (it != sets.end()) multisets.push_back(it->second);
  }
  const CooccurrenceStore store = build_store(multisets);
  store.check_invariants();
  store.save(resolve(cfg, cfg.store_path));
  out << "entities: " << store.vocab().size() << "\n"
      << "pairs: " << store.pair_entries() << "\n"
      << "total occurrences: " << store.total_occurrences() << "\n";
}

void cmd_generate(const Config& cfg, const std::string& core_id,
                  std::ostream& out) {
  cfg.validate();
  ensure_output_dir(cfg);
  const std::vector<Paper> corpus = load_corpus(cfg.corpus_file);
  const Paper& core = find_paper(corpus, core_id);
  ChatClient llm = make_chat_client(cfg);

  std::vector<std::string> entities;
  if (cfg.use_entities) {
    EntityMultiset context;
    if (!cfg.annotations_file.empty()) {
      auto sets = import_annotations(cfg.annotations_file);
      auto it = sets.find(core.id);
      if (it != sets.end()) context = it->second;
    } else {
      LlmExtractor extractor(llm, cfg.entity_cap, cfg.llm_model);
      context = extract_entities(core, extractor);
    }
    context.paper_id = core.id;
    entities = retrieve_entity_names(cfg, context, out);
  }

  const GenerationContext ctx =
      make_context(cfg, core, select_references(cfg, corpus, core, out),
                   std::move(entities));

  const auto idea_json = (fs::path(cfg.output_dir) / "idea.json").string();
  const auto idea_md = (fs::path(cfg.output_dir) / "idea.md").string();
  write_run_manifest(cfg, cfg.output_dir);

  if (!cfg.review_enabled) {
    const Idea idea = generate_idea(ctx, llm);
    write_file_atomic(idea_json, idea.to_json() + "\n");
    write_file_atomic(idea_md, idea.to_markdown());
    out << "idea written to " << idea_json << "\n";
    return;
  }

  const CriteriaSet criteria = CriteriaSet::load(cfg.criteria_file);
  const auto trajectory_path =
      (fs::path(cfg.output_dir) / "trajectory.json").string();

  // rounds run inline so partial artifacts survive a mid-run failure
  std::vector<TrajectoryEntry> trajectory;
  Idea idea = generate_idea(ctx, llm);
  for (int round = 0; round < cfg.max_rounds; ++round) {
    write_file_atomic(idea_json, idea.to_json() + "\n");
    write_file_atomic(idea_md, idea.to_markdown());
    ReviewRun run = review_idea(idea, criteria, llm, ctx.core, ctx.references,
                                cfg.template_dir, cfg.llm_model);
    for (const auto& f : run.failures) {
      out << "warning: review failed for " << stage_name(f.stage) << "/"
          << f.criterion << ": " << f.message << "\n";
    }
    trajectory.push_back({idea, run.reviews});
    if (cfg.max_rounds > 1) {
      write_file_atomic(trajectory_path, trajectory_to_json(trajectory) + "\n");
    }
    if (round + 1 < cfg.max_rounds) {
      idea = refine_idea(idea, run.reviews, llm, ctx);
    }
  }

  const ScoreTable scores =
      scores_from_reviews(core.id, trajectory.back().reviews);
  scores.save_csv((fs::path(cfg.output_dir) / "scores.csv").string());
  out << "rounds: " << cfg.max_rounds << "\n"
      << "llm calls: " << llm.calls_total() << "\n";
  print_stage_averages(scores, out);
}

void cmd_review(const Config& cfg, const std::string& idea_path,
                std::ostream& out) {
  cfg.validate();
  ensure_output_dir(cfg);
  const Idea idea = Idea::from_json(read_file(idea_path));
  const std::vector<Paper> corpus = load_corpus(cfg.corpus_file);
  const Paper& core = find_paper(corpus, idea.provenance.core_id);
  const auto refs = papers_by_ids(corpus, idea.provenance.reference_ids);
  const CriteriaSet criteria = CriteriaSet::load(cfg.criteria_file);
  ChatClient llm = make_chat_client(cfg);
  const ReviewRun run = review_idea(idea, criteria, llm, core, refs,
                                    cfg.template_dir, cfg.llm_model);
  for (const auto& f : run.failures) {
    out << "warning: review failed for " << stage_name(f.stage) << "/"
        << f.criterion << ": " << f.message << "\n";
  }
  const ScoreTable scores = scores_from_reviews(core.id, run.reviews);
  const auto csv = (fs::path(cfg.output_dir) / "scores.csv").string();
  scores.save_csv(csv);
  out << "reviews: " << run.reviews.size() << "\n";
  print_stage_averages(scores, out);
  out << "scores written to " << csv << "\n";
}

void cmd_refine(const Config& cfg, const std::string& idea_path,
                std::ostream& out) {
  cfg.validate();
  ensure_output_dir(cfg);
  const Idea idea = Idea::from_json(read_file(idea_path));
  const std::vector<Paper> corpus = load_corpus(cfg.corpus_file);
  const Paper& core = find_paper(corpus, idea.provenance.core_id);
  const auto refs = papers_by_ids(corpus, idea.provenance.reference_ids);
  const CriteriaSet criteria = CriteriaSet::load(cfg.criteria_file);
  ChatClient llm = make_chat_client(cfg);
  const ReviewRun run = review_idea(idea, criteria, llm, core, refs,
                                    cfg.template_dir, cfg.llm_model);
  GenerationContext ctx =
      make_context(cfg, core, refs, idea.provenance.entities);
  const Idea refined = refine_idea(idea, run.reviews, llm, ctx);
  const auto path = (fs::path(cfg.output_dir) / "idea.json").string();
  write_file_atomic(path, refined.to_json() + "\n");
  write_file_atomic((fs::path(cfg.output_dir) / "idea.md").string(),
                    refined.to_markdown());
  out << "round: " << refined.provenance.round << "\n"
      << "refined idea written to " << path << "\n";
}

void cmd_evaluate(const Config& cfg, const std::string& scores_csv,
                  std::ostream& out) {
  cfg.validate();
  ensure_output_dir(cfg);
  const ScoreTable scores = ScoreTable::load_csv(scores_csv);
  out << "rows: " << scores.rows.size() << "\n";
  print_stage_averages(scores, out);
  std::ostringstream report;
  report << "# Evaluation report\n\n| stage | average |\n|---|---|\n";
  for (const auto& [stage, avg] : scores.stage_averages()) {
    report << "| " << stage_name(stage) << " | " << std::fixed
           << std::setprecision(2) << avg << " |\n";
  }
  report << "\n| rating | count |\n|---|---|\n";
  for (const auto& [rating, count] : scores.distribution()) {
    report << "| " << rating << " | " << count << " |\n";
    out << "rating " << rating << ": " << count << "\n";
  }
  const auto path = (fs::path(cfg.output_dir) / "report.md").string();
  write_file_atomic(path, report.str());
  out << "report written to " << path << "\n";
}

void cmd_compare(const Config& cfg, const std::string& idea_a_path,
                 const std::string& idea_b_path, const std::string& stage,
                 std::ostream& out) {
  cfg.validate();
  ensure_output_dir(cfg);
  const Idea a = Idea::from_json(read_file(idea_a_path));
  const Idea b = Idea::from_json(read_file(idea_b_path));
  const CriteriaSet criteria = CriteriaSet::load(cfg.criteria_file);
  ChatClient llm = make_chat_client(cfg);
  const PairwiseOutcome o = pairwise_compare(
      a, b, stage_from_name(stage), criteria, llm, cfg.seed, cfg.llm_model);
  const char* winner = o.winner == PairwiseWinner::A   ? "A"
                       : o.winner == PairwiseWinner::B ? "B"
                                                       : "tie";
  out << "winner: " << winner << "\n"
      << "swapped: " << (o.swapped ? "true" : "false") << "\n"
      << "seed: " << o.seed << "\n";
}

void cmd_induce_criteria(const Config& cfg, const std::string& annotations,
                         std::ostream& out) {
  cfg.validate();
  ensure_output_dir(cfg);
  const AnnotationMap map = load_annotations(annotations);
  const CriteriaSet base = CriteriaSet::load(cfg.criteria_file);
  ChatClient llm = make_chat_client(cfg);
  const CriteriaSet induced = induce_criteria(map, llm, base, cfg.llm_model);
  long updated = 0;
  for (const auto& [stage, per_criterion] : map) {
    updated += static_cast<long>(per_criterion.size());
  }
  const auto path =
      (fs::path(cfg.output_dir) / "induced_criteria.json").string();
  induced.save(path);
  out << "criteria updated: " << updated << "\n"
      << "written to " << path << "\n";
}

void cmd_stats(const Config& cfg, std::ostream& out) {
  cfg.validate();
  const std::string path = resolve(cfg, cfg.store_path);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::NotFound, "knowledge store not found at " + path);
  }
  const CooccurrenceStore store = CooccurrenceStore::load(path);
  out << "entities: " << store.vocab().size() << "\n"
      << "pairs: " << store.pair_entries() << "\n"
      << "total occurrences: " << store.total_occurrences() << "\n";
  if (!cfg.annotations_file.empty()) {
    const auto sets = import_annotations(cfg.annotations_file);
    if (!sets.empty()) {
      long distinct = 0;
      for (const auto& [id, m] : sets) {
        distinct += static_cast<long>(m.mentions.size());
      }
      out << "mean entities per paper: " << std::fixed << std::setprecision(2)
          << static_cast<double>(distinct) / sets.size() << "\n";
    }
  }
}

}  // namespace ra
