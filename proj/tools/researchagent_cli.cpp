// CLI front-end; everything goes through the C API so the shared library is
// exercised exactly the way external callers see it.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "researchagent.h"

namespace {

struct ConfigHandle {
  ra_config* cfg = nullptr;
  ~ConfigHandle() { ra_config_free(cfg); }
};

int fail(const char* what, ra_status status) {
  std::fprintf(stderr, "error: %s: %s (status %d)\n", what, ra_last_error(),
               static_cast<int>(status));
  return 1;
}

int emit(ra_status status, char* report, const char* what) {
  if (report) {
    std::fputs(report, stdout);
    ra_string_free(report);
  }
  if (status != RA_OK) return fail(what, status);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Research idea generation and review pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;  // key=value, applied after the file
  app.add_option("--config", config_path, "Config file (key = value lines)");
  app.add_option("--set", overrides, "Override a config key, e.g. --set top_k=3");

  bool no_entities = false;
  bool no_references = false;
  bool no_review = false;
  app.add_flag("--no-entities", no_entities, "Disable entity retrieval");
  app.add_flag("--no-references", no_references, "Disable reference augmentation");
  app.add_flag("--no-review", no_review, "Disable reviewing agents");

  auto* build = app.add_subcommand("build-store", "Build the co-occurrence knowledge store");

  std::string core_id;
  auto* generate = app.add_subcommand("generate", "Generate (and refine) an idea for a core paper");
  generate->add_option("--core", core_id, "Core paper id")->required();

  std::string idea_path;
  auto* review = app.add_subcommand("review", "Review an idea file against the criteria");
  review->add_option("--idea", idea_path, "Idea JSON path")->required();

  std::string refine_path;
  auto* refine = app.add_subcommand("refine", "Review an idea once and regenerate it");
  refine->add_option("--idea", refine_path, "Idea JSON path")->required();

  std::string scores_csv;
  auto* evaluate = app.add_subcommand("evaluate", "Summarize a scores CSV");
  evaluate->add_option("--scores", scores_csv, "Scores CSV path")->required();

  std::string idea_a, idea_b, stage = "problem";
  auto* compare = app.add_subcommand("compare", "Pairwise-compare two idea files");
  compare->add_option("--a", idea_a, "First idea JSON path")->required();
  compare->add_option("--b", idea_b, "Second idea JSON path")->required();
  compare->add_option("--stage", stage, "Stage: problem | method | experiment");

  std::string annotations_path;
  auto* induce = app.add_subcommand("induce-criteria", "Induce rubrics from annotated examples");
  induce->add_option("--annotations", annotations_path, "Annotations JSON path")->required();

  auto* stats = app.add_subcommand("stats", "Print knowledge store statistics");

  CLI11_PARSE(app, argc, argv);

  ConfigHandle handle;
  ra_status status = config_path.empty()
                         ? ra_config_default(&handle.cfg)
                         : ra_config_load(config_path.c_str(), &handle.cfg);
  if (status != RA_OK) return fail("loading config", status);

  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return 1;
    }
    status = ra_config_set(handle.cfg, kv.substr(0, eq).c_str(),
                           kv.substr(eq + 1).c_str());
    if (status != RA_OK) return fail("applying override", status);
  }
  const std::vector<std::pair<const char*, bool>> flag_overrides{
      {"use_entities", no_entities},
      {"use_references", no_references},
      {"review_enabled", no_review},
  };
  for (const auto& [key, disabled] : flag_overrides) {
    if (!disabled) continue;
    status = ra_config_set(handle.cfg, key, "false");
    if (status != RA_OK) return fail("applying flag", status);
  }

  char* report = nullptr;
  if (build->parsed()) {
    return emit(ra_build_store(handle.cfg, &report), report, "build-store");
  }
  if (generate->parsed()) {
    return emit(ra_generate(handle.cfg, core_id.c_str(), &report), report,
                "generate");
  }
  if (review->parsed()) {
    return emit(ra_review(handle.cfg, idea_path.c_str(), &report), report,
                "review");
  }
  if (refine->parsed()) {
    return emit(ra_refine(handle.cfg, refine_path.c_str(), &report), report,
                "refine");
  }
  if (evaluate->parsed()) {
    return emit(ra_evaluate(handle.cfg, scores_csv.c_str(), &report), report,
                "evaluate");
  }
  if (compare->parsed()) {
    return emit(ra_compare(handle.cfg, idea_a.c_str(), idea_b.c_str(),
                           stage.c_str(), &report),
                report, "compare");
  }
  if (induce->parsed()) {
    return emit(ra_induce_criteria(handle.cfg, annotations_path.c_str(), &report),
                report, "induce-criteria");
  }
  if (stats->parsed()) {
    return emit(ra_stats(handle.cfg, &report), report, "stats");
  }
  return 1;
}
