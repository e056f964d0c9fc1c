#pragma once

#include <ostream>
#include <string>

#include "researchagent/config.hpp"

namespace ra {

// Subcommand bodies shared by the C API and the CLI. Each throws ra::Error
// on failure and writes its report to `out`.

void cmd_build_store(const Config& cfg, std::ostream& out);
void cmd_generate(const Config& cfg, const std::string& core_id,
                  std::ostream& out);
void cmd_review(const Config& cfg, const std::string& idea_path,
                std::ostream& out);
void cmd_refine(const Config& cfg, const std::string& idea_path,
                std::ostream& out);
void cmd_evaluate(const Config& cfg, const std::string& scores_csv,
                  std::ostream& out);
void cmd_compare(const Config& cfg, const std::string& idea_a_path,
                 const std::string& idea_b_path, const std::string& stage,
                 std::ostream& out);
void cmd_induce_criteria(const Config& cfg, const std::string& annotations,
                         std::ostream& out);
void cmd_stats(const Config& cfg, std::ostream& out);

// Config snapshot plus content digests of store, templates, and criteria,
// written next to the run outputs.
void write_run_manifest(const Config& cfg, const std::string& out_dir);

}  // namespace ra
