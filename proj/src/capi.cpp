#include "researchagent.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include <json.hpp>

#include "researchagent/config.hpp"
#include "researchagent/errors.hpp"
#include "researchagent/kstore.hpp"
#include "researchagent/pipeline.hpp"

using nlohmann::json;

struct ra_config {
  ra::Config cfg;
};

struct ra_store {
  ra::CooccurrenceStore store;
};

namespace {

thread_local std::string g_last_error;

ra_status status_from(ra::ErrorCode code) {
  switch (code) {
    case ra::ErrorCode::Ok: return RA_OK;
    case ra::ErrorCode::InvalidInput: return RA_ERR_INVALID_INPUT;
    case ra::ErrorCode::NotFound: return RA_ERR_NOT_FOUND;
    case ra::ErrorCode::ParseError: return RA_ERR_PARSE;
    case ra::ErrorCode::RenderError: return RA_ERR_RENDER;
    case ra::ErrorCode::ExtractionError: return RA_ERR_EXTRACTION;
    case ra::ErrorCode::TransportError: return RA_ERR_TRANSPORT;
    case ra::ErrorCode::ReplayMiss: return RA_ERR_REPLAY_MISS;
    case ra::ErrorCode::IoError: return RA_ERR_IO;
    case ra::ErrorCode::StageError: return RA_ERR_STAGE;
    case ra::ErrorCode::InductionError: return RA_ERR_INDUCTION;
    case ra::ErrorCode::Undefined: return RA_ERR_UNDEFINED;
  }
  return RA_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs `body`, translating exceptions into status codes + thread-local
// message. `body` returns void.
template <typename Fn>
ra_status guarded(Fn&& body) {
  try {
    body();
    return RA_OK;
  } catch (const ra::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RA_ERR_INTERNAL;
  }
}

template <typename Fn>
ra_status run_command(const ra_config* cfg, char** report, Fn&& command) {
  if (!cfg) {
    g_last_error = "cfg is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return guarded([&] {
    std::ostringstream out;
    command(cfg->cfg, out);
    if (report) *report = dup_string(out.str());
  });
}

}  // namespace

extern "C" {

const char* ra_last_error(void) { return g_last_error.c_str(); }

void ra_string_free(char* s) { std::free(s); }

ra_status ra_config_load(const char* path, ra_config** out) {
  if (!path || !out) {
    g_last_error = "path/out is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return guarded([&] { *out = new ra_config{ra::Config::load(path)}; });
}

ra_status ra_config_default(ra_config** out) {
  if (!out) {
    g_last_error = "out is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  *out = new ra_config{};
  return RA_OK;
}

ra_status ra_config_set(ra_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "cfg/key/value is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return guarded([&] { cfg->cfg.set(key, value); });
}

void ra_config_free(ra_config* cfg) { delete cfg; }

ra_status ra_build_store(const ra_config* cfg, char** report) {
  return run_command(cfg, report, ra::cmd_build_store);
}

ra_status ra_generate(const ra_config* cfg, const char* core_id, char** report) {
  if (!core_id) {
    g_last_error = "core_id is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return run_command(cfg, report, [&](const ra::Config& c, std::ostream& out) {
    ra::cmd_generate(c, core_id, out);
  });
}

ra_status ra_review(const ra_config* cfg, const char* idea_path, char** report) {
  if (!idea_path) {
    g_last_error = "idea_path is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return run_command(cfg, report, [&](const ra::Config& c, std::ostream& out) {
    ra::cmd_review(c, idea_path, out);
  });
}

ra_status ra_refine(const ra_config* cfg, const char* idea_path, char** report) {
  if (!idea_path) {
    g_last_error = "idea_path is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return run_command(cfg, report, [&](const ra::Config& c, std::ostream& out) {
    ra::cmd_refine(c, idea_path, out);
  });
}

ra_status ra_evaluate(const ra_config* cfg, const char* scores_csv,
                      char** report) {
  if (!scores_csv) {
    g_last_error = "scores_csv is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return run_command(cfg, report, [&](const ra::Config& c, std::ostream& out) {
    ra::cmd_evaluate(c, scores_csv, out);
  });
}

ra_status ra_compare(const ra_config* cfg, const char* idea_a_path,
                     const char* idea_b_path, const char* stage,
                     char** report) {
  if (!idea_a_path || !idea_b_path || !stage) {
    g_last_error = "idea paths/stage is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return run_command(cfg, report, [&](const ra::Config& c, std::ostream& out) {
    ra::cmd_compare(c, idea_a_path, idea_b_path, stage, out);
  });
}

ra_status ra_induce_criteria(const ra_config* cfg, const char* annotations_path,
                             char** report) {
  if (!annotations_path) {
    g_last_error = "annotations_path is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return run_command(cfg, report, [&](const ra::Config& c, std::ostream& out) {
    ra::cmd_induce_criteria(c, annotations_path, out);
  });
}

ra_status ra_stats(const ra_config* cfg, char** report) {
  return run_command(cfg, report, ra::cmd_stats);
}

ra_status ra_store_open(const char* path, ra_store** out) {
  if (!path || !out) {
    g_last_error = "path/out is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return guarded(
      [&] { *out = new ra_store{ra::CooccurrenceStore::load(path)}; });
}

void ra_store_free(ra_store* store) { delete store; }

ra_status ra_store_size(const ra_store* store, int64_t* m,
                        int64_t* total_occurrences, int64_t* pair_entries) {
  if (!store) {
    g_last_error = "store is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  if (m) *m = store->store.vocab().size();
  if (total_occurrences) *total_occurrences = store->store.total_occurrences();
  if (pair_entries)
    *pair_entries = static_cast<int64_t>(store->store.pair_entries());
  return RA_OK;
}

ra_status ra_store_prior(const ra_store* store, const char* entity,
                         double* out) {
  if (!store || !entity || !out) {
    g_last_error = "store/entity/out is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return guarded([&] {
    const int id = store->store.vocab().id_of(entity);
    if (id < 0) {
      throw ra::Error(ra::ErrorCode::NotFound,
                      std::string("entity '") + entity + "' not in store");
    }
    *out = store->store.prior(id);
  });
}

ra_status ra_store_conditional(const ra_store* store, const char* given,
                               const char* entity, double alpha, double* out) {
  if (!store || !given || !entity || !out) {
    g_last_error = "store/given/entity/out is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return guarded([&] {
    const int i = store->store.vocab().id_of(given);
    const int j = store->store.vocab().id_of(entity);
    if (i < 0 || j < 0) {
      throw ra::Error(ra::ErrorCode::NotFound, "entity not in store");
    }
    *out = store->store.conditional(j, i, alpha);
  });
}

ra_status ra_store_retrieve(const ra_store* store, const char* context_json,
                            int k, double alpha, char** result_json) {
  if (!store || !context_json || !result_json) {
    g_last_error = "store/context_json/result_json is NULL";
    return RA_ERR_INVALID_INPUT;
  }
  return guarded([&] {
    json ctx_j;
    try {
      ctx_j = json::parse(context_json);
    } catch (const json::exception& e) {
      throw ra::Error(ra::ErrorCode::ParseError,
                      std::string("bad context json: ") + e.what());
    }
    if (!ctx_j.is_object()) {
      throw ra::Error(ra::ErrorCode::ParseError,
                      "context json must be an object of name -> count");
    }
    ra::EntityMultiset context;
    for (const auto& [name, count] : ctx_j.items()) {
      context.mentions[name] = count.get<long>();
    }
    const ra::RetrievalResult result = store->store.retrieve(context, k, alpha);
    json arr = json::array();
    for (const auto& [name, score] : result.entries) {
      arr.push_back({{"entity", name}, {"log_score", score}});
    }
    *result_json = dup_string(arr.dump());
  });
}

}  // extern "C"
