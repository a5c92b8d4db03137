#include "gsp2p.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "gsp2p/errors.hpp"
#include "gsp2p/pipeline.hpp"
#include "gsp2p/version.hpp"

// Opaque context: configuration + options + last error, no shared state
// between contexts.
struct gsp2p_ctx {
  gsp2p::io::StudyConfig config;
  bool config_loaded = false;
  gsp2p::PipelineOptions options;
  std::string last_error;
};

namespace {

gsp2p_status status_of(gsp2p::ErrorCode code) {
  using gsp2p::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return GSP2P_ERR_INVALID_ARG;
    case ErrorCode::parse: return GSP2P_ERR_PARSE;
    case ErrorCode::numeric: return GSP2P_ERR_NUMERIC;
    case ErrorCode::infeasible: return GSP2P_ERR_INFEASIBLE;
    case ErrorCode::io: return GSP2P_ERR_IO;
    case ErrorCode::internal: return GSP2P_ERR_INTERNAL;
  }
  return GSP2P_ERR_INTERNAL;
}

template <typename Fn>
gsp2p_status guarded(gsp2p_ctx* ctx, Fn&& fn) {
  if (!ctx) return GSP2P_ERR_INVALID_ARG;
  ctx->last_error.clear();
  try {
    return fn();
  } catch (const gsp2p::Error& e) {
    ctx->last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return GSP2P_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* gsp2p_version(void) { return gsp2p::kVersion; }

gsp2p_ctx* gsp2p_ctx_new(void) { return new (std::nothrow) gsp2p_ctx(); }

void gsp2p_ctx_free(gsp2p_ctx* ctx) { delete ctx; }

const char* gsp2p_last_error(const gsp2p_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : "null context";
}

gsp2p_status gsp2p_load_config(gsp2p_ctx* ctx, const char* path) {
  return guarded(ctx, [&]() {
    if (!path)
      throw gsp2p::Error(gsp2p::ErrorCode::invalid_argument, "null path");
    ctx->config = gsp2p::io::load_config(path);
    ctx->config_loaded = true;
    return GSP2P_OK;
  });
}

gsp2p_status gsp2p_load_config_json(gsp2p_ctx* ctx, const char* json_text,
                                    const char* base_dir) {
  return guarded(ctx, [&]() {
    if (!json_text)
      throw gsp2p::Error(gsp2p::ErrorCode::invalid_argument, "null document");
    gsp2p::io::json doc;
    try {
      doc = gsp2p::io::json::parse(json_text);
    } catch (const std::exception& e) {
      throw gsp2p::Error(gsp2p::ErrorCode::parse, e.what());
    }
    ctx->config = gsp2p::io::parse_config(doc, base_dir ? base_dir : "");
    ctx->config_loaded = true;
    return GSP2P_OK;
  });
}

gsp2p_status gsp2p_use_bundled_fixture(gsp2p_ctx* ctx) {
  return guarded(ctx, [&]() {
    const std::string dir = ctx->options.out_dir_override.empty()
                                ? std::string("out/fixture")
                                : ctx->options.out_dir_override + "/fixture";
    ctx->config = gsp2p::write_fixture_files(dir);
    if (!ctx->options.out_dir_override.empty())
      ctx->config.output_dir = ctx->options.out_dir_override;
    ctx->config_loaded = true;
    return GSP2P_OK;
  });
}

gsp2p_status gsp2p_set_option(gsp2p_ctx* ctx, const char* key,
                              const char* value) {
  return guarded(ctx, [&]() {
    if (!key || !value)
      throw gsp2p::Error(gsp2p::ErrorCode::invalid_argument, "null option");
    const std::string k = key, v = value;
    if (k == "out")
      ctx->options.out_dir_override = v;
    else if (k == "jobs")
      ctx->options.jobs = std::stoi(v);
    else if (k == "seed")
      ctx->options.seed = std::stoull(v);
    else if (k == "stdout")
      ctx->options.to_stdout = v == "1" || v == "true";
    else if (k == "capacity_mw")
      ctx->options.capacity_target_mw = std::stod(v);
    else if (k == "b1")
      ctx->options.b1_weight = std::stod(v);
    else
      throw gsp2p::Error(gsp2p::ErrorCode::invalid_argument,
                         "unknown option " + k);
    return GSP2P_OK;
  });
}

gsp2p_status gsp2p_run(gsp2p_ctx* ctx, const char* command,
                       char** result_json) {
  return guarded(ctx, [&]() {
    if (!command)
      throw gsp2p::Error(gsp2p::ErrorCode::invalid_argument, "null command");
    if (!ctx->config_loaded)
      throw gsp2p::Error(gsp2p::ErrorCode::invalid_argument,
                         "no configuration loaded");
    const gsp2p::ReportBundle bundle =
        gsp2p::run_pipeline(ctx->config, command, ctx->options);
    if (result_json) {
      gsp2p::io::json doc = bundle.result;
      doc["artifacts"] = bundle.artifacts;
      *result_json = dup_string(doc.dump(2));
      if (!*result_json)
        throw gsp2p::Error(gsp2p::ErrorCode::internal, "out of memory");
    }
    return GSP2P_OK;
  });
}

void gsp2p_string_free(char* s) { std::free(s); }

}  // extern "C"
