// Command-line front end; all functionality lives behind the shared C API.
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "gsp2p.h"

namespace {

struct CtxDeleter {
  void operator()(gsp2p_ctx* ctx) const { gsp2p_ctx_free(ctx); }
};

int fail(gsp2p_ctx* ctx, gsp2p_status status) {
  std::fprintf(stderr, "gsp2p: %s\n", gsp2p_last_error(ctx));
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peak-to-peak frequency-support synthesis, IBR headroom curves "
               "and frequency-constrained unit commitment"};
  app.set_version_flag("--version", gsp2p_version());

  std::string config_path;
  bool use_fixture = false;
  std::string out_dir;
  int jobs = 0;
  std::string seed = "1";
  bool to_stdout = false;
  double capacity_mw = -1.0;
  double b1 = -1.0;

  app.add_option("--config", config_path, "Study configuration JSON");
  app.add_flag("--fixture", use_fixture,
               "Use the bundled desk-scale fixture instead of --config");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--jobs", jobs, "Worker threads for the headroom sweep");
  app.add_option("--seed", seed, "Seed for wind-uncertainty sampling");
  app.add_flag("--stdout", to_stdout, "Print the result JSON to stdout");
  app.add_option("--capacity-mw", capacity_mw,
                 "Operating point for point commands: SG capacity committed "
                 "in merit order (default: all SGs)");
  app.add_option("--b1", b1,
                 "Effort weight override for synthesize/bounds/simulate");

  app.require_subcommand(1);
  for (const char* name :
       {"aggregate", "synthesize", "bounds", "headroom-curve", "schedule",
        "redispatch", "simulate", "report"})
    app.add_subcommand(name)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  std::unique_ptr<gsp2p_ctx, CtxDeleter> ctx(gsp2p_ctx_new());
  if (!ctx) {
    std::fprintf(stderr, "gsp2p: cannot allocate context\n");
    return 1;
  }

  gsp2p_status st = GSP2P_OK;
  const auto set = [&](const char* key, const std::string& value) {
    if (st == GSP2P_OK) st = gsp2p_set_option(ctx.get(), key, value.c_str());
  };
  if (!out_dir.empty()) set("out", out_dir);
  if (jobs > 0) set("jobs", std::to_string(jobs));
  set("seed", seed);
  if (capacity_mw >= 0) set("capacity_mw", std::to_string(capacity_mw));
  if (b1 > 0) set("b1", std::to_string(b1));
  if (st != GSP2P_OK) return fail(ctx.get(), st);

  if (use_fixture) {
    st = gsp2p_use_bundled_fixture(ctx.get());
  } else if (!config_path.empty()) {
    st = gsp2p_load_config(ctx.get(), config_path.c_str());
  } else {
    std::fprintf(stderr, "gsp2p: provide --config <path> or --fixture\n");
    return 1;
  }
  if (st != GSP2P_OK) return fail(ctx.get(), st);

  char* result = nullptr;
  st = gsp2p_run(ctx.get(), command.c_str(), &result);
  if (st != GSP2P_OK) return fail(ctx.get(), st);
  if (to_stdout && result) std::printf("%s\n", result);
  gsp2p_string_free(result);
  return 0;
}
