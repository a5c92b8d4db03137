/* C API of the gsp2p toolkit: peak-to-peak frequency-support synthesis,
 * headroom curves and frequency-constrained unit commitment.
 *
 * Usage pattern:
 *   gsp2p_ctx* ctx = gsp2p_ctx_new();
 *   gsp2p_load_config(ctx, "study.json");        (or _use_bundled_fixture)
 *   gsp2p_set_option(ctx, "jobs", "4");
 *   char* out = NULL;
 *   if (gsp2p_run(ctx, "schedule", &out) != GSP2P_OK)
 *       fprintf(stderr, "%s\n", gsp2p_last_error(ctx));
 *   ...
 *   gsp2p_string_free(out);
 *   gsp2p_ctx_free(ctx);
 *
 * All strings are UTF-8; result payloads are JSON documents. Every call is
 * synchronous. A context must not be used from two threads at once; distinct
 * contexts are independent.
 */
#ifndef GSP2P_H
#define GSP2P_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gsp2p_ctx gsp2p_ctx;

typedef enum gsp2p_status {
  GSP2P_OK = 0,
  GSP2P_ERR_INVALID_ARG = 1,
  GSP2P_ERR_PARSE = 2,
  GSP2P_ERR_NUMERIC = 3,
  GSP2P_ERR_INFEASIBLE = 4,
  GSP2P_ERR_IO = 5,
  GSP2P_ERR_INTERNAL = 6
} gsp2p_status;

const char* gsp2p_version(void);

gsp2p_ctx* gsp2p_ctx_new(void);
void gsp2p_ctx_free(gsp2p_ctx* ctx);

/* Message of the last failing call on this context; empty string if none.
 * The pointer stays valid until the next call on the same context. */
const char* gsp2p_last_error(const gsp2p_ctx* ctx);

/* Load a study configuration from a JSON file or an in-memory document. */
gsp2p_status gsp2p_load_config(gsp2p_ctx* ctx, const char* path);
gsp2p_status gsp2p_load_config_json(gsp2p_ctx* ctx, const char* json_text,
                                    const char* base_dir);

/* Write the bundled desk-scale fixture under the output directory and load
 * its configuration. */
gsp2p_status gsp2p_use_bundled_fixture(gsp2p_ctx* ctx);

/* Options (as strings): "out" (output directory), "jobs", "seed", "stdout"
 * ("0"/"1"), "capacity_mw" (operating point for point commands), "b1"
 * (effort weight override). */
gsp2p_status gsp2p_set_option(gsp2p_ctx* ctx, const char* key,
                              const char* value);

/* Run one pipeline command: aggregate | synthesize | bounds | headroom-curve
 * | schedule | redispatch | simulate | report. On success *result_json (when
 * non-NULL) receives a malloc'd JSON string the caller releases with
 * gsp2p_string_free. */
gsp2p_status gsp2p_run(gsp2p_ctx* ctx, const char* command,
                       char** result_json);

void gsp2p_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* GSP2P_H */
