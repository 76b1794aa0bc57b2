/* C interface to the grasp-outcome study pipeline. All entry points return a
 * gl_status; on failure gl_last_error() holds a message for the calling
 * thread. Strings handed out through char** are heap-allocated and must be
 * released with gl_string_free(). */
#ifndef GRASPLAB_H
#define GRASPLAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gl_status {
  GL_OK = 0,
  GL_ERR_CONFIG = 2,  /* bad config, bad arguments, unknown names */
  GL_ERR_RUNTIME = 3  /* I/O failures, malformed data, internal errors */
} gl_status;

/* Opaque run configuration. */
typedef struct gl_config gl_config;

const char* gl_version(void);

/* Message from the most recent failing call on this thread; never NULL. */
const char* gl_last_error(void);

void gl_string_free(char* s);

gl_status gl_config_default(gl_config** out);
gl_status gl_config_parse(const char* json_text, gl_config** out);
gl_status gl_config_load(const char* path, gl_config** out);
void gl_config_free(gl_config* cfg);

gl_status gl_config_set_seed(gl_config* cfg, uint64_t seed);
gl_status gl_config_set_out_dir(gl_config* cfg, const char* out_dir);
gl_status gl_config_json(const gl_config* cfg, char** out_json);

/* Canonical locations under the config's output directory. */
gl_status gl_dataset_dir(const gl_config* cfg, char** out_path);
gl_status gl_checkpoint_dir(const gl_config* cfg, char** out_path);

/* Run data collection; *out_summary receives a human-readable digest. */
gl_status gl_collect(const gl_config* cfg, char** out_summary);

/* Train one modality ("fusion", "vision", "vision_pose", "depth",
 * "tactile_both", "tactile_left", "tactile_right") on one of the three
 * object-disjoint splits (0, 1, 2). */
gl_status gl_train(const gl_config* cfg, const char* dataset_dir, const char* modality,
                   int split_index, char** out_summary);

/* Score every modality plus the baselines across the three splits; *out_table
 * receives the markdown table. CSV and markdown are also written under the
 * config's reports directory. */
gl_status gl_eval(const gl_config* cfg, const char* dataset_dir, const char* checkpoint_dir,
                  char** out_table);

/* Run the grasping benchmark on fresh objects; *out_table as in gl_eval. */
gl_status gl_grasp(const gl_config* cfg, const char* dataset_dir, const char* checkpoint_dir,
                   char** out_table);

/* Assemble the one-page report; *out_page receives the markdown. */
gl_status gl_report(const gl_config* cfg, const char* dataset_dir, char** out_page);

#ifdef __cplusplus
}
#endif

#endif /* GRASPLAB_H */
