#include "grasplab.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "core/errors.hpp"
#include "core/pipeline.hpp"

using namespace grasplab;

struct gl_config {
  config::RunConfig cfg;
};

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

gl_status fail(gl_status code, const std::string& message) {
  t_last_error = message;
  return code;
}

// Every entry point funnels through here so exceptions map to one status
// convention: config/usage problems -> GL_ERR_CONFIG, the rest -> GL_ERR_RUNTIME.
template <class F>
gl_status wrap(F&& f) {
  t_last_error.clear();
  try {
    f();
    return GL_OK;
  } catch (const ConfigError& e) {
    return fail(GL_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(GL_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(GL_ERR_RUNTIME, "unknown error");
  }
}

gl_status require(bool ok, const char* what) {
  return ok ? GL_OK : fail(GL_ERR_CONFIG, std::string("null argument: ") + what);
}

void emit(const std::string& text, char** out) {
  *out = dup_string(text);
  if (!*out) throw std::bad_alloc();
}

}  // namespace

extern "C" {

const char* gl_version(void) { return "1.0.0"; }

const char* gl_last_error(void) { return t_last_error.c_str(); }

void gl_string_free(char* s) { std::free(s); }

gl_status gl_config_default(gl_config** out) {
  if (require(out, "out")) return GL_ERR_CONFIG;
  *out = new gl_config{};
  t_last_error.clear();
  return GL_OK;
}

gl_status gl_config_parse(const char* json_text, gl_config** out) {
  if (require(json_text, "json_text") || require(out, "out")) return GL_ERR_CONFIG;
  *out = nullptr;
  return wrap([&] { *out = new gl_config{config::parse_config(json_text)}; });
}

gl_status gl_config_load(const char* path, gl_config** out) {
  if (require(path, "path") || require(out, "out")) return GL_ERR_CONFIG;
  *out = nullptr;
  return wrap([&] { *out = new gl_config{config::load_config(path)}; });
}

void gl_config_free(gl_config* cfg) { delete cfg; }

gl_status gl_config_set_seed(gl_config* cfg, uint64_t seed) {
  if (require(cfg, "cfg")) return GL_ERR_CONFIG;
  cfg->cfg.seed = seed;
  t_last_error.clear();
  return GL_OK;
}

gl_status gl_config_set_out_dir(gl_config* cfg, const char* out_dir) {
  if (require(cfg, "cfg") || require(out_dir, "out_dir")) return GL_ERR_CONFIG;
  return wrap([&] {
    config::RunConfig c = cfg->cfg;
    c.out_dir = out_dir;
    config::validate(c);
    cfg->cfg = c;
  });
}

gl_status gl_config_json(const gl_config* cfg, char** out_json) {
  if (require(cfg, "cfg") || require(out_json, "out_json")) return GL_ERR_CONFIG;
  return wrap([&] { emit(config::config_json(cfg->cfg), out_json); });
}

gl_status gl_dataset_dir(const gl_config* cfg, char** out_path) {
  if (require(cfg, "cfg") || require(out_path, "out_path")) return GL_ERR_CONFIG;
  return wrap([&] { emit(pipeline::dataset_dir(cfg->cfg), out_path); });
}

gl_status gl_checkpoint_dir(const gl_config* cfg, char** out_path) {
  if (require(cfg, "cfg") || require(out_path, "out_path")) return GL_ERR_CONFIG;
  return wrap([&] { emit(pipeline::checkpoint_dir(cfg->cfg), out_path); });
}

gl_status gl_collect(const gl_config* cfg, char** out_summary) {
  if (require(cfg, "cfg") || require(out_summary, "out_summary")) return GL_ERR_CONFIG;
  return wrap([&] { emit(pipeline::cmd_collect(cfg->cfg).text(), out_summary); });
}

gl_status gl_train(const gl_config* cfg, const char* dataset_dir, const char* modality,
                   int split_index, char** out_summary) {
  if (require(cfg, "cfg") || require(dataset_dir, "dataset_dir") ||
      require(modality, "modality") || require(out_summary, "out_summary"))
    return GL_ERR_CONFIG;
  return wrap([&] {
    const learn::Modality m = learn::modality_from_name(modality);
    emit(pipeline::cmd_train(cfg->cfg, dataset_dir, m, split_index).text(), out_summary);
  });
}

gl_status gl_eval(const gl_config* cfg, const char* dataset_dir, const char* checkpoint_dir,
                  char** out_table) {
  if (require(cfg, "cfg") || require(dataset_dir, "dataset_dir") ||
      require(checkpoint_dir, "checkpoint_dir") || require(out_table, "out_table"))
    return GL_ERR_CONFIG;
  return wrap(
      [&] { emit(pipeline::cmd_eval(cfg->cfg, dataset_dir, checkpoint_dir).markdown, out_table); });
}

gl_status gl_grasp(const gl_config* cfg, const char* dataset_dir, const char* checkpoint_dir,
                   char** out_table) {
  if (require(cfg, "cfg") || require(dataset_dir, "dataset_dir") ||
      require(checkpoint_dir, "checkpoint_dir") || require(out_table, "out_table"))
    return GL_ERR_CONFIG;
  return wrap([&] {
    emit(pipeline::cmd_grasp(cfg->cfg, dataset_dir, checkpoint_dir).markdown, out_table);
  });
}

gl_status gl_report(const gl_config* cfg, const char* dataset_dir, char** out_page) {
  if (require(cfg, "cfg") || require(dataset_dir, "dataset_dir") || require(out_page, "out_page"))
    return GL_ERR_CONFIG;
  return wrap([&] { emit(pipeline::cmd_report(cfg->cfg, dataset_dir), out_page); });
}

}  // extern "C"
