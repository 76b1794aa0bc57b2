#include "core/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

#include "core/errors.hpp"

namespace grasplab::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + " " + what);
}

void check_keys(const json& j, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) bad(prefix.empty() ? it.key() : prefix + "." + it.key(), "is not a known field");
  }
}

void take_int(const json& j, const std::string& path, const char* key, int& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) bad(path, "must be an integer");
  out = v.get<int>();
}

void take_u64(const json& j, const std::string& path, const char* key, uint64_t& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !v.is_number_integer()) bad(path, "must be an integer");
  if (v.is_number_integer() && !v.is_number_unsigned() && v.get<int64_t>() < 0)
    bad(path, "must be non-negative");
  out = v.get<uint64_t>();
}

void take_num(const json& j, const std::string& path, const char* key, double& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) bad(path, "must be a number");
  out = v.get<double>();
}

void take_bool(const json& j, const std::string& path, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) bad(path, "must be a boolean");
  out = v.get<bool>();
}

void take_str(const json& j, const std::string& path, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_string()) bad(path, "must be a string");
  out = v.get<std::string>();
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.out_dir.empty()) bad("out_dir", "must not be empty");
  if (c.object_count < 2 || c.object_count > 100000)
    bad("collect.object_count", "must be between 2 and 100000");
  if (c.trial_count < 1 || c.trial_count > 10000000)
    bad("collect.trial_count", "must be between 1 and 10000000");
  if (!(c.force_lo > 0.0)) bad("collect.force_range[0]", "must be > 0");
  if (!(c.force_hi >= c.force_lo)) bad("collect.force_range[1]", "must be >= the lower bound");
  if (c.force_hi > 40.0) bad("collect.force_range[1]", "must be <= 40");
  if (c.camera_px < 16 || c.camera_px > 256) bad("images.camera_px", "must be between 16 and 256");
  if (c.gel_width < 16 || c.gel_width > 256) bad("images.gel[0]", "must be between 16 and 256");
  if (c.gel_height < 14 || c.gel_height > 256) bad("images.gel[1]", "must be between 14 and 256");
  if (c.epochs < 1 || c.epochs > 1000) bad("train.epochs", "must be between 1 and 1000");
  if (!(c.lr > 0.0)) bad("train.lr", "must be > 0");
  if (!(c.lr_late > 0.0)) bad("train.lr_late", "must be > 0");
  if (c.batch < 1 || c.batch > 4096) bad("train.batch", "must be between 1 and 4096");
  if (c.split_seeds[0] == c.split_seeds[1] || c.split_seeds[0] == c.split_seeds[2] ||
      c.split_seeds[1] == c.split_seeds[2])
    bad("eval.split_seeds", "must be three distinct seeds");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
    bad("eval.test_fraction", "must lie strictly between 0 and 1");
  if (!(c.threshold > 0.0 && c.threshold < 1.0))
    bad("select.threshold", "must lie strictly between 0 and 1");
  if (c.max_attempts < 1 || c.max_attempts > 100000)
    bad("select.max_attempts", "must be between 1 and 100000");
  if (c.bench_objects < 1 || c.bench_objects > 1000)
    bad("select.bench_objects", "must be between 1 and 1000");
  if (c.bench_trials < 0 || c.bench_trials > 100000)
    bad("select.bench_trials", "must be between 0 and 100000");
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  check_keys(j, "", {"seed", "out_dir", "collect", "images", "train", "eval", "select"});

  RunConfig c;
  take_u64(j, "seed", "seed", c.seed);
  take_str(j, "out_dir", "out_dir", c.out_dir);

  if (j.contains("collect")) {
    const json& s = j.at("collect");
    if (!s.is_object()) bad("collect", "must be an object");
    check_keys(s, "collect", {"object_count", "trial_count", "force_range", "noise"});
    take_int(s, "collect.object_count", "object_count", c.object_count);
    take_int(s, "collect.trial_count", "trial_count", c.trial_count);
    take_bool(s, "collect.noise", "noise", c.noise);
    if (s.contains("force_range")) {
      const json& f = s.at("force_range");
      if (!f.is_array() || f.size() != 2 || !f[0].is_number() || !f[1].is_number())
        bad("collect.force_range", "must be a [low, high] pair of numbers");
      c.force_lo = f[0].get<double>();
      c.force_hi = f[1].get<double>();
    }
  }
  if (j.contains("images")) {
    const json& s = j.at("images");
    if (!s.is_object()) bad("images", "must be an object");
    check_keys(s, "images", {"camera_px", "gel"});
    take_int(s, "images.camera_px", "camera_px", c.camera_px);
    if (s.contains("gel")) {
      const json& g = s.at("gel");
      if (!g.is_array() || g.size() != 2 || !g[0].is_number_integer() ||
          !g[1].is_number_integer())
        bad("images.gel", "must be a [width, height] pair of integers");
      c.gel_width = g[0].get<int>();
      c.gel_height = g[1].get<int>();
    }
  }
  if (j.contains("train")) {
    const json& s = j.at("train");
    if (!s.is_object()) bad("train", "must be an object");
    check_keys(s, "train", {"epochs", "lr", "lr_late", "batch"});
    take_int(s, "train.epochs", "epochs", c.epochs);
    take_num(s, "train.lr", "lr", c.lr);
    take_num(s, "train.lr_late", "lr_late", c.lr_late);
    take_int(s, "train.batch", "batch", c.batch);
  }
  if (j.contains("eval")) {
    const json& s = j.at("eval");
    if (!s.is_object()) bad("eval", "must be an object");
    check_keys(s, "eval", {"split_seeds", "test_fraction"});
    if (s.contains("split_seeds")) {
      const json& v = s.at("split_seeds");
      if (!v.is_array() || v.size() != 3) bad("eval.split_seeds", "must be a list of 3 seeds");
      for (size_t i = 0; i < 3; ++i) {
        if (!v[i].is_number_integer() && !v[i].is_number_unsigned())
          bad("eval.split_seeds[" + std::to_string(i) + "]", "must be an integer");
        c.split_seeds[i] = v[i].get<uint64_t>();
      }
    }
    take_num(s, "eval.test_fraction", "test_fraction", c.test_fraction);
  }
  if (j.contains("select")) {
    const json& s = j.at("select");
    if (!s.is_object()) bad("select", "must be an object");
    check_keys(s, "select", {"threshold", "max_attempts", "bench_objects", "bench_trials"});
    take_num(s, "select.threshold", "threshold", c.threshold);
    take_int(s, "select.max_attempts", "max_attempts", c.max_attempts);
    take_int(s, "select.bench_objects", "bench_objects", c.bench_objects);
    take_int(s, "select.bench_trials", "bench_trials", c.bench_trials);
  }

  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["collect"] = {{"object_count", c.object_count},
                  {"trial_count", c.trial_count},
                  {"force_range", {c.force_lo, c.force_hi}},
                  {"noise", c.noise}};
  j["images"] = {{"camera_px", c.camera_px}, {"gel", {c.gel_width, c.gel_height}}};
  j["train"] = {{"epochs", c.epochs}, {"lr", c.lr}, {"lr_late", c.lr_late}, {"batch", c.batch}};
  j["eval"] = {{"split_seeds", c.split_seeds}, {"test_fraction", c.test_fraction}};
  j["select"] = {{"threshold", c.threshold},
                 {"max_attempts", c.max_attempts},
                 {"bench_objects", c.bench_objects},
                 {"bench_trials", c.bench_trials}};
  return j.dump(2) + "\n";
}

}  // namespace grasplab::config
