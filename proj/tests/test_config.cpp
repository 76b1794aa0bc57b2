#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "core/config.hpp"
#include "core/errors.hpp"

using namespace grasplab;

namespace {

template <class F>
std::string config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::string& msg, const std::string& needle) {
  return msg.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("defaults survive a serialize/parse round trip") {
  config::RunConfig def;
  config::RunConfig back = config::parse_config(config::config_json(def));
  CHECK(back.seed == def.seed);
  CHECK(back.out_dir == def.out_dir);
  CHECK(back.object_count == def.object_count);
  CHECK(back.trial_count == def.trial_count);
  CHECK(back.force_lo == def.force_lo);
  CHECK(back.force_hi == def.force_hi);
  CHECK(back.noise == def.noise);
  CHECK(back.camera_px == def.camera_px);
  CHECK(back.gel_width == def.gel_width);
  CHECK(back.gel_height == def.gel_height);
  CHECK(back.epochs == def.epochs);
  CHECK(back.lr == def.lr);
  CHECK(back.lr_late == def.lr_late);
  CHECK(back.batch == def.batch);
  CHECK(back.split_seeds == def.split_seeds);
  CHECK(back.test_fraction == def.test_fraction);
  CHECK(back.threshold == def.threshold);
  CHECK(back.max_attempts == def.max_attempts);
  CHECK(back.bench_objects == def.bench_objects);
  CHECK(back.bench_trials == def.bench_trials);
}

TEST_CASE("missing keys keep defaults, given keys override") {
  config::RunConfig c = config::parse_config(R"({
    "seed": 7,
    "collect": {"trial_count": 10, "force_range": [1.0, 2.0]},
    "images": {"gel": [48, 36]},
    "select": {"threshold": 0.5}
  })");
  CHECK(c.seed == 7);
  CHECK(c.trial_count == 10);
  CHECK(c.force_lo == 1.0);
  CHECK(c.force_hi == 2.0);
  CHECK(c.gel_width == 48);
  CHECK(c.gel_height == 36);
  CHECK(c.threshold == 0.5);
  CHECK(c.object_count == 40);   // untouched
  CHECK(c.camera_px == 72);      // untouched
  CHECK(c.epochs == 20);         // untouched
  config::RunConfig empty = config::parse_config("{}");
  CHECK(empty.seed == 1);
  CHECK(empty.trial_count == 2000);
}

TEST_CASE("unknown and mistyped fields are rejected by path") {
  CHECK(mentions(config_error([] { config::parse_config(R"({"sed": 1})"); }),
                 "sed is not a known field"));
  CHECK(mentions(config_error([] { config::parse_config(R"({"train": {"epoch": 5}})"); }),
                 "train.epoch"));
  CHECK(mentions(
      config_error([] { config::parse_config(R"({"collect": {"trial_count": "many"}})"); }),
      "collect.trial_count"));
  CHECK(mentions(config_error([] { config::parse_config(R"({"collect": {"force_range": [1]}})"); }),
                 "collect.force_range"));
  CHECK(mentions(config_error([] { config::parse_config(R"({"images": {"gel": [48, 36.5]}})"); }),
                 "images.gel"));
  CHECK(mentions(config_error([] { config::parse_config(R"({"seed": -3})"); }), "seed"));
  CHECK(mentions(config_error([] { config::parse_config("[1,2]"); }), "top level"));
  CHECK(mentions(config_error([] { config::parse_config("{nope"); }), "invalid JSON"));
}

TEST_CASE("invariant violations name the offending field") {
  auto with = [](const std::string& body) {
    return config_error([&] { config::parse_config(body); });
  };
  CHECK(mentions(with(R"({"select": {"threshold": 1.5}})"), "select.threshold"));
  CHECK(mentions(with(R"({"select": {"max_attempts": 0}})"), "select.max_attempts"));
  CHECK(mentions(with(R"({"collect": {"force_range": [0.0, 5.0]}})"), "collect.force_range[0]"));
  CHECK(mentions(with(R"({"collect": {"force_range": [2.0, 1.0]}})"), "collect.force_range[1]"));
  CHECK(mentions(with(R"({"collect": {"object_count": 1}})"), "collect.object_count"));
  CHECK(mentions(with(R"({"eval": {"split_seeds": [1, 1, 2]}})"), "eval.split_seeds"));
  CHECK(mentions(with(R"({"eval": {"test_fraction": 1.0}})"), "eval.test_fraction"));
  CHECK(mentions(with(R"({"images": {"camera_px": 8}})"), "images.camera_px"));
  CHECK(mentions(with(R"({"train": {"batch": 0}})"), "train.batch"));
  CHECK(mentions(with(R"({"out_dir": ""})"), "out_dir"));
}

TEST_CASE("load_config reads a file and reports a missing one") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "grasplab_cfg_test.json";
  {
    std::ofstream out(path);
    out << R"({"seed": 42, "out_dir": "elsewhere"})";
  }
  config::RunConfig c = config::load_config(path.string());
  CHECK(c.seed == 42);
  CHECK(c.out_dir == "elsewhere");
  fs::remove(path);
  CHECK_THROWS_AS(config::load_config(path.string()), IoError);
}
