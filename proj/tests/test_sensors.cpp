#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "core/errors.hpp"
#include "core/oracle.hpp"
#include "core/rng.hpp"
#include "core/sensors.hpp"
#include "core/world.hpp"
#include "doctest.h"

using namespace grasplab;
using sensors::FrameKind;
using sensors::SensorFrame;
using sensors::SnapTag;

namespace {

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

world::Scene grip_scene(double wx = 60, double wy = 60, double h = 80) {
  world::ObjectModel obj;
  obj.object_id = "slab";
  obj.footprint = {{-wx / 2, -wy / 2}, {wx / 2, -wy / 2}, {wx / 2, wy / 2}, {-wx / 2, wy / 2}};
  obj.height = h;
  obj.material.texture_amplitude = 0.4;
  world::Scene s;
  s.object = obj;
  s.table_extent = {-150, -150, 150, 150};
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("sensors");

TEST_CASE("ppm survives a write-read-write cycle byte for byte") {
  RngStream rng(9);
  SensorFrame f = sensors::make_frame(FrameKind::rgb, 31, 17, SnapTag::Tb);
  for (auto& v : f.data) v = float(rng.uniform());

  const std::string p1 = "/tmp/gl_test_a.ppm", p2 = "/tmp/gl_test_b.ppm";
  sensors::write_ppm(f, p1);
  SensorFrame r = sensors::read_ppm(p1, FrameKind::rgb, SnapTag::Tb);
  CHECK(r.width == 31);
  CHECK(r.height == 17);
  for (size_t i = 0; i < f.data.size(); ++i) {
    float q = std::round(f.data[i] * 255.0f) / 255.0f;
    REQUIRE(r.data[i] == doctest::Approx(q).epsilon(1e-6));
  }
  sensors::write_ppm(r, p2);
  CHECK(read_bytes(p1) == read_bytes(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("pgm stores sixteen-bit depth") {
  SensorFrame f = sensors::make_frame(FrameKind::depth, 8, 6, SnapTag::Ta);
  RngStream rng(10);
  for (auto& v : f.data) v = float(rng.uniform(0.0, 150.0));
  const std::string p1 = "/tmp/gl_test_a.pgm", p2 = "/tmp/gl_test_b.pgm";
  sensors::write_pgm(f, p1);
  SensorFrame r = sensors::read_pgm(p1, SnapTag::Ta);
  for (size_t i = 0; i < f.data.size(); ++i)
    REQUIRE(std::fabs(r.data[i] - f.data[i]) < 1.0 / 256.0);
  sensors::write_pgm(r, p2);
  CHECK(read_bytes(p1) == read_bytes(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("image readers reject malformed files") {
  const std::string path = "/tmp/gl_test_bad.ppm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n4 4\n255\nabc";  // far too short
  }
  CHECK_THROWS_AS(sensors::read_ppm(path, FrameKind::rgb, SnapTag::Ta), FormatError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P3\n4 4\n255\n";
  }
  CHECK_THROWS_AS(sensors::read_ppm(path, FrameKind::rgb, SnapTag::Ta), FormatError);
  CHECK_THROWS_AS(sensors::read_pgm("/tmp/gl_no_such_file.pgm", SnapTag::Ta), IoError);
  std::remove(path.c_str());
}

TEST_CASE("temporal difference midpoint and antisymmetry") {
  sensors::GelConfig gel = sensors::make_gel_config(oracle::Jaw::left, 3);
  SensorFrame a = sensors::unloaded_gel(gel, SnapTag::Ta);
  SensorFrame same = sensors::temporal_difference(a, a);
  for (float v : same.data) REQUIRE(v == 0.5f);

  SensorFrame b = a;
  RngStream rng(12);
  for (auto& v : b.data) v = float(rng.uniform(0.2, 0.8));
  SensorFrame fwd = sensors::temporal_difference(b, a);
  SensorFrame rev = sensors::temporal_difference(a, b);
  for (size_t i = 0; i < fwd.data.size(); ++i)
    REQUIRE(double(fwd.data[i]) + double(rev.data[i]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("temporal difference rejects shape mismatch") {
  SensorFrame a = sensors::make_frame(FrameKind::tactile, 72, 54, SnapTag::Ta);
  SensorFrame b = sensors::make_frame(FrameKind::tactile, 72, 53, SnapTag::Tb);
  CHECK_THROWS_AS(sensors::temporal_difference(b, a), ShapeMismatch);
}

TEST_CASE("a missed closure leaves the gel at its exact resting image") {
  world::Scene scene = grip_scene();
  world::GraspParams g{0, 0, scene.object.height + 10, 0.4, 2.0};  // above the object
  auto contacts = oracle::compute_contacts(scene, g);
  sensors::GelConfig gel = sensors::make_gel_config(oracle::Jaw::left, 5);
  SensorFrame loaded = sensors::render_tactile(scene, g, contacts, oracle::Jaw::left, gel,
                                               SnapTag::Tb);
  SensorFrame rest = sensors::unloaded_gel(gel, SnapTag::Tb);
  REQUIRE(loaded.data == rest.data);
}

TEST_CASE("contact prints through the gel") {
  world::Scene scene = grip_scene();
  world::GraspParams g{0, 0, 10, 0, 3.0};
  auto contacts = oracle::compute_contacts(scene, g);
  REQUIRE(contacts.left.has_value());
  sensors::SensorConfig cfg = sensors::make_sensor_config(7);

  SensorFrame left =
      sensors::render_tactile(scene, g, contacts, oracle::Jaw::left, cfg.gel_left, SnapTag::Tb);
  SensorFrame right = sensors::render_tactile(scene, g, contacts, oracle::Jaw::right,
                                              cfg.gel_right, SnapTag::Tb);
  CHECK(sensors::mean_abs_diff(left, sensors::unloaded_gel(cfg.gel_left, SnapTag::Tb)) > 1e-3);
  CHECK(sensors::mean_abs_diff(right, sensors::unloaded_gel(cfg.gel_right, SnapTag::Tb)) > 1e-3);

  SensorFrame again =
      sensors::render_tactile(scene, g, contacts, oracle::Jaw::left, cfg.gel_left, SnapTag::Tb);
  CHECK(left.data == again.data);  // pure function of its inputs
}

TEST_CASE("texture amplitude shows up in the print") {
  world::Scene smooth = grip_scene();
  smooth.object.material.texture_amplitude = 0.05;
  world::Scene rough = grip_scene();
  rough.object.material.texture_amplitude = 0.8;
  world::GraspParams g{0, 0, 10, 0, 3.0};
  sensors::GelConfig gel = sensors::make_gel_config(oracle::Jaw::right, 2);

  auto print_var = [&](const world::Scene& s) {
    auto contacts = oracle::compute_contacts(s, g);
    SensorFrame f = sensors::render_tactile(s, g, contacts, oracle::Jaw::right, gel, SnapTag::Tb);
    double mean = 0.0;
    for (float v : f.data) mean += v;
    mean /= double(f.data.size());
    double var = 0.0;
    for (float v : f.data) var += (v - mean) * (v - mean);
    return var / double(f.data.size());
  };
  CHECK(print_var(rough) > 4.0 * print_var(smooth));
}

TEST_CASE("camera sees the object and the gripper only at T_b") {
  world::Scene scene = grip_scene(40, 40, 70);
  sensors::SensorConfig cfg = sensors::make_sensor_config(3);
  SensorFrame clear = sensors::render_camera(scene, nullptr, cfg, SnapTag::Ta);
  world::GraspParams g{0, 0, 20, 0.2, 2.0};
  SensorFrame grip = sensors::render_camera(scene, &g, cfg, SnapTag::Tb);
  CHECK(sensors::mean_abs_diff(clear, grip) > 1e-3);

  // A row through the lower half of the object (z ~ 18 mm) shows it.
  bool object_drawn = false;
  for (int col = 0; col < clear.width && !object_drawn; ++col)
    for (int c = 0; c < 3; ++c)
      if (std::fabs(clear.at(60, col, c) - cfg.background[c]) > 0.05) object_drawn = true;
  CHECK(object_drawn);
}

TEST_CASE("depth map reports object height at the centre and zero off it") {
  world::Scene scene = grip_scene(50, 50, 90);
  sensors::SensorConfig cfg = sensors::make_sensor_config(4);
  SensorFrame depth = sensors::render_depth(scene, nullptr, cfg, SnapTag::Ta);
  CHECK(depth.at(36, 36, 0) == doctest::Approx(90.0));
  CHECK(depth.at(0, 0, 0) == doctest::Approx(0.0));

  world::GraspParams g{0, 0, 25, 0.0, 2.0};
  SensorFrame with_grip = sensors::render_depth(scene, &g, cfg, SnapTag::Tb);
  CHECK(sensors::mean_abs_diff(depth, with_grip) > 1e-3);
}

TEST_SUITE_END();
