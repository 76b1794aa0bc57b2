#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace grasplab::sensors {

enum class FrameKind { rgb, depth, tactile };
enum class SnapTag { Ta, Tb, Tc };

const char* kind_name(FrameKind kind);
const char* tag_name(SnapTag tag);

// Dense row-major image. rgb/tactile values live in [0,1]; depth is in mm.
struct SensorFrame {
  FrameKind kind = FrameKind::rgb;
  int width = 0;
  int height = 0;
  int channels = 0;
  SnapTag tag = SnapTag::Ta;
  std::vector<float> data;

  float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  float at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size() const { return data.size(); }
};

SensorFrame make_frame(FrameKind kind, int width, int height, SnapTag tag, float fill = 0.0f);

// Mean absolute difference over all pixels and channels.
double mean_abs_diff(const SensorFrame& a, const SensorFrame& b);

// Plan view: pixels over a square window of the table plane, row 0 at +y.
struct TopdownView {
  double center_x = 0.0;
  double center_y = 0.0;
  double extent = 240.0;  // mm covered by the full image width
  int px = 72;

  double mm_per_px() const { return extent / px; }
  geom::Vec2 pixel_center(int row, int col) const {
    double s = mm_per_px();
    return {center_x - extent / 2.0 + (col + 0.5) * s,
            center_y + extent / 2.0 - (row + 0.5) * s};
  }
};

// Front view: columns map world x, rows map height above the table.
struct FrontView {
  double center_x = 0.0;
  double x_extent = 240.0;
  double z_min = -20.0;
  double z_max = 220.0;
  int width = 72;
  int height = 72;

  double x_at(int col) const {
    return center_x - x_extent / 2.0 + (col + 0.5) * x_extent / width;
  }
  double z_at(int row) const {
    return z_max - (row + 0.5) * (z_max - z_min) / height;
  }
};

// 8-bit binary PPM (P6) for rgb/tactile frames.
void write_ppm(const SensorFrame& frame, const std::string& path);
SensorFrame read_ppm(const std::string& path, FrameKind kind, SnapTag tag);

// 16-bit binary PGM (P5) for depth frames; stored value = round(mm * 256).
inline constexpr double kDepthScale = 256.0;
void write_pgm(const SensorFrame& frame, const std::string& path);
SensorFrame read_pgm(const std::string& path, SnapTag tag);

}  // namespace grasplab::sensors
