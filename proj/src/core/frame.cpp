#include "core/frame.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace grasplab::sensors {

const char* kind_name(FrameKind kind) {
  switch (kind) {
    case FrameKind::rgb: return "rgb";
    case FrameKind::depth: return "depth";
    case FrameKind::tactile: return "tactile";
  }
  return "?";
}

const char* tag_name(SnapTag tag) {
  switch (tag) {
    case SnapTag::Ta: return "a";
    case SnapTag::Tb: return "b";
    case SnapTag::Tc: return "c";
  }
  return "?";
}

SensorFrame make_frame(FrameKind kind, int width, int height, SnapTag tag, float fill) {
  SensorFrame f;
  f.kind = kind;
  f.width = width;
  f.height = height;
  f.channels = kind == FrameKind::depth ? 1 : 3;
  f.tag = tag;
  f.data.assign(static_cast<size_t>(width) * height * f.channels, fill);
  return f;
}

double mean_abs_diff(const SensorFrame& a, const SensorFrame& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw ShapeMismatch("mean_abs_diff: frame shapes differ");
  }
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) acc += std::fabs(double(a.data[i]) - double(b.data[i]));
  return a.data.empty() ? 0.0 : acc / double(a.data.size());
}

namespace {

uint8_t quantize8(float v) {
  float x = v <= 0.0f ? 0.0f : (v >= 1.0f ? 1.0f : v);
  return static_cast<uint8_t>(std::lround(x * 255.0f));
}

uint16_t quantize16(float mm) {
  double x = double(mm) * kDepthScale;
  if (x < 0.0) x = 0.0;
  if (x > 65535.0) x = 65535.0;
  return static_cast<uint16_t>(std::lround(x));
}

// Reads one whitespace-delimited ASCII token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

int parse_dim(const std::string& tok, const std::string& path, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(path + ": bad " + what + " field '" + tok + "'");
  }
}

}  // namespace

void write_ppm(const SensorFrame& frame, const std::string& path) {
  if (frame.channels != 3) throw ShapeMismatch("write_ppm: frame must have 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_ppm: cannot open " + path);
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(frame.width) * 3);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x)
      for (int c = 0; c < 3; ++c) row[static_cast<size_t>(x) * 3 + c] = quantize8(frame.at(y, x, c));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write_ppm: short write to " + path);
}

SensorFrame read_ppm(const std::string& path, FrameKind kind, SnapTag tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_ppm: cannot open " + path);
  if (next_token(in) != "P6") throw FormatError(path + ": not a binary PPM (P6)");
  int w = parse_dim(next_token(in), path, "width");
  int h = parse_dim(next_token(in), path, "height");
  if (next_token(in) != "255") throw FormatError(path + ": expected maxval 255");
  SensorFrame f = make_frame(kind, w, h, tag);
  std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw FormatError(path + ": truncated pixel data");
  for (size_t i = 0; i < raw.size(); ++i) f.data[i] = float(raw[i]) / 255.0f;
  return f;
}

void write_pgm(const SensorFrame& frame, const std::string& path) {
  if (frame.channels != 1) throw ShapeMismatch("write_pgm: frame must have 1 channel");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_pgm: cannot open " + path);
  out << "P5\n" << frame.width << " " << frame.height << "\n65535\n";
  std::vector<uint8_t> row(static_cast<size_t>(frame.width) * 2);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      uint16_t v = quantize16(frame.at(y, x, 0));
      row[static_cast<size_t>(x) * 2] = static_cast<uint8_t>(v >> 8);  // MSB first per P5
      row[static_cast<size_t>(x) * 2 + 1] = static_cast<uint8_t>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write_pgm: short write to " + path);
}

SensorFrame read_pgm(const std::string& path, SnapTag tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_pgm: cannot open " + path);
  if (next_token(in) != "P5") throw FormatError(path + ": not a binary PGM (P5)");
  int w = parse_dim(next_token(in), path, "width");
  int h = parse_dim(next_token(in), path, "height");
  if (next_token(in) != "65535") throw FormatError(path + ": expected maxval 65535");
  SensorFrame f = make_frame(FrameKind::depth, w, h, tag);
  std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw FormatError(path + ": truncated pixel data");
  for (size_t i = 0; i < f.data.size(); ++i) {
    uint16_t v = static_cast<uint16_t>((raw[i * 2] << 8) | raw[i * 2 + 1]);
    f.data[i] = float(double(v) / kDepthScale);
  }
  return f;
}

}  // namespace grasplab::sensors
