#pragma once

#include <stdexcept>
#include <string>

namespace grasplab {

enum class ErrorCode {
  invalid_argument,
  config,
  io,
  format,
  placement_impossible,
  no_object_visible,
  inconsistent_contacts,
  degenerate_labels,
  too_few_objects,
  shape_mismatch,
  empty_split,
  state,
};

class GlError : public std::runtime_error {
 public:
  GlError(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct ConfigError : GlError {
  explicit ConfigError(const std::string& msg) : GlError(ErrorCode::config, msg) {}
};
struct IoError : GlError {
  explicit IoError(const std::string& msg) : GlError(ErrorCode::io, msg) {}
};
struct FormatError : GlError {
  explicit FormatError(const std::string& msg) : GlError(ErrorCode::format, msg) {}
};
struct PlacementImpossible : GlError {
  explicit PlacementImpossible(const std::string& msg)
      : GlError(ErrorCode::placement_impossible, msg) {}
};
struct NoObjectVisible : GlError {
  explicit NoObjectVisible(const std::string& msg)
      : GlError(ErrorCode::no_object_visible, msg) {}
};
struct InconsistentContacts : GlError {
  explicit InconsistentContacts(const std::string& msg)
      : GlError(ErrorCode::inconsistent_contacts, msg) {}
};
struct DegenerateLabels : GlError {
  explicit DegenerateLabels(const std::string& msg)
      : GlError(ErrorCode::degenerate_labels, msg) {}
};
struct TooFewObjects : GlError {
  explicit TooFewObjects(const std::string& msg)
      : GlError(ErrorCode::too_few_objects, msg) {}
};
struct ShapeMismatch : GlError {
  explicit ShapeMismatch(const std::string& msg)
      : GlError(ErrorCode::shape_mismatch, msg) {}
};
struct EmptySplit : GlError {
  explicit EmptySplit(const std::string& msg) : GlError(ErrorCode::empty_split, msg) {}
};

}  // namespace grasplab
