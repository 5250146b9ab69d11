#pragma once

#include "colrec/types.hpp"

#include <optional>

namespace colrec {

/// Camera-frame 3D point of a pixel at the given depth (z = depth).
Vec3 Backproject(const Intrinsics& K, const Vec2& pixel, double depth);

/// Perspective projection of a camera-frame point; z must be positive.
Vec2 Project(const Intrinsics& K, const Vec3& point);

struct WarpResult {
  Vec2 pixel_s = Vec2::Zero();
  double projected_depth = 0.0;
  bool in_bounds = false;
};

/// Warps a target pixel into the source view via the target depth map and
/// the target-to-source transform. Invalid depth or a projection behind
/// the camera or outside the image yields in_bounds = false.
WarpResult ProjectWarp(const Intrinsics& K, const Pose& pose_t_to_s,
                       const DepthMap& depth_t, const Vec2& pixel_t);

/// Same warp for a pixel whose depth is supplied directly.
WarpResult WarpPoint(const Intrinsics& K, const Pose& pose_t_to_s,
                     const Vec2& pixel_t, double depth);

template <typename T>
struct Sample {
  T value{};
  bool valid = false;
};

/// Bilinear sample; invalid outside [0,W-1]x[0,H-1] or when any of the
/// contributing pixels is invalid.
Sample<double> SampleBilinear(const DepthMap& field, const Vec2& coord);
/// Interpolated vector is renormalized.
Sample<Vec3> SampleBilinear(const NormalMap& field, const Vec2& coord);
Sample<Vec3> SampleBilinear(const ImageRGB& field, const Vec2& coord);

/// Full-image warp of a source image into the target view.
/// Pixels whose projection leaves the source image are reported in the
/// validity mask.
ImageRGB WarpImage(const ImageRGB& image_s, const DepthMap& depth_t,
                   const Pose& pose_t_to_s, const Intrinsics& K,
                   Mask* validity = nullptr);

// Serialization (formats shared with the secondary tooling).
std::string IntrinsicsToJson(const Intrinsics& K);
Intrinsics IntrinsicsFromJson(const std::string& json_text);

struct TrajectoryEntry {
  std::string frame_id;
  Pose pose;  // world-from-camera
};

/// One pose per line: "frame_id tx ty tz qx qy qz qw" (unit quaternion, w last).
void WriteTrajectory(const std::string& path,
                     const std::vector<TrajectoryEntry>& entries);
std::vector<TrajectoryEntry> ReadTrajectory(const std::string& path);

}  // namespace colrec
