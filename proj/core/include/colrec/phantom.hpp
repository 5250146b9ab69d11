#pragma once

#include "colrec/geometry.hpp"
#include "colrec/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace colrec {

enum class CenterlineKind { kStraight, kCircularArc };

struct PhantomParams {
  CenterlineKind centerline = CenterlineKind::kStraight;
  double arc_radius = 0.0;      // required for kCircularArc
  double base_radius = 1.0;     // R0
  double fold_amplitude = 0.0;  // in [0,1)
  double fold_wavelength = 1.0; // scene units along the centerline
  double length = 10.0;         // axial extent of the parametric domain
  double albedo = 0.8;
};

/// Synthetic colon: a tube around a straight or circular-arc centerline with
/// periodic radial folds, carrying an implicit function and its analytic
/// gradient plus the (u, theta) surface parameterization.
class Phantom {
 public:
  explicit Phantom(const PhantomParams& params);

  const PhantomParams& params() const { return params_; }

  /// Tube radius at axial position u.
  double Radius(double u) const;

  /// Implicit function: negative inside the lumen, zero on the wall.
  double Sdf(const Vec3& point) const;
  /// Analytic gradient of the implicit function (points out of the lumen).
  Vec3 SdfGradient(const Vec3& point) const;

  Vec3 CenterlinePoint(double u) const;
  Vec3 CenterlineTangent(double u) const;
  /// Wall point at axial position u and angle theta.
  Vec3 SurfacePoint(double u, double theta) const;
  /// Unit wall normal pointing into the lumen (toward the centerline).
  Vec3 SurfaceNormal(double u, double theta) const;

  /// Bound on the gradient norm of the implicit function, used to derate
  /// sphere-tracing steps.
  double LipschitzBound() const;

  std::string ToJson() const;
  static Phantom FromJson(const std::string& json_text);

 private:
  PhantomParams params_;
};

enum class ViewType { kDownTheBarrel, kEnFace };

struct Trajectory {
  std::vector<TrajectoryEntry> entries;  // world-from-camera poses
  ViewType view = ViewType::kDownTheBarrel;
};

/// Camera path inside the phantom: along the centerline (down-the-barrel) or
/// offset toward the wall looking at it (en face), with small seeded smooth
/// perturbations.
Trajectory MakeTrajectory(const Phantom& phantom, ViewType view,
                          int frame_count, uint64_t seed);

struct RenderedFrame {
  ImageRGB image;
  DepthMap depth;       // camera-frame z of the hit point
  NormalMap normals;    // camera frame, camera-facing
};

/// Sphere-traced render with analytic normals and Lambertian shading under
/// the co-located point light.
RenderedFrame RenderFrame(const Phantom& phantom, const Pose& world_from_camera,
                          const Intrinsics& intrinsics, double mu);

struct SpecularSpot {
  Vec2 center;   // pixel coordinates
  double radius; // pixels
};

/// Saturates circular spots to exercise the specular mask.
void InjectSpecularSpots(ImageRGB& image, const std::vector<SpecularSpot>& spots);

}  // namespace colrec
