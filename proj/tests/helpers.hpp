#pragma once

#include "colrec/types.hpp"

#include <Eigen/Geometry>

#include <random>

namespace colrec::testing {

inline Intrinsics SmallCamera(int size = 8) {
  Intrinsics K;
  K.fx = K.fy = 0.75 * size;
  K.cx = K.cy = 0.5 * size - 0.5;
  K.width = K.height = size;
  return K;
}

inline Mat3 RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Pose RandomPose(std::mt19937_64& rng, double translation_scale = 1.0) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Pose pose;
  pose.rotation = RandomRotation(rng);
  pose.translation =
      translation_scale * Vec3(uni(rng), uni(rng), uni(rng));
  return pose;
}

/// Depth map of the plane z = a + b*x_cam + c*y_cam seen through K
/// (x_cam, y_cam are the camera-frame coordinates of the surface point).
inline DepthMap PlaneDepth(const Intrinsics& K, double a, double b, double c) {
  DepthMap depth(K.width, K.height);
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const double u = (x - K.cx) / K.fx;
      const double v = (y - K.cy) / K.fy;
      // z = a + b*(u*z) + c*(v*z)  =>  z = a / (1 - b*u - c*v)
      const double denom = 1.0 - b * u - c * v;
      if (denom > 1e-6) depth.Set(x, y, a / denom);
    }
  }
  return depth;
}

/// Unit camera-facing normal of the plane z = a + b*x + c*y.
inline Vec3 PlaneNormal(double b, double c) {
  Vec3 n(b, c, -1.0);
  return n.normalized();
}

/// Depth of a sphere cap: sphere centered at (0, 0, center_z), radius r,
/// near surface toward the camera. Pixels missing the sphere stay invalid.
inline DepthMap SphereCapDepth(const Intrinsics& K, double center_z,
                               double radius) {
  DepthMap depth(K.width, K.height);
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const double u = (x - K.cx) / K.fx;
      const double v = (y - K.cy) / K.fy;
      // Ray p(t) = t*(u, v, 1); |p - C|^2 = r^2.
      const double aa = u * u + v * v + 1.0;
      const double bb = -2.0 * center_z;
      const double cc = center_z * center_z - radius * radius;
      const double disc = bb * bb - 4.0 * aa * cc;
      if (disc <= 0.0) continue;
      const double t = (-bb - std::sqrt(disc)) / (2.0 * aa);
      if (t > 0.0) depth.Set(x, y, t);
    }
  }
  return depth;
}

inline double MeanAngularErrorDeg(const NormalMap& a, const NormalMap& b,
                                  int border = 0) {
  double sum = 0.0;
  size_t count = 0;
  for (int y = border; y < a.height - border; ++y) {
    for (int x = border; x < a.width - border; ++x) {
      if (!a.IsValid(x, y) || !b.IsValid(x, y)) continue;
      const double dot =
          std::clamp(a.At(x, y).dot(b.At(x, y)), -1.0, 1.0);
      sum += std::acos(dot) * 180.0 / M_PI;
      ++count;
    }
  }
  return count ? sum / double(count) : 0.0;
}

}  // namespace colrec::testing
