#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace colrec {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Error categories; the CLI maps these onto exit codes.
class InvalidInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pinhole camera: fx, fy, cx, cy in pixels.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void Validate() const;

  /// Intrinsics for the same field of view at half resolution.
  Intrinsics Scaled(double factor) const;
};

/// Rigid transform. Maps points as rotation * x + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void Validate(double tol = 1e-9) const;

  Mat4 Matrix() const;

  static Pose Identity() { return Pose{}; }
  static Pose FromMatrix(const Mat4& m);
};

Pose Compose(const Pose& a, const Pose& b);  // applies b first, then a
Pose Invert(const Pose& p);

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;     // row-major, H*W
  std::vector<uint8_t> validity;  // 1 = valid

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0, bool valid = false)
      : width(w), height(h), values(size_t(w) * h, fill),
        validity(size_t(w) * h, valid ? 1 : 0) {}

  size_t Index(int x, int y) const { return size_t(y) * width + x; }
  double& At(int x, int y) { return values[Index(x, y)]; }
  double At(int x, int y) const { return values[Index(x, y)]; }
  bool IsValid(int x, int y) const { return validity[Index(x, y)] != 0; }
  void Set(int x, int y, double d) {
    values[Index(x, y)] = d;
    validity[Index(x, y)] = 1;
  }
  void Invalidate(int x, int y) { validity[Index(x, y)] = 0; }

  size_t ValidCount() const;
  /// Median over valid pixels. Throws EmptySupportError if none.
  double MedianValid() const;
  /// Valid depths must be positive and finite.
  void Validate() const;
};

struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> vectors;  // unit length; camera-facing convention
  std::vector<uint8_t> validity;

  NormalMap() = default;
  NormalMap(int w, int h)
      : width(w), height(h), vectors(size_t(w) * h, Vec3(0, 0, -1)),
        validity(size_t(w) * h, 1) {}

  size_t Index(int x, int y) const { return size_t(y) * width + x; }
  Vec3& At(int x, int y) { return vectors[Index(x, y)]; }
  const Vec3& At(int x, int y) const { return vectors[Index(x, y)]; }
  bool IsValid(int x, int y) const { return validity[Index(x, y)] != 0; }

  /// Unit-norm check on valid entries.
  void Validate(double tol = 1e-6) const;
};

struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<Vec3> pixels;  // intensities in [0,1]

  ImageRGB() = default;
  ImageRGB(int w, int h, const Vec3& fill = Vec3::Zero())
      : width(w), height(h), pixels(size_t(w) * h, fill) {}

  size_t Index(int x, int y) const { return size_t(y) * width + x; }
  Vec3& At(int x, int y) { return pixels[Index(x, y)]; }
  const Vec3& At(int x, int y) const { return pixels[Index(x, y)]; }

  void Validate() const;
};

/// Luminance used for specular masking (Rec. 601 weights).
inline double Luminance(const Vec3& rgb) {
  return 0.299 * rgb.x() + 0.587 * rgb.y() + 0.114 * rgb.z();
}

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<double> weights;  // in [0,1]

  Mask() = default;
  Mask(int w, int h, double fill = 1.0)
      : width(w), height(h), weights(size_t(w) * h, fill) {}

  size_t Index(int x, int y) const { return size_t(y) * width + x; }
  double& At(int x, int y) { return weights[Index(x, y)]; }
  double At(int x, int y) const { return weights[Index(x, y)]; }

  void Validate() const;
};

}  // namespace colrec
