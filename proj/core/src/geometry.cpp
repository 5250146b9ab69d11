#include "colrec/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace colrec {

void Intrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidInputError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("intrinsics: image size must be positive");
  }
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw InvalidInputError("intrinsics: principal point outside image");
  }
}

Intrinsics Intrinsics::Scaled(double factor) const {
  Intrinsics out = *this;
  out.fx = fx * factor;
  out.fy = fy * factor;
  // Pixel-center convention: pixel (0,0) maps to pixel (0,0) at any scale.
  out.cx = (cx + 0.5) * factor - 0.5;
  out.cy = (cy + 0.5) * factor - 0.5;
  out.width = std::max(1, int(std::lround(width * factor)));
  out.height = std::max(1, int(std::lround(height * factor)));
  if (out.cx < 0.0) out.cx = 0.0;
  if (out.cy < 0.0) out.cy = 0.0;
  return out;
}

void Pose::Validate(double tol) const {
  const Mat3 gram = rotation.transpose() * rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) {
    throw InvalidInputError("pose: rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > tol) {
    throw InvalidInputError("pose: rotation determinant is not +1");
  }
  if (!translation.allFinite()) {
    throw InvalidInputError("pose: non-finite translation");
  }
}

Mat4 Pose::Matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::FromMatrix(const Mat4& m) {
  Pose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Pose Compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose Invert(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.transpose();
  out.translation = -(out.rotation * p.translation);
  return out;
}

size_t DepthMap::ValidCount() const {
  size_t n = 0;
  for (uint8_t v : validity) n += (v != 0);
  return n;
}

double DepthMap::MedianValid() const {
  std::vector<double> vals;
  vals.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (validity[i]) vals.push_back(values[i]);
  }
  if (vals.empty()) throw EmptySupportError("depth map has no valid pixels");
  const size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
  double m = vals[mid];
  if (vals.size() % 2 == 0) {
    std::nth_element(vals.begin(), vals.begin() + mid - 1,
                     vals.begin() + mid);
    m = 0.5 * (m + vals[mid - 1]);
  }
  return m;
}

void DepthMap::Validate() const {
  for (size_t i = 0; i < values.size(); ++i) {
    if (validity[i] && (!(values[i] > 0.0) || !std::isfinite(values[i]))) {
      throw InvalidInputError("depth map: valid depth must be positive finite");
    }
  }
}

void NormalMap::Validate(double tol) const {
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (!validity[i]) continue;
    if (std::abs(vectors[i].norm() - 1.0) > tol) {
      throw InvalidInputError("normal map: vector is not unit length");
    }
  }
}

void ImageRGB::Validate() const {
  for (const Vec3& p : pixels) {
    if (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0 || !p.allFinite()) {
      throw InvalidInputError("image: intensity outside [0,1]");
    }
  }
}

void Mask::Validate() const {
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw InvalidInputError("mask: weight outside [0,1]");
    }
  }
}

Vec3 Backproject(const Intrinsics& K, const Vec2& pixel, double depth) {
  if (!(depth > 0.0)) {
    throw InvalidInputError("backproject: depth must be positive");
  }
  return Vec3(depth * (pixel.x() - K.cx) / K.fx,
              depth * (pixel.y() - K.cy) / K.fy, depth);
}

Vec2 Project(const Intrinsics& K, const Vec3& point) {
  if (!(point.z() > 0.0)) {
    throw InvalidInputError("project: point is behind the camera");
  }
  return Vec2(K.fx * point.x() / point.z() + K.cx,
              K.fy * point.y() / point.z() + K.cy);
}

WarpResult WarpPoint(const Intrinsics& K, const Pose& pose_t_to_s,
                     const Vec2& pixel_t, double depth) {
  WarpResult out;
  if (!(depth > 0.0)) return out;
  const Vec3 x_t = Backproject(K, pixel_t, depth);
  const Vec3 x_s = pose_t_to_s.rotation * x_t + pose_t_to_s.translation;
  out.projected_depth = x_s.z();
  if (!(x_s.z() > 0.0)) return out;
  out.pixel_s = Project(K, x_s);
  out.in_bounds = out.pixel_s.x() >= 0.0 && out.pixel_s.x() <= K.width - 1 &&
                  out.pixel_s.y() >= 0.0 && out.pixel_s.y() <= K.height - 1;
  return out;
}

WarpResult ProjectWarp(const Intrinsics& K, const Pose& pose_t_to_s,
                       const DepthMap& depth_t, const Vec2& pixel_t) {
  const int x = int(std::lround(pixel_t.x()));
  const int y = int(std::lround(pixel_t.y()));
  if (x < 0 || x >= depth_t.width || y < 0 || y >= depth_t.height ||
      !depth_t.IsValid(x, y)) {
    return WarpResult{};
  }
  return WarpPoint(K, pose_t_to_s, pixel_t, depth_t.At(x, y));
}

namespace {

struct BilinearWeights {
  int x0, y0, x1, y1;
  double w00, w10, w01, w11;
  bool inside;
};

BilinearWeights ComputeWeights(int width, int height, const Vec2& coord) {
  BilinearWeights bw{};
  bw.inside = coord.x() >= 0.0 && coord.x() <= width - 1 && coord.y() >= 0.0 &&
              coord.y() <= height - 1;
  if (!bw.inside) return bw;
  bw.x0 = int(std::floor(coord.x()));
  bw.y0 = int(std::floor(coord.y()));
  bw.x1 = std::min(bw.x0 + 1, width - 1);
  bw.y1 = std::min(bw.y0 + 1, height - 1);
  const double fx = coord.x() - bw.x0;
  const double fy = coord.y() - bw.y0;
  bw.w00 = (1 - fx) * (1 - fy);
  bw.w10 = fx * (1 - fy);
  bw.w01 = (1 - fx) * fy;
  bw.w11 = fx * fy;
  return bw;
}

}  // namespace

Sample<double> SampleBilinear(const DepthMap& field, const Vec2& coord) {
  const BilinearWeights bw = ComputeWeights(field.width, field.height, coord);
  if (!bw.inside) return {};
  if (!field.IsValid(bw.x0, bw.y0) || !field.IsValid(bw.x1, bw.y0) ||
      !field.IsValid(bw.x0, bw.y1) || !field.IsValid(bw.x1, bw.y1)) {
    return {};
  }
  const double v = bw.w00 * field.At(bw.x0, bw.y0) +
                   bw.w10 * field.At(bw.x1, bw.y0) +
                   bw.w01 * field.At(bw.x0, bw.y1) +
                   bw.w11 * field.At(bw.x1, bw.y1);
  return {v, true};
}

Sample<Vec3> SampleBilinear(const NormalMap& field, const Vec2& coord) {
  const BilinearWeights bw = ComputeWeights(field.width, field.height, coord);
  if (!bw.inside) return {};
  if (!field.IsValid(bw.x0, bw.y0) || !field.IsValid(bw.x1, bw.y0) ||
      !field.IsValid(bw.x0, bw.y1) || !field.IsValid(bw.x1, bw.y1)) {
    return {};
  }
  Vec3 v = bw.w00 * field.At(bw.x0, bw.y0) + bw.w10 * field.At(bw.x1, bw.y0) +
           bw.w01 * field.At(bw.x0, bw.y1) + bw.w11 * field.At(bw.x1, bw.y1);
  const double n = v.norm();
  if (n < 1e-12) return {};
  return {v / n, true};
}

Sample<Vec3> SampleBilinear(const ImageRGB& field, const Vec2& coord) {
  const BilinearWeights bw = ComputeWeights(field.width, field.height, coord);
  if (!bw.inside) return {};
  Vec3 v = bw.w00 * field.At(bw.x0, bw.y0) + bw.w10 * field.At(bw.x1, bw.y0) +
           bw.w01 * field.At(bw.x0, bw.y1) + bw.w11 * field.At(bw.x1, bw.y1);
  return {v, true};
}

ImageRGB WarpImage(const ImageRGB& image_s, const DepthMap& depth_t,
                   const Pose& pose_t_to_s, const Intrinsics& K,
                   Mask* validity) {
  ImageRGB out(depth_t.width, depth_t.height);
  if (validity) *validity = Mask(depth_t.width, depth_t.height, 0.0);
  for (int y = 0; y < depth_t.height; ++y) {
    for (int x = 0; x < depth_t.width; ++x) {
      const WarpResult w = ProjectWarp(K, pose_t_to_s, depth_t, Vec2(x, y));
      if (!w.in_bounds) continue;
      const Sample<Vec3> s = SampleBilinear(image_s, w.pixel_s);
      if (!s.valid) continue;
      out.At(x, y) = s.value;
      if (validity) validity->At(x, y) = 1.0;
    }
  }
  return out;
}

std::string IntrinsicsToJson(const Intrinsics& K) {
  nlohmann::json j{{"fx", K.fx}, {"fy", K.fy},       {"cx", K.cx},
                   {"cy", K.cy}, {"width", K.width}, {"height", K.height}};
  return j.dump(2);
}

Intrinsics IntrinsicsFromJson(const std::string& json_text) {
  Intrinsics K;
  try {
    const auto j = nlohmann::json::parse(json_text);
    K.fx = j.at("fx").get<double>();
    K.fy = j.at("fy").get<double>();
    K.cx = j.at("cx").get<double>();
    K.cy = j.at("cy").get<double>();
    K.width = j.at("width").get<int>();
    K.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("intrinsics json: ") + e.what());
  }
  K.Validate();
  return K;
}

void WriteTrajectory(const std::string& path,
                     const std::vector<TrajectoryEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trajectory file for writing: " + path);
  out.precision(17);
  for (const TrajectoryEntry& e : entries) {
    const Eigen::Quaterniond q(e.pose.rotation);
    const Vec3& t = e.pose.translation;
    out << e.frame_id << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' '
        << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
  }
}

std::vector<TrajectoryEntry> ReadTrajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file: " + path);
  std::vector<TrajectoryEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    TrajectoryEntry e;
    double tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> e.frame_id >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw IoError("malformed trajectory line: " + line);
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      throw IoError("trajectory quaternion is not unit length: " + line);
    }
    e.pose.rotation = q.normalized().toRotationMatrix();
    e.pose.translation = Vec3(tx, ty, tz);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace colrec
