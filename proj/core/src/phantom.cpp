#include "colrec/phantom.hpp"

#include "colrec/illumination.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace colrec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Counter-based generator: reproducible draws keyed by (seed, stream, index)
// without any sequential state (splitmix64 finalizer).
uint64_t HashCounter(uint64_t seed, uint64_t stream, uint64_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) +
               0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in [-1, 1).
double SignedUniform(uint64_t seed, uint64_t stream, uint64_t index) {
  return 2.0 * (double(HashCounter(seed, stream, index) >> 11) * 0x1.0p-53) -
         1.0;
}

}  // namespace

Phantom::Phantom(const PhantomParams& params) : params_(params) {
  if (!(params_.base_radius > 0.0)) {
    throw InvalidInputError("phantom: base radius must be positive");
  }
  if (params_.fold_amplitude < 0.0 || params_.fold_amplitude >= 1.0) {
    throw InvalidInputError("phantom: fold amplitude must be in [0,1)");
  }
  if (!(params_.fold_wavelength > 0.0)) {
    throw InvalidInputError("phantom: fold wavelength must be positive");
  }
  if (!(params_.length > 0.0)) {
    throw InvalidInputError("phantom: length must be positive");
  }
  if (params_.albedo < 0.0) {
    throw InvalidInputError("phantom: albedo must be non-negative");
  }
  if (params_.centerline == CenterlineKind::kCircularArc &&
      !(params_.arc_radius > 2.0 * params_.base_radius)) {
    throw InvalidInputError(
        "phantom: arc radius must exceed twice the base radius");
  }
}

double Phantom::Radius(double u) const {
  return params_.base_radius *
         (1.0 + params_.fold_amplitude *
                    std::cos(kTwoPi * u / params_.fold_wavelength));
}

namespace {

double RadiusDerivative(const PhantomParams& p, double u) {
  return -p.base_radius * p.fold_amplitude * kTwoPi / p.fold_wavelength *
         std::sin(kTwoPi * u / p.fold_wavelength);
}

}  // namespace

double Phantom::Sdf(const Vec3& point) const {
  if (params_.centerline == CenterlineKind::kStraight) {
    const double rho = std::hypot(point.x(), point.y());
    return rho - Radius(point.z());
  }
  // Arc center at (arc_radius, 0, 0); the curve passes through the origin
  // heading +z.
  const double xr = point.x() - params_.arc_radius;
  const double q = std::hypot(xr, point.z());
  const double phi = std::atan2(point.z(), -xr);
  const double u = params_.arc_radius * phi;
  const double rho = std::hypot(q - params_.arc_radius, point.y());
  return rho - Radius(u);
}

Vec3 Phantom::SdfGradient(const Vec3& point) const {
  if (params_.centerline == CenterlineKind::kStraight) {
    const double rho = std::hypot(point.x(), point.y());
    if (rho < 1e-12) return Vec3(0, 0, -RadiusDerivative(params_, point.z()));
    return Vec3(point.x() / rho, point.y() / rho,
                -RadiusDerivative(params_, point.z()));
  }
  const double xr = point.x() - params_.arc_radius;
  const double q = std::hypot(xr, point.z());
  const double phi = std::atan2(point.z(), -xr);
  const double u = params_.arc_radius * phi;
  const double w = q - params_.arc_radius;
  const double rho = std::hypot(w, point.y());
  if (rho < 1e-12 || q < 1e-12) return Vec3(0, 0, 1);
  // d(rho)/dX and du/dX of the toroidal coordinates around the arc.
  const Vec3 drho((w / rho) * (xr / q), point.y() / rho,
                  (w / rho) * (point.z() / q));
  const Vec3 du(params_.arc_radius * point.z() / (q * q), 0.0,
                -params_.arc_radius * xr / (q * q));
  return drho - RadiusDerivative(params_, u) * du;
}

Vec3 Phantom::CenterlinePoint(double u) const {
  if (params_.centerline == CenterlineKind::kStraight) return Vec3(0, 0, u);
  const double phi = u / params_.arc_radius;
  return Vec3(params_.arc_radius * (1.0 - std::cos(phi)), 0.0,
              params_.arc_radius * std::sin(phi));
}

Vec3 Phantom::CenterlineTangent(double u) const {
  if (params_.centerline == CenterlineKind::kStraight) return Vec3(0, 0, 1);
  const double phi = u / params_.arc_radius;
  return Vec3(std::sin(phi), 0.0, std::cos(phi));
}

Vec3 Phantom::SurfacePoint(double u, double theta) const {
  const double r = Radius(u);
  if (params_.centerline == CenterlineKind::kStraight) {
    return Vec3(r * std::cos(theta), r * std::sin(theta), u);
  }
  const double phi = u / params_.arc_radius;
  // In-plane radial basis (toward the arc center) and the binormal.
  const Vec3 n1(-std::cos(phi), 0.0, std::sin(phi));
  const Vec3 n2(0, 1, 0);
  return CenterlinePoint(u) - r * (std::cos(theta) * n1) + r * std::sin(theta) * n2;
}

Vec3 Phantom::SurfaceNormal(double u, double theta) const {
  const Vec3 grad = SdfGradient(SurfacePoint(u, theta));
  return -grad.normalized();  // into the lumen
}

double Phantom::LipschitzBound() const {
  const double slope = params_.base_radius * params_.fold_amplitude * kTwoPi /
                       params_.fold_wavelength;
  double bound = std::sqrt(1.0 + slope * slope);
  if (params_.centerline == CenterlineKind::kCircularArc) {
    // Arc-length compression away from the arc center stretches du/dX.
    const double max_offset =
        params_.base_radius * (1.0 + params_.fold_amplitude);
    bound *= params_.arc_radius / (params_.arc_radius - max_offset);
  }
  return bound;
}

std::string Phantom::ToJson() const {
  nlohmann::json j;
  j["centerline"] = params_.centerline == CenterlineKind::kStraight
                        ? "straight"
                        : "circular_arc";
  j["arc_radius"] = params_.arc_radius;
  j["base_radius"] = params_.base_radius;
  j["fold_amplitude"] = params_.fold_amplitude;
  j["fold_wavelength"] = params_.fold_wavelength;
  j["length"] = params_.length;
  j["albedo"] = params_.albedo;
  return j.dump(2);
}

Phantom Phantom::FromJson(const std::string& json_text) {
  PhantomParams p;
  try {
    const auto j = nlohmann::json::parse(json_text);
    const std::string kind = j.value("centerline", "straight");
    if (kind == "straight") {
      p.centerline = CenterlineKind::kStraight;
    } else if (kind == "circular_arc") {
      p.centerline = CenterlineKind::kCircularArc;
    } else {
      throw IoError("phantom json: unknown centerline kind: " + kind);
    }
    p.arc_radius = j.value("arc_radius", 0.0);
    p.base_radius = j.at("base_radius").get<double>();
    p.fold_amplitude = j.value("fold_amplitude", 0.0);
    p.fold_wavelength = j.value("fold_wavelength", 1.0);
    p.length = j.value("length", 10.0);
    p.albedo = j.value("albedo", 0.8);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("phantom json: ") + e.what());
  }
  return Phantom(p);
}

namespace {

// Right-handed camera basis with view direction as +z.
Mat3 LookRotation(const Vec3& view, const Vec3& up_hint) {
  const Vec3 z = view.normalized();
  Vec3 x = up_hint.cross(z);
  if (x.norm() < 1e-6) {
    x = Vec3(1, 0, 0).cross(z);
    if (x.norm() < 1e-6) x = Vec3(0, 1, 0).cross(z);
  }
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 rotation;
  rotation.col(0) = x;
  rotation.col(1) = y;
  rotation.col(2) = z;
  return rotation;
}

}  // namespace

Trajectory MakeTrajectory(const Phantom& phantom, ViewType view,
                          int frame_count, uint64_t seed) {
  if (frame_count < 1) {
    throw InvalidInputError("trajectory: frame count must be >= 1");
  }
  const PhantomParams& p = phantom.params();
  Trajectory trajectory;
  trajectory.view = view;
  const double margin = 1.5 * p.base_radius;
  const double u_lo = std::min(margin, 0.45 * p.length);
  const double u_hi = std::max(p.length - margin, 0.55 * p.length);
  for (int f = 0; f < frame_count; ++f) {
    const double t = frame_count > 1 ? double(f) / (frame_count - 1) : 0.5;
    const double u = u_lo + t * (u_hi - u_lo);
    const Vec3 center = phantom.CenterlinePoint(u);
    const Vec3 tangent = phantom.CenterlineTangent(u);
    TrajectoryEntry entry;
    entry.frame_id = "frame_" + std::string(5 - std::min<size_t>(5,
                         std::to_string(f).size()), '0') + std::to_string(f);
    if (view == ViewType::kDownTheBarrel) {
      // Small lateral offset and axis wobble, smooth in the frame index.
      const double wobble = 0.03;
      const Vec3 offset(
          wobble * p.base_radius * SignedUniform(seed, 0, uint64_t(f)),
          wobble * p.base_radius * SignedUniform(seed, 1, uint64_t(f)), 0.0);
      Vec3 axis = tangent + 0.05 * Vec3(SignedUniform(seed, 2, uint64_t(f)),
                                        SignedUniform(seed, 3, uint64_t(f)),
                                        0.0);
      entry.pose.rotation = LookRotation(axis, Vec3(0, -1, 0));
      entry.pose.translation = center + offset;
    } else {
      const double theta =
          0.15 * SignedUniform(seed, 4, uint64_t(f));  // near theta = 0 wall
      const Vec3 wall = phantom.SurfacePoint(u, theta);
      const Vec3 inward = phantom.SurfaceNormal(u, theta);
      const double clearance = 0.3 * p.base_radius;
      entry.pose.translation = wall + clearance * inward;
      // Optical axis along the inward wall normal with a small tilt: the
      // camera faces the opposite wall head-on across the lumen, which keeps
      // the co-located light from saturating the whole frame.
      Vec3 axis = inward + 0.08 * Vec3(SignedUniform(seed, 5, uint64_t(f)),
                                        SignedUniform(seed, 6, uint64_t(f)),
                                        SignedUniform(seed, 7, uint64_t(f)));
      entry.pose.rotation = LookRotation(axis, tangent);
    }
    trajectory.entries.push_back(std::move(entry));
  }
  return trajectory;
}

RenderedFrame RenderFrame(const Phantom& phantom, const Pose& world_from_camera,
                          const Intrinsics& intrinsics, double mu) {
  intrinsics.Validate();
  if (!(phantom.Sdf(world_from_camera.translation) < 0.0)) {
    throw InvalidInputError("render: camera is not inside the phantom");
  }
  const double r0 = phantom.params().base_radius;
  const double hit_tolerance = 1e-5 * r0;
  const double relaxation = 0.9;
  const int max_steps = 256;
  const double max_distance =
      10.0 * std::max(phantom.params().length, 20.0 * r0);
  const double lipschitz = phantom.LipschitzBound();

  RenderedFrame frame;
  frame.depth = DepthMap(intrinsics.width, intrinsics.height);
  frame.normals = NormalMap(intrinsics.width, intrinsics.height);
  std::fill(frame.normals.validity.begin(), frame.normals.validity.end(), 0);

  const Mat3& rotation = world_from_camera.rotation;
  const Vec3& origin = world_from_camera.translation;
  for (int y = 0; y < intrinsics.height; ++y) {
    for (int x = 0; x < intrinsics.width; ++x) {
      const Vec3 ray_camera((x - intrinsics.cx) / intrinsics.fx,
                            (y - intrinsics.cy) / intrinsics.fy, 1.0);
      const double ray_scale = ray_camera.norm();
      const Vec3 direction = (rotation * ray_camera) / ray_scale;

      double distance = 0.0;
      bool hit = false;
      for (int step = 0; step < max_steps; ++step) {
        const Vec3 point = origin + distance * direction;
        const double sdf = phantom.Sdf(point);
        if (std::abs(sdf) < hit_tolerance) {
          hit = true;
          break;
        }
        distance += relaxation * std::abs(sdf) / lipschitz;
        if (distance > max_distance) break;
      }
      if (!hit) continue;

      // Newton polish along the ray: sphere tracing alone leaves a residual
      // of up to hit_tolerance / sin(grazing angle) in the hit distance.
      for (int iter = 0; iter < 3; ++iter) {
        const Vec3 p = origin + distance * direction;
        const double slope = phantom.SdfGradient(p).dot(direction);
        if (std::abs(slope) < 1e-6) break;
        distance -= phantom.Sdf(p) / slope;
      }

      const Vec3 point = origin + distance * direction;
      // Depth is the camera-frame z of the hit, not the ray length.
      const double depth = distance / ray_scale;
      frame.depth.Set(x, y, depth);
      Vec3 normal_world = -phantom.SdfGradient(point).normalized();
      Vec3 normal_camera = rotation.transpose() * normal_world;
      if (normal_camera.dot(ray_camera) > 0.0) normal_camera = -normal_camera;
      frame.normals.At(x, y) = normal_camera;
      frame.normals.validity[frame.normals.Index(x, y)] = 1;
    }
  }

  const LightField field = ComputeLightField(frame.depth, intrinsics, mu);
  frame.image = ShadeLambertian(frame.normals, field, phantom.params().albedo);
  return frame;
}

void InjectSpecularSpots(ImageRGB& image,
                         const std::vector<SpecularSpot>& spots) {
  for (const SpecularSpot& spot : spots) {
    const int x_lo = std::max(0, int(std::floor(spot.center.x() - spot.radius)));
    const int x_hi =
        std::min(image.width - 1, int(std::ceil(spot.center.x() + spot.radius)));
    const int y_lo = std::max(0, int(std::floor(spot.center.y() - spot.radius)));
    const int y_hi = std::min(image.height - 1,
                              int(std::ceil(spot.center.y() + spot.radius)));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        if ((Vec2(x, y) - spot.center).norm() <= spot.radius) {
          image.At(x, y) = Vec3::Ones();
        }
      }
    }
  }
}

}  // namespace colrec
