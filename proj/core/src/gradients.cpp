#include "colrec/losses.hpp"

#include <algorithm>
#include <cmath>

namespace colrec {

namespace {

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Vec3 PixelRay(const Intrinsics& K, int x, int y) {
  return Vec3((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
}

// Derivative of the warped source pixel and projected depth w.r.t. the
// target depth at p: Y = d*a + t with a = R*K^-1*p.
struct WarpJacobian {
  Vec2 dps_dd;
  double dz_dd;
};

WarpJacobian WarpDerivative(const Intrinsics& K, const Pose& pose, int x,
                            int y, double depth) {
  const Vec3 a = pose.rotation * PixelRay(K, x, y);
  const Vec3 Y = depth * a + pose.translation;
  WarpJacobian j;
  const double z2 = Y.z() * Y.z();
  j.dps_dd = Vec2(K.fx * (a.x() * Y.z() - Y.x() * a.z()) / z2,
                  K.fy * (a.y() * Y.z() - Y.y() * a.z()) / z2);
  j.dz_dd = a.z();
  return j;
}

struct BilinearCell {
  int x0, y0, x1, y1;
  double fx, fy;
};

BilinearCell Cell(int width, int height, const Vec2& coord) {
  BilinearCell c;
  c.x0 = int(std::floor(coord.x()));
  c.y0 = int(std::floor(coord.y()));
  c.x1 = std::min(c.x0 + 1, width - 1);
  c.y1 = std::min(c.y0 + 1, height - 1);
  c.fx = coord.x() - c.x0;
  c.fy = coord.y() - c.y0;
  return c;
}

// Gradient of the bilinearly sampled scalar w.r.t. the sampling coordinate.
Vec2 BilinearGradient(const DepthMap& field, const Vec2& coord) {
  const BilinearCell c = Cell(field.width, field.height, coord);
  const double s00 = field.At(c.x0, c.y0), s10 = field.At(c.x1, c.y0);
  const double s01 = field.At(c.x0, c.y1), s11 = field.At(c.x1, c.y1);
  return Vec2((1 - c.fy) * (s10 - s00) + c.fy * (s11 - s01),
              (1 - c.fx) * (s01 - s00) + c.fx * (s11 - s10));
}

// du/dps for each channel of a bilinearly sampled vector field, plus the
// unnormalized sample itself.
void BilinearVector(const NormalMap& field, const Vec2& coord, Vec3* value,
                    Eigen::Matrix<double, 3, 2>* jacobian) {
  const BilinearCell c = Cell(field.width, field.height, coord);
  const Vec3& s00 = field.At(c.x0, c.y0);
  const Vec3& s10 = field.At(c.x1, c.y0);
  const Vec3& s01 = field.At(c.x0, c.y1);
  const Vec3& s11 = field.At(c.x1, c.y1);
  *value = (1 - c.fy) * ((1 - c.fx) * s00 + c.fx * s10) +
           c.fy * ((1 - c.fx) * s01 + c.fx * s11);
  jacobian->col(0) = (1 - c.fy) * (s10 - s00) + c.fy * (s11 - s01);
  jacobian->col(1) = (1 - c.fx) * (s01 - s00) + c.fx * (s11 - s10);
}

}  // namespace

std::vector<double> GradLossOrthogonality(const NormalMap& normals,
                                          const DepthMap& depth,
                                          const Intrinsics& K) {
  // Mirrors LossOrthogonality: mean over interior support of the per-pair
  // average |N.V|; derivative scatters to the two pair endpoints.
  const LossResult base = LossOrthogonality(normals, depth, K);
  const size_t n = base.SupportCount();
  std::vector<double> grad(depth.values.size(), 0.0);
  static const int pair_dx[2][2] = {{-1, 1}, {1, -1}};
  static const int pair_dy[2][2] = {{-1, 1}, {-1, 1}};
  const double scale = 1.0 / (2.0 * double(n));
  for (int y = 1; y < depth.height - 1; ++y) {
    for (int x = 1; x < depth.width - 1; ++x) {
      if (!base.support[depth.Index(x, y)]) continue;
      const Vec3& normal = normals.At(x, y);
      for (int pair = 0; pair < 2; ++pair) {
        const int xa = x + pair_dx[pair][0], ya = y + pair_dy[pair][0];
        const int xb = x + pair_dx[pair][1], yb = y + pair_dy[pair][1];
        const Vec3 wa = PixelRay(K, xa, ya);
        const Vec3 wb = PixelRay(K, xb, yb);
        const double dot =
            normal.dot(depth.At(xa, ya) * wa - depth.At(xb, yb) * wb);
        const double s = Sign(dot) * scale;
        grad[depth.Index(xa, ya)] += s * normal.dot(wa);
        grad[depth.Index(xb, yb)] -= s * normal.dot(wb);
      }
    }
  }
  return grad;
}

std::vector<double> GradLossDepthConsistency(const DepthMap& depth_s,
                                             const DepthMap& depth_t,
                                             const Pose& pose_t_to_s,
                                             const Intrinsics& K,
                                             const Mask& mask) {
  std::vector<double> grad(depth_t.values.size(), 0.0);
  double weight_sum = 0.0;
  std::vector<double> local(depth_t.values.size(), 0.0);
  for (int y = 0; y < depth_t.height; ++y) {
    for (int x = 0; x < depth_t.width; ++x) {
      const size_t i = depth_t.Index(x, y);
      const WarpResult w = ProjectWarp(K, pose_t_to_s, depth_t, Vec2(x, y));
      if (!w.in_bounds) continue;
      const Sample<double> ds = SampleBilinear(depth_s, w.pixel_s);
      if (!ds.valid) continue;
      weight_sum += mask.weights[i];
      if (mask.weights[i] <= 0.0) continue;

      const double S = ds.value, z = w.projected_depth;
      const double denom = S + z;
      const double diff = S - z;
      const double dv_dS = Sign(diff) / denom - std::abs(diff) / (denom * denom);
      const double dv_dz =
          -Sign(diff) / denom - std::abs(diff) / (denom * denom);
      const WarpJacobian jac =
          WarpDerivative(K, pose_t_to_s, x, y, depth_t.At(x, y));
      const Vec2 dS_dps = BilinearGradient(depth_s, w.pixel_s);
      local[i] =
          mask.weights[i] * (dv_dS * dS_dps.dot(jac.dps_dd) + dv_dz * jac.dz_dd);
    }
  }
  if (weight_sum <= 0.0) {
    throw EmptySupportError("depth consistency gradient: empty support");
  }
  for (size_t i = 0; i < grad.size(); ++i) grad[i] = local[i] / weight_sum;
  return grad;
}

std::vector<double> GradLossNormalConsistency(const NormalMap& normals_s,
                                              const NormalMap& normals_t,
                                              const DepthMap& depth_t,
                                              const Pose& pose_t_to_s,
                                              const Intrinsics& K,
                                              const Mask& mask) {
  std::vector<double> grad(depth_t.values.size(), 0.0);
  double weight_sum = 0.0;
  std::vector<double> local(depth_t.values.size(), 0.0);
  for (int y = 0; y < depth_t.height; ++y) {
    for (int x = 0; x < depth_t.width; ++x) {
      const size_t i = depth_t.Index(x, y);
      if (!normals_t.IsValid(x, y)) continue;
      const WarpResult w = ProjectWarp(K, pose_t_to_s, depth_t, Vec2(x, y));
      if (!w.in_bounds) continue;
      const Sample<Vec3> ns = SampleBilinear(normals_s, w.pixel_s);
      if (!ns.valid) continue;
      weight_sum += mask.weights[i];
      if (mask.weights[i] <= 0.0) continue;

      Vec3 u;
      Eigen::Matrix<double, 3, 2> du_dps;
      BilinearVector(normals_s, w.pixel_s, &u, &du_dps);
      const double len = u.norm();
      const Vec3 n = u / len;
      const Eigen::Matrix3d dn_du =
          (Eigen::Matrix3d::Identity() - n * n.transpose()) / len;
      const Vec3 rotated = pose_t_to_s.rotation * normals_t.At(x, y);
      const Vec3 sign((n - rotated).unaryExpr([](double v) { return Sign(v); }));
      const WarpJacobian jac =
          WarpDerivative(K, pose_t_to_s, x, y, depth_t.At(x, y));
      const Vec2 dv_dps = (sign.transpose() * dn_du * du_dps).transpose();
      local[i] = mask.weights[i] * dv_dps.dot(jac.dps_dd);
    }
  }
  if (weight_sum <= 0.0) {
    throw EmptySupportError("normal consistency gradient: empty support");
  }
  for (size_t i = 0; i < grad.size(); ++i) grad[i] = local[i] / weight_sum;
  return grad;
}

}  // namespace colrec
