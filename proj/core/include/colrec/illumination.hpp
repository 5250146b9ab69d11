#pragma once

#include "colrec/types.hpp"

#include <string>
#include <vector>

namespace colrec {

/// Per-pixel direction to the co-located light source and scalar attenuation
/// combining inverse-square and angular falloff.
struct LightField {
  int width = 0;
  int height = 0;
  std::vector<Vec3> directions;      // unit, surface point -> light
  std::vector<double> attenuation;   // >= 0
  std::vector<uint8_t> validity;
  double mu = 2.0;
  Vec3 origin = Vec3::Zero();        // co-located with the camera
  Vec3 axis = Vec3(0, 0, 1);

  size_t Index(int x, int y) const { return size_t(y) * width + x; }
  bool IsValid(int x, int y) const { return validity[Index(x, y)] != 0; }

  void Validate(double tol = 1e-6) const;
};

/// F = -X/|X| and A = (-F.z)^mu / |X|^2 at the backprojected surface point
/// X of each valid depth pixel.
LightField ComputeLightField(const DepthMap& depth, const Intrinsics& K,
                             double mu);

/// I = clamp(albedo * A * max(0, N.F), 0, 1) replicated across channels.
ImageRGB ShadeLambertian(const NormalMap& normals, const LightField& field,
                         double albedo);
ImageRGB ShadeLambertian(const NormalMap& normals, const LightField& field,
                         const std::vector<double>& albedo_grid);

/// Robust scalar albedo estimate: median of I / (A * max(eps, N.F)) over
/// well-lit pixels.
double EstimateAlbedo(const ImageRGB& image, const NormalMap& normals,
                      const LightField& field);

// Persistence: directions as 3-channel PF, attenuation as scalar Pf.
void WriteLightField(const std::string& directions_path,
                     const std::string& attenuation_path,
                     const LightField& field);

}  // namespace colrec
