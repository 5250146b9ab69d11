#pragma once

#include "colrec/geometry.hpp"
#include "colrec/types.hpp"

#include <functional>
#include <vector>

namespace colrec {

struct LossWeights {
  double lambda1 = 0.1;    // normal consistency
  double lambda2 = 0.05;   // depth consistency
  double lambda3 = 0.05;   // orthogonality
  double lambda4 = 1e-3;   // smoothness

  void Validate() const;
};

struct LossReport {
  double photo = 0.0;
  double norm = 0.0;
  double depth = 0.0;
  double orth = 0.0;
  double smooth = 0.0;
  double total = 0.0;
  size_t pixel_count = 0;

  std::string ToJson() const;
};

/// Scalar loss with its per-pixel map. The scalar is the mask-weighted mean
/// over the support (pixels where the term is defined and mask > 0).
struct LossResult {
  double value = 0.0;
  int width = 0;
  int height = 0;
  std::vector<double> per_pixel;
  std::vector<uint8_t> support;

  size_t SupportCount() const;
};

/// Normal agreement between views: warp each target pixel into the source,
/// sample the source normal there and compare (L1) with the rotated target
/// normal.
LossResult LossNormalConsistency(const NormalMap& normals_s,
                                 const NormalMap& normals_t,
                                 const DepthMap& depth_t,
                                 const Pose& pose_t_to_s, const Intrinsics& K,
                                 const Mask& mask);

/// Tangent/normal orthogonality from diagonal neighbor differences. Two
/// diagonal pairs per interior pixel; per-pixel value is the mean |N.V|.
LossResult LossOrthogonality(const NormalMap& normals, const DepthMap& depth,
                             const Intrinsics& K);

/// Symmetric relative depth difference |Ds<ps> - d| / (Ds<ps> + d).
LossResult LossDepthConsistency(const DepthMap& depth_s,
                                const DepthMap& depth_t,
                                const Pose& pose_t_to_s, const Intrinsics& K,
                                const Mask& mask);

/// Per-pixel minimum over warped sources of 0.85*(1-SSIM)/2 + 0.15*L1.
LossResult LossPhotometric(const ImageRGB& image_t,
                           const std::vector<ImageRGB>& warped_sources,
                           const Mask& mask);

/// Edge-aware first-order smoothness on mean-normalized depth.
double LossSmoothness(const DepthMap& depth, const ImageRGB& image);

/// Photometric error map of a single candidate image against the target
/// (shared by LossPhotometric and the auto-mask).
std::vector<double> PhotometricErrorMap(const ImageRGB& image_t,
                                        const ImageRGB& candidate);

struct MaskOptions {
  double specular_threshold = 0.98;
  bool auto_mask = true;
};

/// Intersection of auto-mask (warped beats identity), projection validity
/// and the specular exclusion.
Mask ComputeMasks(const ImageRGB& image_t,
                  const std::vector<ImageRGB>& images_s,
                  const std::vector<ImageRGB>& warped_sources,
                  const Mask& projection_validity,
                  const MaskOptions& options = {});

struct PairInputs {
  const ImageRGB* image_s = nullptr;
  const DepthMap* depth_s = nullptr;
  const NormalMap* normals_s = nullptr;
  Pose pose_t_to_s;
};

struct InitLossInputs {
  const ImageRGB* image_t = nullptr;
  const DepthMap* depth_t = nullptr;
  const NormalMap* normals_t = nullptr;
  std::vector<PairInputs> sources;
  Intrinsics intrinsics;
  MaskOptions mask_options;
};

/// Full initialization loss: masked photometric + normal + depth terms plus
/// unmasked orthogonality and smoothness, weighted.
LossReport LossInitTotal(const InitLossInputs& inputs,
                         const LossWeights& weights, Mask* mask_out = nullptr);

/// Central finite differences of a scalar loss w.r.t. each valid depth pixel.
std::vector<double> NumericGradient(
    const std::function<double(const DepthMap&)>& loss_fn,
    const DepthMap& depth, double step);

// Analytic depth gradients of the three geometric losses (validated against
// NumericGradient).
std::vector<double> GradLossOrthogonality(const NormalMap& normals,
                                          const DepthMap& depth,
                                          const Intrinsics& K);
std::vector<double> GradLossDepthConsistency(const DepthMap& depth_s,
                                             const DepthMap& depth_t,
                                             const Pose& pose_t_to_s,
                                             const Intrinsics& K,
                                             const Mask& mask);
std::vector<double> GradLossNormalConsistency(const NormalMap& normals_s,
                                              const NormalMap& normals_t,
                                              const DepthMap& depth_t,
                                              const Pose& pose_t_to_s,
                                              const Intrinsics& K,
                                              const Mask& mask);

}  // namespace colrec
