#pragma once

#include "colrec/types.hpp"

namespace colrec {

/// Normals from the cross product of the two diagonal backprojected
/// difference vectors, camera-facing, unit length. Border pixels replicate
/// the nearest interior value.
NormalMap NormalsFromDepth(const DepthMap& depth, const Intrinsics& K);

struct IntegrationResult {
  DepthMap depth;
  double residual = 0.0;  // RMS of the log-depth gradient equations
};

/// Least-squares integration of the perspective log-depth gradient field
/// implied by the normals, rescaled so the median depth equals anchor_depth.
IntegrationResult IntegrateNormals(const NormalMap& normals,
                                   const Intrinsics& K, double anchor_depth);

}  // namespace colrec
