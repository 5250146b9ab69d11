#pragma once

#include "colrec/image_io.hpp"
#include "colrec/phantom.hpp"
#include "colrec/types.hpp"

#include <string>
#include <vector>

namespace colrec {

struct TsdfConfig {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.0;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  double truncation = 0.0;  // scene units, > voxel_size

  void Validate() const;

  /// Grid covering the given bounds; voxel size defaults to 1/128 of the
  /// bounding-box diagonal and truncation to 3 voxels.
  static TsdfConfig ForBounds(const Vec3& lower, const Vec3& upper,
                              double voxel_size = 0.0,
                              double truncation = 0.0);
};

struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.0;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<float> tsdf;     // normalized to [-1, 1]
  std::vector<float> weights;  // 0 = unobserved

  size_t Index(int x, int y, int z) const {
    return (size_t(z) * dims.y() + y) * dims.x() + x;
  }
  Vec3 VoxelCenter(int x, int y, int z) const {
    return origin + voxel_size * Vec3(x + 0.5, y + 0.5, z + 0.5);
  }
};

struct PosedDepth {
  DepthMap depth;
  Pose world_from_camera;
};

/// Projective TSDF integration with weighted running averages, truncated to
/// the band around each observed surface.
VoxelGrid FuseTsdf(const std::vector<PosedDepth>& frames,
                   const Intrinsics& intrinsics, const TsdfConfig& config);

/// Zero-level-set triangulation restricted to fully observed cells;
/// unobserved regions stay open. Returns an empty mesh when no surface
/// crossing is observed.
TriangleMesh ExtractMesh(const VoxelGrid& grid);

struct HoleComponent {
  double area_fraction = 0.0;
  double bbox_u_lo = 0.0, bbox_u_hi = 0.0;
  double bbox_theta_lo = 0.0, bbox_theta_hi = 0.0;
  size_t cell_count = 0;
};

struct CoverageMap {
  int cells_u = 0;
  int cells_theta = 0;
  std::vector<uint8_t> observed;  // row-major, theta fastest
  std::vector<HoleComponent> holes;

  double CoverageFraction() const;
  std::string HolesToJson() const;
  /// Observed cells white, holes black.
  ImageRGB ToImage() const;
};

struct CoverageConfig {
  int cells_u = 64;
  int cells_theta = 64;
  double depth_tolerance = 0.02;        // fraction of the cell depth
  double incidence_margin_deg = 5.0;    // above grazing
};

/// Marks each (u, theta) wall cell observed when it projects into at least
/// one frame with agreeing depth and non-grazing incidence; unobserved cells
/// are grouped into connected hole components (theta wraps).
CoverageMap ComputeCoverage(const std::vector<PosedDepth>& frames,
                            const Intrinsics& intrinsics,
                            const Phantom& phantom,
                            const CoverageConfig& config = {});

}  // namespace colrec
