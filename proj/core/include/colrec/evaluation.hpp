#pragma once

#include "colrec/image_io.hpp"
#include "colrec/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace colrec {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double log_rmse = 0.0;
  double scale_applied = 1.0;

  std::string ToJson() const;
};

/// Median-rescaled depth error metrics over the masked support.
DepthMetrics ComputeDepthMetrics(const DepthMap& pred, const DepthMap& gt,
                                 const Mask& mask);

struct AlignmentResult {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  double residual = 0.0;

  Vec3 Apply(const Vec3& p) const {
    return scale * (rotation * p) + translation;
  }
  std::string ToJson() const;
};

/// Least-squares similarity transform mapping points_a onto points_b
/// (SVD of the cross-covariance; reflections resolved to proper rotations).
AlignmentResult ProcrustesAlign(const std::vector<Vec3>& points_a,
                                const std::vector<Vec3>& points_b);

enum class ChamferDirection { kOneWay, kSymmetric };

/// Mean nearest-neighbor distance from cloud_from into cloud_to (one-way),
/// or the mean of the two one-way values (symmetric).
double ChamferDistance(const std::vector<Vec3>& cloud_from,
                       const std::vector<Vec3>& cloud_to,
                       ChamferDirection direction = ChamferDirection::kOneWay);

/// Brute-force all-pairs variant, kept as the oracle for the k-d tree path.
double ChamferDistanceBruteForce(
    const std::vector<Vec3>& cloud_from, const std::vector<Vec3>& cloud_to,
    ChamferDirection direction = ChamferDirection::kOneWay);

/// Golden-section search over [0.25, 4] x aligned.scale minimizing the
/// one-way Chamfer distance from cloud_gt to the rescaled reconstruction.
double OptimizeScaleChamfer(const std::vector<Vec3>& cloud_gt,
                            const std::vector<Vec3>& cloud_recon,
                            const AlignmentResult& aligned);

/// Area-weighted uniform surface samples with a seeded generator, used to
/// turn meshes into point clouds for Chamfer comparison.
std::vector<Vec3> SampleMeshSurface(const TriangleMesh& mesh, size_t count,
                                    uint64_t seed);

/// Static 3D k-d tree over a point set.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& points);

  /// Index and squared distance of the nearest point; points must be nonempty.
  std::pair<int, double> Nearest(const Vec3& query) const;

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };
  int Build(std::vector<int>& indices, int lo, int hi, int depth);
  void Search(int node, const Vec3& query, int& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace colrec
