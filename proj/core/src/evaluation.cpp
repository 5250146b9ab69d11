#include "colrec/evaluation.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace colrec {

std::string DepthMetrics::ToJson() const {
  nlohmann::json j{{"abs_rel", abs_rel},
                   {"sq_rel", sq_rel},
                   {"rmse", rmse},
                   {"log_rmse", log_rmse},
                   {"scale_applied", scale_applied}};
  return j.dump(2);
}

std::string AlignmentResult::ToJson() const {
  nlohmann::json j;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) j["rotation"][r][c] = rotation(r, c);
    j["translation"][r] = translation[r];
  }
  j["scale"] = scale;
  j["residual"] = residual;
  return j.dump(2);
}

namespace {

double Median(std::vector<double> values) {
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    std::nth_element(values.begin(), values.begin() + mid - 1,
                     values.begin() + mid);
    m = 0.5 * (m + values[mid - 1]);
  }
  return m;
}

}  // namespace

DepthMetrics ComputeDepthMetrics(const DepthMap& pred, const DepthMap& gt,
                                 const Mask& mask) {
  if (pred.width != gt.width || pred.height != gt.height ||
      mask.width != gt.width || mask.height != gt.height) {
    throw InvalidInputError("depth metrics: dimension mismatch");
  }
  std::vector<double> pred_vals, gt_vals;
  for (size_t i = 0; i < gt.values.size(); ++i) {
    if (!pred.validity[i] || !gt.validity[i] || mask.weights[i] <= 0.0) {
      continue;
    }
    if (!(gt.values[i] > 0.0)) {
      throw InvalidInputError("depth metrics: non-positive ground truth depth");
    }
    if (!(pred.values[i] > 0.0)) {
      throw InvalidInputError("depth metrics: non-positive prediction");
    }
    pred_vals.push_back(pred.values[i]);
    gt_vals.push_back(gt.values[i]);
  }
  if (pred_vals.empty()) {
    throw EmptySupportError("depth metrics: empty masked support");
  }

  DepthMetrics m;
  m.scale_applied = Median(gt_vals) / Median(pred_vals);
  const size_t n = pred_vals.size();
  double abs_rel = 0, sq_rel = 0, mse = 0, log_mse = 0;
  for (size_t i = 0; i < n; ++i) {
    const double d = pred_vals[i] * m.scale_applied;
    const double g = gt_vals[i];
    abs_rel += std::abs(d - g) / g;
    sq_rel += (d - g) * (d - g) / g;
    mse += (d - g) * (d - g);
    const double dl = std::log(d) - std::log(g);
    log_mse += dl * dl;
  }
  m.abs_rel = abs_rel / double(n);
  m.sq_rel = sq_rel / double(n);
  m.rmse = std::sqrt(mse / double(n));
  m.log_rmse = std::sqrt(log_mse / double(n));
  return m;
}

AlignmentResult ProcrustesAlign(const std::vector<Vec3>& points_a,
                                const std::vector<Vec3>& points_b) {
  if (points_a.size() != points_b.size() || points_a.size() < 3) {
    throw InvalidInputError(
        "procrustes: need >= 3 corresponding point pairs");
  }
  const size_t n = points_a.size();
  Vec3 mean_a = Vec3::Zero(), mean_b = Vec3::Zero();
  for (size_t i = 0; i < n; ++i) {
    mean_a += points_a[i];
    mean_b += points_b[i];
  }
  mean_a /= double(n);
  mean_b /= double(n);

  Mat3 covariance = Mat3::Zero();
  double var_a = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 ca = points_a[i] - mean_a;
    const Vec3 cb = points_b[i] - mean_b;
    covariance += cb * ca.transpose();
    var_a += ca.squaredNorm();
  }
  covariance /= double(n);
  var_a /= double(n);
  if (var_a < 1e-15) {
    throw InvalidInputError("procrustes: degenerate (coincident) points");
  }

  Eigen::JacobiSVD<Mat3> svd(covariance,
                             Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d& singular = svd.singularValues();
  // Collinear configurations leave the rotation about the axis undetermined.
  if (singular(1) < 1e-12 * std::max(singular(0), 1e-300)) {
    throw SolverError("procrustes: degenerate (collinear) points");
  }
  Mat3 flip = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    flip(2, 2) = -1.0;
  }
  AlignmentResult result;
  result.rotation = svd.matrixU() * flip * svd.matrixV().transpose();
  result.scale = (singular.asDiagonal() * flip).trace() / var_a;
  if (!(result.scale > 0.0)) {
    throw SolverError("procrustes: non-positive scale");
  }
  result.translation = mean_b - result.scale * (result.rotation * mean_a);

  double sq = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sq += (result.Apply(points_a[i]) - points_b[i]).squaredNorm();
  }
  result.residual = std::sqrt(sq / double(n));
  return result;
}

KdTree3::KdTree3(const std::vector<Vec3>& points) : points_(points) {
  if (points_.empty()) {
    throw EmptySupportError("kd-tree: empty point set");
  }
  std::vector<int> indices(points_.size());
  std::iota(indices.begin(), indices.end(), 0);
  nodes_.reserve(points_.size());
  root_ = Build(indices, 0, int(points_.size()), 0);
}

int KdTree3::Build(std::vector<int>& indices, int lo, int hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const int mid = (lo + hi) / 2;
  std::nth_element(indices.begin() + lo, indices.begin() + mid,
                   indices.begin() + hi, [&](int a, int b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  Node node;
  node.point = indices[mid];
  node.axis = axis;
  const int self = int(nodes_.size());
  nodes_.push_back(node);
  const int left = Build(indices, lo, mid, depth + 1);
  const int right = Build(indices, mid + 1, hi, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::Search(int node, const Vec3& query, int& best,
                     double& best_d2) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const double d2 = (points_[n.point] - query).squaredNorm();
  if (d2 < best_d2) {
    best_d2 = d2;
    best = n.point;
  }
  const double delta = query[n.axis] - points_[n.point][n.axis];
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  Search(near, query, best, best_d2);
  if (delta * delta < best_d2) Search(far, query, best, best_d2);
}

std::pair<int, double> KdTree3::Nearest(const Vec3& query) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  Search(root_, query, best, best_d2);
  return {best, best_d2};
}

namespace {

double OneWayChamfer(const std::vector<Vec3>& from,
                     const std::vector<Vec3>& to) {
  const KdTree3 tree(to);
  double sum = 0.0;
  for (const Vec3& p : from) {
    sum += std::sqrt(tree.Nearest(p).second);
  }
  return sum / double(from.size());
}

double OneWayChamferBrute(const std::vector<Vec3>& from,
                          const std::vector<Vec3>& to) {
  double sum = 0.0;
  for (const Vec3& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to) {
      best = std::min(best, (p - q).squaredNorm());
    }
    sum += std::sqrt(best);
  }
  return sum / double(from.size());
}

}  // namespace

double ChamferDistance(const std::vector<Vec3>& cloud_from,
                       const std::vector<Vec3>& cloud_to,
                       ChamferDirection direction) {
  if (cloud_from.empty() || cloud_to.empty()) {
    throw EmptySupportError("chamfer: empty point set");
  }
  if (direction == ChamferDirection::kOneWay) {
    return OneWayChamfer(cloud_from, cloud_to);
  }
  return 0.5 * (OneWayChamfer(cloud_from, cloud_to) +
                OneWayChamfer(cloud_to, cloud_from));
}

double ChamferDistanceBruteForce(const std::vector<Vec3>& cloud_from,
                                 const std::vector<Vec3>& cloud_to,
                                 ChamferDirection direction) {
  if (cloud_from.empty() || cloud_to.empty()) {
    throw EmptySupportError("chamfer: empty point set");
  }
  if (direction == ChamferDirection::kOneWay) {
    return OneWayChamferBrute(cloud_from, cloud_to);
  }
  return 0.5 * (OneWayChamferBrute(cloud_from, cloud_to) +
                OneWayChamferBrute(cloud_to, cloud_from));
}

double OptimizeScaleChamfer(const std::vector<Vec3>& cloud_gt,
                            const std::vector<Vec3>& cloud_recon,
                            const AlignmentResult& aligned) {
  if (cloud_gt.empty() || cloud_recon.empty()) {
    throw EmptySupportError("scale optimization: empty point set");
  }
  // The reconstruction is rescaled about its centroid so the search only
  // changes size, not placement.
  Vec3 centroid = Vec3::Zero();
  std::vector<Vec3> placed(cloud_recon.size());
  for (size_t i = 0; i < cloud_recon.size(); ++i) {
    placed[i] = aligned.Apply(cloud_recon[i]);
    centroid += placed[i];
  }
  centroid /= double(placed.size());

  auto objective = [&](double relative_scale) {
    std::vector<Vec3> scaled(placed.size());
    for (size_t i = 0; i < placed.size(); ++i) {
      scaled[i] = centroid + relative_scale * (placed[i] - centroid);
    }
    return ChamferDistance(cloud_gt, scaled, ChamferDirection::kOneWay);
  };

  constexpr double kGolden = 0.6180339887498949;
  constexpr double kTol = 1e-4;
  double lo = 0.25, hi = 4.0;
  double m1 = hi - kGolden * (hi - lo);
  double m2 = lo + kGolden * (hi - lo);
  double f1 = objective(m1), f2 = objective(m2);
  while (hi - lo > kTol) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - kGolden * (hi - lo);
      f1 = objective(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + kGolden * (hi - lo);
      f2 = objective(m2);
    }
  }
  const double relative = 0.5 * (lo + hi);
  return relative * aligned.scale;
}

std::vector<Vec3> SampleMeshSurface(const TriangleMesh& mesh, size_t count,
                                    uint64_t seed) {
  mesh.Validate();
  if (mesh.triangles.empty()) {
    throw InvalidInputError("mesh sampling: mesh has no triangles");
  }
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    total += 0.5 * e1.cross(e2).norm();
    cumulative[i] = total;
  }
  if (total <= 0.0) {
    throw InvalidInputError("mesh sampling: zero surface area");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Vec3> samples;
  samples.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    const double pick = uniform(rng) * total;
    const size_t tri = size_t(std::lower_bound(cumulative.begin(),
                                               cumulative.end(), pick) -
                              cumulative.begin());
    const auto& t = mesh.triangles[std::min(tri, mesh.triangles.size() - 1)];
    double u = uniform(rng), v = uniform(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    samples.push_back(mesh.vertices[t[0]] +
                      u * (mesh.vertices[t[1]] - mesh.vertices[t[0]]) +
                      v * (mesh.vertices[t[2]] - mesh.vertices[t[0]]));
  }
  return samples;
}

}  // namespace colrec
