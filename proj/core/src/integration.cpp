#include "colrec/integration.hpp"

#include "colrec/geometry.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace colrec {

NormalMap NormalsFromDepth(const DepthMap& depth, const Intrinsics& K) {
  if (depth.width < 3 || depth.height < 3) {
    throw InvalidInputError("normals from depth: image must be at least 3x3");
  }
  NormalMap out(depth.width, depth.height);
  std::fill(out.validity.begin(), out.validity.end(), 0);
  for (int y = 1; y < depth.height - 1; ++y) {
    for (int x = 1; x < depth.width - 1; ++x) {
      if (!depth.IsValid(x - 1, y - 1) || !depth.IsValid(x + 1, y + 1) ||
          !depth.IsValid(x + 1, y - 1) || !depth.IsValid(x - 1, y + 1) ||
          !depth.IsValid(x, y)) {
        continue;
      }
      const Vec3 v1 =
          Backproject(K, Vec2(x - 1, y - 1), depth.At(x - 1, y - 1)) -
          Backproject(K, Vec2(x + 1, y + 1), depth.At(x + 1, y + 1));
      const Vec3 v2 =
          Backproject(K, Vec2(x + 1, y - 1), depth.At(x + 1, y - 1)) -
          Backproject(K, Vec2(x - 1, y + 1), depth.At(x - 1, y + 1));
      Vec3 n = v1.cross(v2);
      const double len = n.norm();
      if (len < 1e-14) continue;  // degenerate local patch
      n /= len;
      const Vec3 point = Backproject(K, Vec2(x, y), depth.At(x, y));
      if (n.dot(point) > 0.0) n = -n;  // face the camera
      out.At(x, y) = n;
      out.validity[out.Index(x, y)] = 1;
    }
  }
  // Replicate the nearest interior value onto the border ring.
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      if (out.IsValid(x, y)) continue;
      const int xi = std::clamp(x, 1, out.width - 2);
      const int yi = std::clamp(y, 1, out.height - 2);
      if (out.IsValid(xi, yi)) {
        out.At(x, y) = out.At(xi, yi);
        out.validity[out.Index(x, y)] = 1;
      }
    }
  }
  return out;
}

IntegrationResult IntegrateNormals(const NormalMap& normals,
                                   const Intrinsics& K, double anchor_depth) {
  if (!(anchor_depth > 0.0)) {
    throw InvalidInputError("integration: anchor depth must be positive");
  }
  const int w = normals.width, h = normals.height;
  const size_t count = size_t(w) * h;
  constexpr double kGrazingCosine = 1e-3;

  // Per-pixel log-depth gradient targets from the tangency condition
  // N . dX/du = 0 with X = z * K^-1 p.
  std::vector<double> gu(count, 0.0), gv(count, 0.0);
  std::vector<uint8_t> usable(count, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = normals.Index(x, y);
      if (!normals.IsValid(x, y)) continue;
      const Vec3& n = normals.At(x, y);
      const Vec3 ray((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      const double cosine = n.dot(ray);
      if (std::abs(cosine) < kGrazingCosine) continue;
      gu[i] = -n.x() / (K.fx * cosine);
      gv[i] = -n.y() / (K.fy * cosine);
      usable[i] = 1;
    }
  }

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  std::vector<double> rhs;
  std::vector<std::array<int, 2>> edges;  // (from index, to index)
  auto add_edge = [&](size_t a, size_t b, double target) {
    const int row = int(rhs.size());
    triplets.emplace_back(row, int(b), 1.0);
    triplets.emplace_back(row, int(a), -1.0);
    rhs.push_back(target);
    edges.push_back({int(a), int(b)});
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = size_t(y) * w + x;
      if (!usable[i]) continue;
      if (x + 1 < w && usable[i + 1]) {
        add_edge(i, i + 1, 0.5 * (gu[i] + gu[i + 1]));
      }
      if (y + 1 < h && usable[i + w]) {
        add_edge(i, i + w, 0.5 * (gv[i] + gv[i + w]));
      }
    }
  }
  if (rhs.empty()) {
    throw SolverError("integration: no usable normals (all grazing?)");
  }

  const int n_rows = int(rhs.size());
  Eigen::SparseMatrix<double> A(n_rows, int(count));
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(rhs.data(), n_rows);

  // Gauge fixing: the gradient equations determine log depth up to a
  // constant per connected component; a tiny diagonal shift pins them.
  Eigen::SparseMatrix<double> normal_matrix = A.transpose() * A;
  for (int i = 0; i < int(count); ++i) normal_matrix.coeffRef(i, i) += 1e-9;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(normal_matrix);
  if (solver.info() != Eigen::Success) {
    throw SolverError("integration: factorization failed");
  }
  const Eigen::VectorXd log_depth = solver.solve(A.transpose() * b);
  if (solver.info() != Eigen::Success) {
    throw SolverError("integration: solve failed");
  }

  IntegrationResult result;
  result.depth = DepthMap(w, h);
  std::vector<uint8_t> connected(count, 0);
  for (const auto& e : edges) {
    connected[e[0]] = 1;
    connected[e[1]] = 1;
  }
  std::vector<double> valid_logs;
  for (size_t i = 0; i < count; ++i) {
    if (connected[i]) valid_logs.push_back(log_depth[int(i)]);
  }
  if (valid_logs.empty()) {
    throw SolverError("integration: disconnected system");
  }
  const size_t mid = valid_logs.size() / 2;
  std::nth_element(valid_logs.begin(), valid_logs.begin() + mid,
                   valid_logs.end());
  double median_log = valid_logs[mid];
  if (valid_logs.size() % 2 == 0) {
    std::nth_element(valid_logs.begin(), valid_logs.begin() + mid - 1,
                     valid_logs.begin() + mid);
    median_log = 0.5 * (median_log + valid_logs[mid - 1]);
  }
  const double shift = std::log(anchor_depth) - median_log;
  for (size_t i = 0; i < count; ++i) {
    if (!connected[i]) continue;
    result.depth.values[i] = std::exp(log_depth[int(i)] + shift);
    result.depth.validity[i] = 1;
  }

  const Eigen::VectorXd residual_vec = A * log_depth - b;
  result.residual = std::sqrt(residual_vec.squaredNorm() / n_rows);
  return result;
}

}  // namespace colrec
