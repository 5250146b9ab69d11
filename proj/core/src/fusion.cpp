#include "colrec/fusion.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace colrec {

void TsdfConfig::Validate() const {
  if (!(voxel_size > 0.0)) {
    throw InvalidInputError("tsdf: voxel size must be positive");
  }
  if (!(truncation > voxel_size)) {
    throw InvalidInputError("tsdf: truncation must exceed the voxel size");
  }
  if (dims.minCoeff() < 1) {
    throw InvalidInputError("tsdf: grid dimensions must be positive");
  }
}

TsdfConfig TsdfConfig::ForBounds(const Vec3& lower, const Vec3& upper,
                                 double voxel_size, double truncation) {
  const Vec3 extent = upper - lower;
  if (extent.minCoeff() <= 0.0) {
    throw InvalidInputError("tsdf: empty bounding box");
  }
  TsdfConfig config;
  config.voxel_size = voxel_size > 0.0 ? voxel_size : extent.norm() / 128.0;
  config.truncation =
      truncation > 0.0 ? truncation : 3.0 * config.voxel_size;
  config.origin = lower;
  for (int axis = 0; axis < 3; ++axis) {
    config.dims[axis] =
        std::max(1, int(std::ceil(extent[axis] / config.voxel_size)));
  }
  config.Validate();
  return config;
}

VoxelGrid FuseTsdf(const std::vector<PosedDepth>& frames,
                   const Intrinsics& intrinsics, const TsdfConfig& config) {
  if (frames.empty()) {
    throw InvalidInputError("tsdf: at least one frame is required");
  }
  config.Validate();
  intrinsics.Validate();

  VoxelGrid grid;
  grid.origin = config.origin;
  grid.voxel_size = config.voxel_size;
  grid.dims = config.dims;
  const size_t count = size_t(grid.dims.x()) * grid.dims.y() * grid.dims.z();
  grid.tsdf.assign(count, 0.0f);
  grid.weights.assign(count, 0.0f);

  for (const PosedDepth& frame : frames) {
    frame.depth.Validate();
    const Pose camera_from_world = Invert(frame.world_from_camera);
    for (int z = 0; z < grid.dims.z(); ++z) {
      for (int y = 0; y < grid.dims.y(); ++y) {
        for (int x = 0; x < grid.dims.x(); ++x) {
          const Vec3 point_camera =
              camera_from_world.rotation * grid.VoxelCenter(x, y, z) +
              camera_from_world.translation;
          if (!(point_camera.z() > 0.0)) continue;
          const Vec2 pixel = Project(intrinsics, point_camera);
          const Sample<double> depth =
              SampleBilinear(frame.depth, pixel);
          if (!depth.valid) continue;
          const double sdf = depth.value - point_camera.z();
          if (sdf < -config.truncation) continue;  // hidden behind the surface
          const float observation =
              float(std::clamp(sdf / config.truncation, -1.0, 1.0));
          const size_t i = grid.Index(x, y, z);
          const float weight = grid.weights[i];
          grid.tsdf[i] = (grid.tsdf[i] * weight + observation) / (weight + 1.0f);
          grid.weights[i] = weight + 1.0f;
        }
      }
    }
  }
  return grid;
}

namespace {

// Tetrahedral decomposition of each cell; linear interpolation along edges
// reproduces planar level sets exactly.
constexpr int kTets[6][4] = {{0, 5, 1, 6}, {0, 1, 2, 6}, {0, 2, 3, 6},
                             {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6}};
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

struct VertexKey {
  int64_t a, b;  // ordered voxel-corner ids of the crossing edge
  bool operator<(const VertexKey& o) const {
    return a != o.a ? a < o.a : b < o.b;
  }
};

}  // namespace

TriangleMesh ExtractMesh(const VoxelGrid& grid) {
  TriangleMesh mesh;
  if (grid.dims.minCoeff() < 2) return mesh;
  const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();
  auto corner_id = [&](int x, int y, int z) {
    return (int64_t(z) * (ny + 1) + y) * (nx + 1) + x;
  };
  std::map<VertexKey, int> edge_vertices;

  auto edge_vertex = [&](const Vec3& pa, const Vec3& pb, double va, double vb,
                         int64_t ia, int64_t ib) {
    VertexKey key = ia < ib ? VertexKey{ia, ib} : VertexKey{ib, ia};
    auto it = edge_vertices.find(key);
    if (it != edge_vertices.end()) return it->second;
    const double t = va / (va - vb);  // va, vb have opposite signs
    const Vec3 p = pa + t * (pb - pa);
    const int index = int(mesh.vertices.size());
    mesh.vertices.push_back(p);
    edge_vertices.emplace(key, index);
    return index;
  };

  for (int z = 0; z + 1 < nz; ++z) {
    for (int y = 0; y + 1 < ny; ++y) {
      for (int x = 0; x + 1 < nx; ++x) {
        double value[8];
        Vec3 position[8];
        int64_t id[8];
        bool observed = true;
        for (int c = 0; c < 8; ++c) {
          const int cx = x + kCorner[c][0];
          const int cy = y + kCorner[c][1];
          const int cz = z + kCorner[c][2];
          const size_t i = grid.Index(cx, cy, cz);
          if (grid.weights[i] <= 0.0f) {
            observed = false;
            break;
          }
          value[c] = grid.tsdf[i];
          position[c] = grid.VoxelCenter(cx, cy, cz);
          id[c] = corner_id(cx, cy, cz);
        }
        if (!observed) continue;

        for (const auto& tet : kTets) {
          int inside[4], n_inside = 0;
          int outside[4], n_outside = 0;
          for (int k = 0; k < 4; ++k) {
            // Sign convention: tsdf > 0 in front of the surface.
            if (value[tet[k]] < 0.0) {
              inside[n_inside++] = tet[k];
            } else {
              outside[n_outside++] = tet[k];
            }
          }
          if (n_inside == 0 || n_outside == 0) continue;
          auto ev = [&](int a, int b) {
            return edge_vertex(position[a], position[b], value[a], value[b],
                               id[a], id[b]);
          };
          if (n_inside == 1) {
            const int a = inside[0];
            mesh.triangles.push_back({ev(a, outside[0]), ev(a, outside[1]),
                                      ev(a, outside[2])});
          } else if (n_inside == 3) {
            const int a = outside[0];
            mesh.triangles.push_back({ev(inside[0], a), ev(inside[1], a),
                                      ev(inside[2], a)});
          } else {
            const int v00 = ev(inside[0], outside[0]);
            const int v01 = ev(inside[0], outside[1]);
            const int v10 = ev(inside[1], outside[0]);
            const int v11 = ev(inside[1], outside[1]);
            mesh.triangles.push_back({v00, v01, v11});
            mesh.triangles.push_back({v00, v11, v10});
          }
        }
      }
    }
  }

  // Drop zero-area triangles (collinear interpolation cases).
  std::vector<std::array<int, 3>> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    if (e1.cross(e2).norm() > 1e-14 * grid.voxel_size * grid.voxel_size) {
      kept.push_back(t);
    }
  }
  mesh.triangles = std::move(kept);
  return mesh;
}

double CoverageMap::CoverageFraction() const {
  if (observed.empty()) return 0.0;
  size_t n = 0;
  for (uint8_t o : observed) n += (o != 0);
  return double(n) / double(observed.size());
}

std::string CoverageMap::HolesToJson() const {
  nlohmann::json j = nlohmann::json::array();
  for (const HoleComponent& hole : holes) {
    j.push_back({{"area_fraction", hole.area_fraction},
                 {"bbox_u", {hole.bbox_u_lo, hole.bbox_u_hi}},
                 {"bbox_theta", {hole.bbox_theta_lo, hole.bbox_theta_hi}},
                 {"cell_count", hole.cell_count}});
  }
  return j.dump(2);
}

ImageRGB CoverageMap::ToImage() const {
  ImageRGB image(cells_theta, cells_u);
  for (int u = 0; u < cells_u; ++u) {
    for (int t = 0; t < cells_theta; ++t) {
      const double v = observed[size_t(u) * cells_theta + t] ? 1.0 : 0.0;
      image.At(t, u) = Vec3::Constant(v);
    }
  }
  return image;
}

CoverageMap ComputeCoverage(const std::vector<PosedDepth>& frames,
                            const Intrinsics& intrinsics,
                            const Phantom& phantom,
                            const CoverageConfig& config) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  CoverageMap map;
  map.cells_u = config.cells_u;
  map.cells_theta = config.cells_theta;
  map.observed.assign(size_t(config.cells_u) * config.cells_theta, 0);
  const double incidence_cos =
      std::sin(config.incidence_margin_deg * M_PI / 180.0);
  const double length = phantom.params().length;

  std::vector<Pose> camera_from_world;
  camera_from_world.reserve(frames.size());
  for (const PosedDepth& frame : frames) {
    camera_from_world.push_back(Invert(frame.world_from_camera));
  }

  for (int iu = 0; iu < config.cells_u; ++iu) {
    const double u = (iu + 0.5) / config.cells_u * length;
    for (int it = 0; it < config.cells_theta; ++it) {
      const double theta = (it + 0.5) / config.cells_theta * kTwoPi;
      const Vec3 point = phantom.SurfacePoint(u, theta);
      const Vec3 normal = phantom.SurfaceNormal(u, theta);  // into the lumen
      bool seen = false;
      for (size_t f = 0; f < frames.size() && !seen; ++f) {
        const Pose& view = camera_from_world[f];
        const Vec3 point_camera = view.rotation * point + view.translation;
        if (!(point_camera.z() > 0.0)) continue;
        const Vec2 pixel = Project(intrinsics, point_camera);
        const Sample<double> depth = SampleBilinear(frames[f].depth, pixel);
        if (!depth.valid) continue;
        if (std::abs(depth.value - point_camera.z()) >
            config.depth_tolerance * point_camera.z()) {
          continue;  // occluded (a nearer wall was imaged along this ray)
        }
        const Vec3 to_camera =
            (frames[f].world_from_camera.translation - point).normalized();
        if (normal.dot(to_camera) < incidence_cos) continue;  // grazing
        seen = true;
      }
      map.observed[size_t(iu) * config.cells_theta + it] = seen ? 1 : 0;
    }
  }

  // Connected components of unobserved cells; 4-neighborhood, theta wraps.
  std::vector<int> component(map.observed.size(), -1);
  const int nu = config.cells_u, nt = config.cells_theta;
  int next_component = 0;
  for (size_t start = 0; start < map.observed.size(); ++start) {
    if (map.observed[start] || component[start] >= 0) continue;
    const int id = next_component++;
    HoleComponent hole;
    int u_lo = nu, u_hi = -1;
    std::vector<uint8_t> theta_hit(nt, 0);
    std::deque<size_t> queue{start};
    component[start] = id;
    while (!queue.empty()) {
      const size_t cell = queue.front();
      queue.pop_front();
      ++hole.cell_count;
      const int iu = int(cell) / nt;
      const int it = int(cell) % nt;
      u_lo = std::min(u_lo, iu);
      u_hi = std::max(u_hi, iu);
      theta_hit[it] = 1;
      const int neighbors[4][2] = {{iu - 1, it},
                                   {iu + 1, it},
                                   {iu, (it + 1) % nt},
                                   {iu, (it + nt - 1) % nt}};
      for (const auto& n : neighbors) {
        if (n[0] < 0 || n[0] >= nu) continue;
        const size_t j = size_t(n[0]) * nt + n[1];
        if (map.observed[j] || component[j] >= 0) continue;
        component[j] = id;
        queue.push_back(j);
      }
    }
    hole.area_fraction = double(hole.cell_count) / double(map.observed.size());
    hole.bbox_u_lo = double(u_lo) / nu * length;
    hole.bbox_u_hi = double(u_hi + 1) / nu * length;
    // Tightest wrapped angular interval covering the component.
    int best_gap = -1, gap_start = 0, run = 0;
    for (int it = 0; it < 2 * nt; ++it) {
      if (!theta_hit[it % nt]) {
        ++run;
      } else {
        run = 0;
      }
      if (run > best_gap && it >= nt) {
        best_gap = run;
        gap_start = it - run + 1;
      }
    }
    if (best_gap >= nt || best_gap < 0) {
      hole.bbox_theta_lo = 0.0;
      hole.bbox_theta_hi = kTwoPi;
    } else {
      const int lo = (gap_start + best_gap) % nt;  // first covered cell
      const int span = nt - best_gap;
      hole.bbox_theta_lo = double(lo) / nt * kTwoPi;
      hole.bbox_theta_hi = double(lo + span) / nt * kTwoPi;
    }
    map.holes.push_back(hole);
  }
  std::sort(map.holes.begin(), map.holes.end(),
            [](const HoleComponent& a, const HoleComponent& b) {
              return a.cell_count > b.cell_count;
            });
  return map;
}

}  // namespace colrec
