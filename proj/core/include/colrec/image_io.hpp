#pragma once

#include "colrec/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace colrec {

// PFM: "Pf" (scalar) / "PF" (3-channel), little-endian (negative scale),
// rows stored bottom-up. Invalid depth pixels are written as +inf and
// mapped back to invalid on read.
void WritePfm(const std::string& path, const DepthMap& depth);
void WritePfm(const std::string& path, const NormalMap& normals);
void WritePfm(const std::string& path, const Mask& mask);
DepthMap ReadPfmDepth(const std::string& path);
NormalMap ReadPfmNormals(const std::string& path);

// 8-bit PNG, values clamped and quantized from [0,1].
void WritePng(const std::string& path, const ImageRGB& image);
ImageRGB ReadPng(const std::string& path);

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> normals;  // optional, per vertex; empty or size==vertices

  void Validate() const;
  double SurfaceArea() const;
};

void WritePlyMesh(const std::string& path, const TriangleMesh& mesh,
                  bool binary = true);
TriangleMesh ReadPlyMesh(const std::string& path);

/// Vertex-only PLY read (faces ignored if present).
std::vector<Vec3> ReadPlyPoints(const std::string& path);
void WritePlyPoints(const std::string& path, const std::vector<Vec3>& points,
                    bool binary = true);

}  // namespace colrec
