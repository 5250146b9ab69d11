#include "colrec/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace colrec {

namespace {

bool HostIsLittleEndian() {
  const uint16_t probe = 1;
  uint8_t byte;
  std::memcpy(&byte, &probe, 1);
  return byte == 1;
}

void WritePfmHeader(std::ofstream& out, const char* magic, int w, int h) {
  out << magic << "\n" << w << " " << h << "\n" << "-1.0" << "\n";
}

struct PfmData {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> samples;  // top-down row order after normalization
};

PfmData ReadPfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PFM file: " + path);
  std::string magic;
  in >> magic;
  PfmData data;
  if (magic == "Pf") {
    data.channels = 1;
  } else if (magic == "PF") {
    data.channels = 3;
  } else {
    throw IoError("not a PFM file: " + path);
  }
  double scale = 0.0;
  in >> data.width >> data.height >> scale;
  if (!in || data.width <= 0 || data.height <= 0 || scale == 0.0) {
    throw IoError("malformed PFM header: " + path);
  }
  in.get();  // single whitespace after the header
  const size_t count = size_t(data.width) * data.height * data.channels;
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()),
          std::streamsize(count * sizeof(float)));
  if (!in) throw IoError("truncated PFM data: " + path);
  const bool file_le = scale < 0.0;
  if (file_le != HostIsLittleEndian()) {
    for (float& f : raw) {
      uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
  // PFM rows are bottom-up; flip to top-down.
  data.samples.resize(count);
  const size_t row = size_t(data.width) * data.channels;
  for (int y = 0; y < data.height; ++y) {
    std::memcpy(&data.samples[size_t(y) * row],
                &raw[size_t(data.height - 1 - y) * row], row * sizeof(float));
  }
  return data;
}

void WritePfmSamples(const std::string& path, const char* magic, int w, int h,
                     int channels, const std::vector<float>& top_down) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open PFM file for writing: " + path);
  WritePfmHeader(out, magic, w, h);
  const size_t row = size_t(w) * channels;
  std::vector<float> buf(top_down.size());
  for (int y = 0; y < h; ++y) {
    std::memcpy(&buf[size_t(y) * row], &top_down[size_t(h - 1 - y) * row],
                row * sizeof(float));
  }
  if (!HostIsLittleEndian()) {
    for (float& f : buf) {
      uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            std::streamsize(buf.size() * sizeof(float)));
  if (!out) throw IoError("failed writing PFM data: " + path);
}

}  // namespace

void WritePfm(const std::string& path, const DepthMap& depth) {
  std::vector<float> samples(size_t(depth.width) * depth.height);
  for (size_t i = 0; i < samples.size(); ++i) {
    samples[i] = depth.validity[i] ? float(depth.values[i])
                                   : std::numeric_limits<float>::infinity();
  }
  WritePfmSamples(path, "Pf", depth.width, depth.height, 1, samples);
}

void WritePfm(const std::string& path, const NormalMap& normals) {
  std::vector<float> samples(size_t(normals.width) * normals.height * 3);
  for (size_t i = 0; i < normals.vectors.size(); ++i) {
    if (normals.validity[i]) {
      samples[3 * i + 0] = float(normals.vectors[i].x());
      samples[3 * i + 1] = float(normals.vectors[i].y());
      samples[3 * i + 2] = float(normals.vectors[i].z());
    } else {
      samples[3 * i + 0] = samples[3 * i + 1] = samples[3 * i + 2] =
          std::numeric_limits<float>::infinity();
    }
  }
  WritePfmSamples(path, "PF", normals.width, normals.height, 3, samples);
}

void WritePfm(const std::string& path, const Mask& mask) {
  std::vector<float> samples(mask.weights.begin(), mask.weights.end());
  WritePfmSamples(path, "Pf", mask.width, mask.height, 1, samples);
}

DepthMap ReadPfmDepth(const std::string& path) {
  const PfmData data = ReadPfm(path);
  if (data.channels != 1) throw IoError("expected scalar PFM: " + path);
  DepthMap depth(data.width, data.height);
  for (size_t i = 0; i < data.samples.size(); ++i) {
    const float v = data.samples[i];
    if (std::isfinite(v) && v > 0.0f) {
      depth.values[i] = v;
      depth.validity[i] = 1;
    }
  }
  return depth;
}

NormalMap ReadPfmNormals(const std::string& path) {
  const PfmData data = ReadPfm(path);
  if (data.channels != 3) throw IoError("expected 3-channel PFM: " + path);
  NormalMap normals(data.width, data.height);
  for (size_t i = 0; i < normals.vectors.size(); ++i) {
    Vec3 v(data.samples[3 * i], data.samples[3 * i + 1],
           data.samples[3 * i + 2]);
    if (v.allFinite() && v.norm() > 1e-9) {
      normals.vectors[i] = v.normalized();
      normals.validity[i] = 1;
    } else {
      normals.vectors[i] = Vec3(0, 0, -1);
      normals.validity[i] = 0;
    }
  }
  return normals;
}

void WritePng(const std::string& path, const ImageRGB& image) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open PNG file for writing: " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng failure writing: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<uint8_t> row(size_t(image.width) * 3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Vec3& p = image.At(x, y);
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(p[c], 0.0, 1.0);
        row[3 * x + c] = uint8_t(std::lround(v * 255.0));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

ImageRGB ReadPng(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open PNG file: " + path);
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("libpng failure reading: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  // Normalize to 8-bit RGB regardless of the stored layout.
  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int width = int(png_get_image_width(png, info));
  const int height = int(png_get_image_height(png, info));
  ImageRGB image(width, height);
  std::vector<uint8_t> row(size_t(width) * 3);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      image.At(x, y) = Vec3(row[3 * x] / 255.0, row[3 * x + 1] / 255.0,
                            row[3 * x + 2] / 255.0);
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return image;
}

void TriangleMesh::Validate() const {
  const int n = int(vertices.size());
  for (const auto& t : triangles) {
    for (int i : t) {
      if (i < 0 || i >= n) throw InvalidInputError("mesh: index out of range");
    }
  }
  if (!normals.empty() && normals.size() != vertices.size()) {
    throw InvalidInputError("mesh: normal count mismatch");
  }
}

double TriangleMesh::SurfaceArea() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
    const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
    area += 0.5 * e1.cross(e2).norm();
  }
  return area;
}

namespace {

void WritePlyHeader(std::ofstream& out, size_t n_vertices, size_t n_faces,
                    bool binary, bool with_normals) {
  out << "ply\nformat "
      << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << n_vertices << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (with_normals) {
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  }
  if (n_faces > 0) {
    out << "element face " << n_faces << "\n";
    out << "property list uchar int vertex_indices\n";
  }
  out << "end_header\n";
}

void PutFloatLE(std::ofstream& out, float f) {
  uint32_t u;
  std::memcpy(&u, &f, 4);
  if (!HostIsLittleEndian()) u = __builtin_bswap32(u);
  out.write(reinterpret_cast<const char*>(&u), 4);
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

size_t TypeSize(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw IoError("unsupported PLY property type: " + t);
}

double ReadBinaryScalar(std::ifstream& in, const std::string& type) {
  uint8_t buf[8];
  const size_t n = TypeSize(type);
  in.read(reinterpret_cast<char*>(buf), std::streamsize(n));
  if (!HostIsLittleEndian()) std::reverse(buf, buf + n);
  if (type == "float" || type == "float32") {
    float f;
    std::memcpy(&f, buf, 4);
    return f;
  }
  if (type == "double" || type == "float64") {
    double d;
    std::memcpy(&d, buf, 8);
    return d;
  }
  if (type == "char" || type == "int8") return int8_t(buf[0]);
  if (type == "uchar" || type == "uint8") return buf[0];
  int64_t v = 0;
  std::memcpy(&v, buf, n);
  if ((type == "short" || type == "int16") && (v & 0x8000)) v -= 0x10000;
  if ((type == "int" || type == "int32") && (v & 0x80000000LL)) {
    v -= 0x100000000LL;
  }
  return double(v);
}

}  // namespace

void WritePlyMesh(const std::string& path, const TriangleMesh& mesh,
                  bool binary) {
  mesh.Validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open PLY file for writing: " + path);
  const bool with_normals = !mesh.normals.empty();
  WritePlyHeader(out, mesh.vertices.size(), mesh.triangles.size(), binary,
                 with_normals);
  if (binary) {
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      for (int c = 0; c < 3; ++c) PutFloatLE(out, float(mesh.vertices[i][c]));
      if (with_normals) {
        for (int c = 0; c < 3; ++c) PutFloatLE(out, float(mesh.normals[i][c]));
      }
    }
    for (const auto& t : mesh.triangles) {
      const uint8_t n = 3;
      out.write(reinterpret_cast<const char*>(&n), 1);
      for (int i : t) {
        int32_t v = i;
        out.write(reinterpret_cast<const char*>(&v), 4);
      }
    }
  } else {
    out.precision(9);
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      out << mesh.vertices[i].x() << ' ' << mesh.vertices[i].y() << ' '
          << mesh.vertices[i].z();
      if (with_normals) {
        out << ' ' << mesh.normals[i].x() << ' ' << mesh.normals[i].y() << ' '
            << mesh.normals[i].z();
      }
      out << '\n';
    }
    for (const auto& t : mesh.triangles) {
      out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
  }
  if (!out) throw IoError("failed writing PLY: " + path);
}

TriangleMesh ReadPlyMesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PLY file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw IoError("not a PLY file: " + path);
  }
  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string keyword;
    ss >> keyword;
    if (keyword == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt != "ascii") {
        throw IoError("unsupported PLY format: " + fmt);
      }
    } else if (keyword == "element") {
      PlyElement e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (keyword == "property") {
      if (elements.empty()) throw IoError("PLY property before element");
      PlyProperty p;
      std::string type;
      ss >> type;
      if (type == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
      } else {
        p.type = type;
        ss >> p.name;
      }
      elements.back().properties.push_back(p);
    } else if (keyword == "end_header") {
      break;
    }
  }

  TriangleMesh mesh;
  for (const PlyElement& elem : elements) {
    const bool is_vertex = elem.name == "vertex";
    const bool is_face = elem.name == "face";
    for (size_t i = 0; i < elem.count; ++i) {
      Vec3 v = Vec3::Zero(), n = Vec3::Zero();
      bool has_n = false;
      std::vector<int> face;
      if (binary) {
        for (const PlyProperty& p : elem.properties) {
          if (p.is_list) {
            const int count = int(ReadBinaryScalar(in, p.count_type));
            for (int k = 0; k < count; ++k) {
              const double idx = ReadBinaryScalar(in, p.type);
              if (is_face) face.push_back(int(idx));
            }
          } else {
            const double val = ReadBinaryScalar(in, p.type);
            if (p.name == "x") v.x() = val;
            else if (p.name == "y") v.y() = val;
            else if (p.name == "z") v.z() = val;
            else if (p.name == "nx") { n.x() = val; has_n = true; }
            else if (p.name == "ny") n.y() = val;
            else if (p.name == "nz") n.z() = val;
          }
        }
      } else {
        if (!std::getline(in, line)) throw IoError("truncated PLY: " + path);
        std::istringstream ss(line);
        for (const PlyProperty& p : elem.properties) {
          if (p.is_list) {
            int count;
            ss >> count;
            for (int k = 0; k < count; ++k) {
              int idx;
              ss >> idx;
              if (is_face) face.push_back(idx);
            }
          } else {
            double val;
            ss >> val;
            if (p.name == "x") v.x() = val;
            else if (p.name == "y") v.y() = val;
            else if (p.name == "z") v.z() = val;
            else if (p.name == "nx") { n.x() = val; has_n = true; }
            else if (p.name == "ny") n.y() = val;
            else if (p.name == "nz") n.z() = val;
          }
        }
      }
      if (!in) throw IoError("truncated PLY: " + path);
      if (is_vertex) {
        mesh.vertices.push_back(v);
        if (has_n) mesh.normals.push_back(n);
      } else if (is_face) {
        // Fan-triangulate polygons.
        for (size_t k = 2; k < face.size(); ++k) {
          mesh.triangles.push_back({face[0], int(face[k - 1]), int(face[k])});
        }
      }
    }
  }
  if (!mesh.normals.empty() && mesh.normals.size() != mesh.vertices.size()) {
    mesh.normals.clear();
  }
  return mesh;
}

std::vector<Vec3> ReadPlyPoints(const std::string& path) {
  return ReadPlyMesh(path).vertices;
}

void WritePlyPoints(const std::string& path, const std::vector<Vec3>& points,
                    bool binary) {
  TriangleMesh mesh;
  mesh.vertices = points;
  WritePlyMesh(path, mesh, binary);
}

}  // namespace colrec
