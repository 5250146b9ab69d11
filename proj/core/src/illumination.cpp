#include "colrec/illumination.hpp"

#include "colrec/geometry.hpp"
#include "colrec/image_io.hpp"

#include <algorithm>
#include <cmath>

namespace colrec {

void LightField::Validate(double tol) const {
  for (size_t i = 0; i < directions.size(); ++i) {
    if (!validity[i]) continue;
    if (std::abs(directions[i].norm() - 1.0) > tol) {
      throw InvalidInputError("light field: direction is not unit length");
    }
    if (attenuation[i] < 0.0 || !std::isfinite(attenuation[i])) {
      throw InvalidInputError("light field: attenuation must be >= 0");
    }
  }
}

LightField ComputeLightField(const DepthMap& depth, const Intrinsics& K,
                             double mu) {
  if (mu < 0.0) {
    throw InvalidInputError("light field: mu must be non-negative");
  }
  LightField field;
  field.width = depth.width;
  field.height = depth.height;
  field.mu = mu;
  const size_t count = size_t(depth.width) * depth.height;
  field.directions.assign(count, Vec3(0, 0, -1));
  field.attenuation.assign(count, 0.0);
  field.validity.assign(count, 0);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const size_t i = depth.Index(x, y);
      if (!depth.IsValid(x, y)) continue;
      const double d = depth.At(x, y);
      if (!(d > 0.0)) {
        throw SolverError("light field: zero depth at a valid pixel");
      }
      const Vec3 point = Backproject(K, Vec2(x, y), d);
      const double dist = point.norm();
      const Vec3 dir = -point / dist;
      const double cosine = -dir.dot(field.axis);  // = point.z/|point| > 0
      field.directions[i] = dir;
      field.attenuation[i] = std::pow(cosine, mu) / (dist * dist);
      field.validity[i] = 1;
    }
  }
  return field;
}

namespace {

ImageRGB ShadeImpl(const NormalMap& normals, const LightField& field,
                   const std::vector<double>* albedo_grid,
                   double albedo_scalar) {
  if (normals.width != field.width || normals.height != field.height) {
    throw InvalidInputError("shading: dimension mismatch");
  }
  ImageRGB out(field.width, field.height);
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const size_t i = field.Index(x, y);
      if (!field.validity[i] || !normals.IsValid(x, y)) continue;
      const double albedo = albedo_grid ? (*albedo_grid)[i] : albedo_scalar;
      if (albedo < 0.0) {
        throw InvalidInputError("shading: albedo must be non-negative");
      }
      const double cosine =
          std::max(0.0, normals.At(x, y).dot(field.directions[i]));
      const double intensity =
          std::clamp(albedo * field.attenuation[i] * cosine, 0.0, 1.0);
      out.At(x, y) = Vec3::Constant(intensity);
    }
  }
  return out;
}

}  // namespace

ImageRGB ShadeLambertian(const NormalMap& normals, const LightField& field,
                         double albedo) {
  return ShadeImpl(normals, field, nullptr, albedo);
}

ImageRGB ShadeLambertian(const NormalMap& normals, const LightField& field,
                         const std::vector<double>& albedo_grid) {
  if (albedo_grid.size() != size_t(field.width) * field.height) {
    throw InvalidInputError("shading: albedo grid size mismatch");
  }
  return ShadeImpl(normals, field, &albedo_grid, 0.0);
}

double EstimateAlbedo(const ImageRGB& image, const NormalMap& normals,
                      const LightField& field) {
  constexpr double kMinCosine = 0.1;
  constexpr double kMinIntensity = 1e-3;
  std::vector<double> ratios;
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const size_t i = field.Index(x, y);
      if (!field.validity[i] || !normals.IsValid(x, y)) continue;
      const double cosine = normals.At(x, y).dot(field.directions[i]);
      const double shading = field.attenuation[i] * std::max(kMinCosine, cosine);
      const double intensity = image.At(x, y).mean();
      if (cosine < kMinCosine || shading <= 0.0 ||
          intensity < kMinIntensity || intensity > 0.999) {
        continue;  // shadowed, grazing, or saturated
      }
      ratios.push_back(intensity / shading);
    }
  }
  if (ratios.empty()) {
    throw EmptySupportError("albedo estimate: no well-lit pixels");
  }
  const size_t mid = ratios.size() / 2;
  std::nth_element(ratios.begin(), ratios.begin() + mid, ratios.end());
  return ratios[mid];
}

void WriteLightField(const std::string& directions_path,
                     const std::string& attenuation_path,
                     const LightField& field) {
  NormalMap dirs;
  dirs.width = field.width;
  dirs.height = field.height;
  dirs.vectors = field.directions;
  dirs.validity = field.validity;
  WritePfm(directions_path, dirs);

  // Attenuation zeros are representable: write through the raw scalar path.
  Mask m;
  m.width = field.width;
  m.height = field.height;
  m.weights = field.attenuation;
  WritePfm(attenuation_path, m);
}

}  // namespace colrec
