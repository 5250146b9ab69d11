#include "colrec/losses.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace colrec {

namespace {

void CheckSameSize(int w, int h, int w2, int h2, const char* what) {
  if (w != w2 || h != h2) {
    throw InvalidInputError(std::string("dimension mismatch in ") + what);
  }
}

double MaskedMean(const LossResult& r, const Mask& mask, const char* what) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < r.per_pixel.size(); ++i) {
    if (!r.support[i]) continue;
    const double w = mask.weights[i];
    num += w * r.per_pixel[i];
    den += w;
  }
  if (den <= 0.0) {
    throw EmptySupportError(std::string("no supported pixels for ") + what);
  }
  return num / den;
}

}  // namespace

void LossWeights::Validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0 || lambda4 < 0) {
    throw InvalidInputError("loss weights must be non-negative");
  }
}

std::string LossReport::ToJson() const {
  nlohmann::json j{{"photo", photo},   {"norm", norm},
                   {"depth", depth},   {"orth", orth},
                   {"smooth", smooth}, {"total", total},
                   {"pixel_count", pixel_count}};
  return j.dump(2);
}

size_t LossResult::SupportCount() const {
  size_t n = 0;
  for (uint8_t s : support) n += (s != 0);
  return n;
}

LossResult LossNormalConsistency(const NormalMap& normals_s,
                                 const NormalMap& normals_t,
                                 const DepthMap& depth_t,
                                 const Pose& pose_t_to_s, const Intrinsics& K,
                                 const Mask& mask) {
  CheckSameSize(normals_s.width, normals_s.height, normals_t.width,
                normals_t.height, "normal consistency");
  CheckSameSize(normals_t.width, normals_t.height, depth_t.width,
                depth_t.height, "normal consistency");
  CheckSameSize(mask.width, mask.height, depth_t.width, depth_t.height,
                "normal consistency");
  LossResult r;
  r.width = depth_t.width;
  r.height = depth_t.height;
  r.per_pixel.assign(size_t(r.width) * r.height, 0.0);
  r.support.assign(size_t(r.width) * r.height, 0);
  const Mat3& rot = pose_t_to_s.rotation;
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const size_t i = depth_t.Index(x, y);
      if (!normals_t.IsValid(x, y)) continue;
      const WarpResult w = ProjectWarp(K, pose_t_to_s, depth_t, Vec2(x, y));
      if (!w.in_bounds) continue;
      const Sample<Vec3> ns = SampleBilinear(normals_s, w.pixel_s);
      if (!ns.valid) continue;
      const Vec3 rotated = rot * normals_t.At(x, y);
      r.per_pixel[i] = (ns.value - rotated).cwiseAbs().sum();
      r.support[i] = 1;
    }
  }
  r.value = MaskedMean(r, mask, "normal consistency");
  return r;
}

LossResult LossOrthogonality(const NormalMap& normals, const DepthMap& depth,
                             const Intrinsics& K) {
  CheckSameSize(normals.width, normals.height, depth.width, depth.height,
                "orthogonality");
  if (depth.width < 3 || depth.height < 3) {
    throw InvalidInputError("orthogonality: image must be at least 3x3");
  }
  LossResult r;
  r.width = depth.width;
  r.height = depth.height;
  r.per_pixel.assign(size_t(r.width) * r.height, 0.0);
  r.support.assign(size_t(r.width) * r.height, 0);
  // Diagonal neighbor pairs: (top-left, bottom-right), (top-right, bottom-left).
  static const int pair_dx[2][2] = {{-1, 1}, {1, -1}};
  static const int pair_dy[2][2] = {{-1, 1}, {-1, 1}};
  for (int y = 1; y < r.height - 1; ++y) {
    for (int x = 1; x < r.width - 1; ++x) {
      if (!normals.IsValid(x, y)) continue;
      double acc = 0.0;
      bool ok = true;
      for (int pair = 0; pair < 2 && ok; ++pair) {
        const int xa = x + pair_dx[pair][0], ya = y + pair_dy[pair][0];
        const int xb = x + pair_dx[pair][1], yb = y + pair_dy[pair][1];
        if (!depth.IsValid(xa, ya) || !depth.IsValid(xb, yb)) {
          ok = false;
          break;
        }
        const Vec3 v = Backproject(K, Vec2(xa, ya), depth.At(xa, ya)) -
                       Backproject(K, Vec2(xb, yb), depth.At(xb, yb));
        acc += std::abs(normals.At(x, y).dot(v));
      }
      if (!ok) continue;
      const size_t i = depth.Index(x, y);
      r.per_pixel[i] = acc / 2.0;
      r.support[i] = 1;
    }
  }
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < r.per_pixel.size(); ++i) {
    if (r.support[i]) {
      sum += r.per_pixel[i];
      ++n;
    }
  }
  if (n == 0) throw EmptySupportError("orthogonality: no interior support");
  r.value = sum / double(n);
  return r;
}

LossResult LossDepthConsistency(const DepthMap& depth_s,
                                const DepthMap& depth_t,
                                const Pose& pose_t_to_s, const Intrinsics& K,
                                const Mask& mask) {
  CheckSameSize(depth_s.width, depth_s.height, depth_t.width, depth_t.height,
                "depth consistency");
  CheckSameSize(mask.width, mask.height, depth_t.width, depth_t.height,
                "depth consistency");
  LossResult r;
  r.width = depth_t.width;
  r.height = depth_t.height;
  r.per_pixel.assign(size_t(r.width) * r.height, 0.0);
  r.support.assign(size_t(r.width) * r.height, 0);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const WarpResult w = ProjectWarp(K, pose_t_to_s, depth_t, Vec2(x, y));
      if (!w.in_bounds) continue;
      const Sample<double> ds = SampleBilinear(depth_s, w.pixel_s);
      if (!ds.valid) continue;
      const size_t i = depth_t.Index(x, y);
      r.per_pixel[i] = std::abs(ds.value - w.projected_depth) /
                       (ds.value + w.projected_depth);
      r.support[i] = 1;
    }
  }
  r.value = MaskedMean(r, mask, "depth consistency");
  return r;
}

namespace {

constexpr int kSsimRadius = 1;  // 3x3 window
constexpr double kSsimC2 = 0.03 * 0.03;

// Contrast-structure SSIM over a 3x3 window with clamped borders. The
// luminance term is dropped: endoscopic brightness varies with pose, and the
// L1 term already penalizes intensity offsets.
double SsimChannel(const ImageRGB& a, const ImageRGB& b, int x, int y, int c) {
  double sum_a = 0, sum_b = 0, sum_aa = 0, sum_bb = 0, sum_ab = 0;
  int n = 0;
  for (int dy = -kSsimRadius; dy <= kSsimRadius; ++dy) {
    for (int dx = -kSsimRadius; dx <= kSsimRadius; ++dx) {
      const int xx = std::clamp(x + dx, 0, a.width - 1);
      const int yy = std::clamp(y + dy, 0, a.height - 1);
      const double va = a.At(xx, yy)[c];
      const double vb = b.At(xx, yy)[c];
      sum_a += va;
      sum_b += vb;
      sum_aa += va * va;
      sum_bb += vb * vb;
      sum_ab += va * vb;
      ++n;
    }
  }
  const double mu_a = sum_a / n, mu_b = sum_b / n;
  const double var_a = sum_aa / n - mu_a * mu_a;
  const double var_b = sum_bb / n - mu_b * mu_b;
  const double cov = sum_ab / n - mu_a * mu_b;
  return (2.0 * cov + kSsimC2) / (var_a + var_b + kSsimC2);
}

}  // namespace

std::vector<double> PhotometricErrorMap(const ImageRGB& image_t,
                                        const ImageRGB& candidate) {
  CheckSameSize(image_t.width, image_t.height, candidate.width,
                candidate.height, "photometric error");
  std::vector<double> out(size_t(image_t.width) * image_t.height);
  for (int y = 0; y < image_t.height; ++y) {
    for (int x = 0; x < image_t.width; ++x) {
      double l1 = 0.0, ssim = 0.0;
      for (int c = 0; c < 3; ++c) {
        l1 += std::abs(image_t.At(x, y)[c] - candidate.At(x, y)[c]);
        ssim += SsimChannel(image_t, candidate, x, y, c);
      }
      l1 /= 3.0;
      ssim /= 3.0;
      const double dssim = std::clamp(0.5 * (1.0 - ssim), 0.0, 1.0);
      out[image_t.Index(x, y)] = 0.85 * dssim + 0.15 * l1;
    }
  }
  return out;
}

LossResult LossPhotometric(const ImageRGB& image_t,
                           const std::vector<ImageRGB>& warped_sources,
                           const Mask& mask) {
  if (warped_sources.empty()) {
    throw InvalidInputError("photometric loss: no warped sources");
  }
  CheckSameSize(mask.width, mask.height, image_t.width, image_t.height,
                "photometric loss");
  LossResult r;
  r.width = image_t.width;
  r.height = image_t.height;
  const size_t count = size_t(r.width) * r.height;
  r.per_pixel.assign(count, std::numeric_limits<double>::infinity());
  r.support.assign(count, 1);
  for (const ImageRGB& warped : warped_sources) {
    // Masked pixels (typically failed warps) take the target value so they
    // stay photometrically neutral inside neighboring SSIM windows.
    ImageRGB patched = warped;
    for (size_t i = 0; i < count; ++i) {
      if (mask.weights[i] <= 0.0) patched.pixels[i] = image_t.pixels[i];
    }
    const std::vector<double> err = PhotometricErrorMap(image_t, patched);
    for (size_t i = 0; i < count; ++i) {
      r.per_pixel[i] = std::min(r.per_pixel[i], err[i]);
    }
  }
  r.value = MaskedMean(r, mask, "photometric loss");
  return r;
}

double LossSmoothness(const DepthMap& depth, const ImageRGB& image) {
  CheckSameSize(depth.width, depth.height, image.width, image.height,
                "smoothness");
  double mean_depth = 0.0;
  size_t n_valid = 0;
  for (size_t i = 0; i < depth.values.size(); ++i) {
    if (depth.validity[i]) {
      mean_depth += depth.values[i];
      ++n_valid;
    }
  }
  if (n_valid == 0 || mean_depth <= 0.0) {
    throw EmptySupportError("smoothness: no valid depth");
  }
  mean_depth /= double(n_valid);

  double sum = 0.0;
  size_t n = 0;
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      if (!depth.IsValid(x, y)) continue;
      if (x + 1 < depth.width && depth.IsValid(x + 1, y)) {
        const double dd =
            std::abs(depth.At(x + 1, y) - depth.At(x, y)) / mean_depth;
        const double di =
            (image.At(x + 1, y) - image.At(x, y)).cwiseAbs().mean();
        sum += dd * std::exp(-di);
        ++n;
      }
      if (y + 1 < depth.height && depth.IsValid(x, y + 1)) {
        const double dd =
            std::abs(depth.At(x, y + 1) - depth.At(x, y)) / mean_depth;
        const double di =
            (image.At(x, y + 1) - image.At(x, y)).cwiseAbs().mean();
        sum += dd * std::exp(-di);
        ++n;
      }
    }
  }
  return n > 0 ? sum / double(n) : 0.0;
}

Mask ComputeMasks(const ImageRGB& image_t,
                  const std::vector<ImageRGB>& images_s,
                  const std::vector<ImageRGB>& warped_sources,
                  const Mask& projection_validity,
                  const MaskOptions& options) {
  const size_t count = size_t(image_t.width) * image_t.height;
  Mask out(image_t.width, image_t.height, 1.0);

  std::vector<double> min_warped(count,
                                 std::numeric_limits<double>::infinity());
  for (const ImageRGB& warped : warped_sources) {
    CheckSameSize(warped.width, warped.height, image_t.width, image_t.height,
                  "mask");
    // Keep failed-warp pixels photometrically neutral so they do not bleed
    // into the SSIM windows of their valid neighbors.
    ImageRGB patched = warped;
    if (projection_validity.weights.size() == count) {
      for (size_t i = 0; i < count; ++i) {
        if (projection_validity.weights[i] <= 0.0) {
          patched.pixels[i] = image_t.pixels[i];
        }
      }
    }
    const std::vector<double> err = PhotometricErrorMap(image_t, patched);
    for (size_t i = 0; i < count; ++i) {
      min_warped[i] = std::min(min_warped[i], err[i]);
    }
  }
  std::vector<double> min_identity(count,
                                   std::numeric_limits<double>::infinity());
  for (const ImageRGB& source : images_s) {
    CheckSameSize(source.width, source.height, image_t.width, image_t.height,
                  "mask");
    const std::vector<double> err = PhotometricErrorMap(image_t, source);
    for (size_t i = 0; i < count; ++i) {
      min_identity[i] = std::min(min_identity[i], err[i]);
    }
  }

  for (int y = 0; y < image_t.height; ++y) {
    for (int x = 0; x < image_t.width; ++x) {
      const size_t i = image_t.Index(x, y);
      double w = 1.0;
      if (options.auto_mask && !warped_sources.empty() && !images_s.empty() &&
          !(min_warped[i] < min_identity[i])) {
        w = 0.0;  // stationary pixel: warping does not beat the identity
      }
      if (projection_validity.weights.size() == count) {
        w = std::min(w, projection_validity.weights[i]);
      }
      if (Luminance(image_t.At(x, y)) > options.specular_threshold) {
        w = 0.0;
      }
      out.At(x, y) = w;
    }
  }
  return out;
}

LossReport LossInitTotal(const InitLossInputs& inputs,
                         const LossWeights& weights, Mask* mask_out) {
  weights.Validate();
  if (!inputs.image_t || !inputs.depth_t || !inputs.normals_t) {
    throw InvalidInputError("init loss: missing target inputs");
  }
  if (inputs.sources.empty()) {
    throw InvalidInputError("init loss: at least one source frame required");
  }
  const Intrinsics& K = inputs.intrinsics;
  const int w = inputs.image_t->width, h = inputs.image_t->height;
  const size_t count = size_t(w) * h;

  std::vector<ImageRGB> warped, originals;
  Mask validity(w, h, 0.0);
  for (const PairInputs& src : inputs.sources) {
    Mask pair_valid;
    warped.push_back(WarpImage(*src.image_s, *inputs.depth_t, src.pose_t_to_s,
                               K, &pair_valid));
    originals.push_back(*src.image_s);
    for (size_t i = 0; i < count; ++i) {
      validity.weights[i] = std::max(validity.weights[i],
                                     pair_valid.weights[i]);
    }
  }
  const Mask mask = ComputeMasks(*inputs.image_t, originals, warped, validity,
                                 inputs.mask_options);
  if (mask_out) *mask_out = mask;

  LossReport report;
  const LossResult photo = LossPhotometric(*inputs.image_t, warped, mask);
  report.photo = photo.value;
  report.pixel_count = 0;
  for (size_t i = 0; i < count; ++i) {
    if (mask.weights[i] > 0.0) ++report.pixel_count;
  }

  double norm_sum = 0.0, depth_sum = 0.0;
  for (const PairInputs& src : inputs.sources) {
    norm_sum += LossNormalConsistency(*src.normals_s, *inputs.normals_t,
                                      *inputs.depth_t, src.pose_t_to_s, K,
                                      mask)
                    .value;
    depth_sum += LossDepthConsistency(*src.depth_s, *inputs.depth_t,
                                      src.pose_t_to_s, K, mask)
                     .value;
  }
  report.norm = norm_sum / double(inputs.sources.size());
  report.depth = depth_sum / double(inputs.sources.size());

  report.orth =
      LossOrthogonality(*inputs.normals_t, *inputs.depth_t, K).value;
  report.smooth = LossSmoothness(*inputs.depth_t, *inputs.image_t);

  report.total = report.photo + weights.lambda1 * report.norm +
                 weights.lambda2 * report.depth + weights.lambda3 * report.orth +
                 weights.lambda4 * report.smooth;
  return report;
}

std::vector<double> NumericGradient(
    const std::function<double(const DepthMap&)>& loss_fn,
    const DepthMap& depth, double step) {
  if (!(step > 0.0)) {
    throw InvalidInputError("numeric gradient: step must be positive");
  }
  std::vector<double> grad(depth.values.size(), 0.0);
  DepthMap probe = depth;
  for (size_t i = 0; i < depth.values.size(); ++i) {
    if (!depth.validity[i]) continue;
    const double original = depth.values[i];
    probe.values[i] = original + step;
    const double plus = loss_fn(probe);
    probe.values[i] = original - step;
    const double minus = loss_fn(probe);
    probe.values[i] = original;
    grad[i] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

}  // namespace colrec
