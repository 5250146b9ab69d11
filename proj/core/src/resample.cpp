#include "colrec/resample.hpp"

#include <algorithm>
#include <cmath>

namespace colrec {

namespace {

struct Footprint {
  int lo;
  int hi;               // exclusive
  double w_lo, w_hi;    // fractional coverage of the boundary cells
};

// Source interval covered by destination cell i under uniform rescaling.
Footprint CellFootprint(int i, int src_size, int dst_size) {
  const double scale = double(src_size) / dst_size;
  const double a = i * scale;
  const double b = (i + 1) * scale;
  Footprint f;
  f.lo = std::clamp(int(std::floor(a)), 0, src_size - 1);
  f.hi = std::clamp(int(std::ceil(b)), 1, src_size);
  f.w_lo = std::min(double(f.lo + 1), b) - a;
  f.w_hi = b - std::max(double(f.hi - 1), a);
  return f;
}

double CellWeight(const Footprint& f, int s) {
  if (f.hi - f.lo == 1) return f.w_lo + f.w_hi - (f.hi - f.lo);  // degenerate
  if (s == f.lo) return f.w_lo;
  if (s == f.hi - 1) return f.w_hi;
  return 1.0;
}

template <typename Src, typename Acc, typename GetFn, typename ValidFn>
void AreaAccumulate(const Src& src, int ox, int oy, int out_w, int out_h,
                    GetFn get, ValidFn is_valid, Acc& acc, double& weight,
                    bool& all_valid) {
  const Footprint fx = CellFootprint(ox, src.width, out_w);
  const Footprint fy = CellFootprint(oy, src.height, out_h);
  for (int sy = fy.lo; sy < fy.hi; ++sy) {
    const double wy = CellWeight(fy, sy);
    for (int sx = fx.lo; sx < fx.hi; ++sx) {
      const double w = wy * CellWeight(fx, sx);
      if (w <= 0.0) continue;
      if (!is_valid(sx, sy)) {
        all_valid = false;
        continue;
      }
      acc += w * get(sx, sy);
      weight += w;
    }
  }
}

}  // namespace

DepthMap ResizeDepthArea(const DepthMap& src, int out_width, int out_height) {
  if (out_width <= 0 || out_height <= 0) {
    throw InvalidInputError("resize: output size must be positive");
  }
  DepthMap out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0, weight = 0.0;
      bool all_valid = true;
      AreaAccumulate(
          src, x, y, out_width, out_height,
          [&](int sx, int sy) { return src.At(sx, sy); },
          [&](int sx, int sy) { return src.IsValid(sx, sy); }, acc, weight,
          all_valid);
      if (all_valid && weight > 0.0) out.Set(x, y, acc / weight);
    }
  }
  return out;
}

DepthMap ResizeDepthBilinear(const DepthMap& src, int out_width,
                             int out_height) {
  if (out_width <= 0 || out_height <= 0) {
    throw InvalidInputError("resize: output size must be positive");
  }
  DepthMap out(out_width, out_height);
  const double sx = double(src.width) / out_width;
  const double sy = double(src.height) / out_height;
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const double u = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                  double(src.width - 1));
      const double v = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                  double(src.height - 1));
      const int x0 = int(u), y0 = int(v);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const int y1 = std::min(y0 + 1, src.height - 1);
      if (!src.IsValid(x0, y0) || !src.IsValid(x1, y0) ||
          !src.IsValid(x0, y1) || !src.IsValid(x1, y1)) {
        continue;
      }
      const double fx = u - x0, fy = v - y0;
      const double val = (1 - fy) * ((1 - fx) * src.At(x0, y0) +
                                     fx * src.At(x1, y0)) +
                         fy * ((1 - fx) * src.At(x0, y1) +
                               fx * src.At(x1, y1));
      out.Set(x, y, val);
    }
  }
  return out;
}

NormalMap ResizeNormalsBilinear(const NormalMap& src, int out_width,
                                int out_height) {
  if (out_width <= 0 || out_height <= 0) {
    throw InvalidInputError("resize: output size must be positive");
  }
  NormalMap out(out_width, out_height);
  const double sx = double(src.width) / out_width;
  const double sy = double(src.height) / out_height;
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const double u = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                  double(src.width - 1));
      const double v = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                  double(src.height - 1));
      const int x0 = int(u), y0 = int(v);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const int y1 = std::min(y0 + 1, src.height - 1);
      if (!src.IsValid(x0, y0) || !src.IsValid(x1, y0) ||
          !src.IsValid(x0, y1) || !src.IsValid(x1, y1)) {
        out.validity[out.Index(x, y)] = 0;
        continue;
      }
      const double fx = u - x0, fy = v - y0;
      Vec3 n = (1 - fy) * ((1 - fx) * src.At(x0, y0) + fx * src.At(x1, y0)) +
               fy * ((1 - fx) * src.At(x0, y1) + fx * src.At(x1, y1));
      const double len = n.norm();
      if (len < 1e-12) {
        out.validity[out.Index(x, y)] = 0;
        continue;
      }
      out.At(x, y) = n / len;
    }
  }
  return out;
}

ImageRGB ResizeImageArea(const ImageRGB& src, int out_width, int out_height) {
  if (out_width <= 0 || out_height <= 0) {
    throw InvalidInputError("resize: output size must be positive");
  }
  ImageRGB out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      Vec3 acc = Vec3::Zero();
      double weight = 0.0;
      bool all_valid = true;
      AreaAccumulate(
          src, x, y, out_width, out_height,
          [&](int sx, int sy) { return src.At(sx, sy); },
          [&](int, int) { return true; }, acc, weight, all_valid);
      if (weight > 0.0) out.At(x, y) = acc / weight;
    }
  }
  return out;
}

ImageRGB ResizeImageBilinear(const ImageRGB& src, int out_width,
                             int out_height) {
  if (out_width <= 0 || out_height <= 0) {
    throw InvalidInputError("resize: output size must be positive");
  }
  ImageRGB out(out_width, out_height);
  const double sx = double(src.width) / out_width;
  const double sy = double(src.height) / out_height;
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const double u = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                  double(src.width - 1));
      const double v = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                  double(src.height - 1));
      const int x0 = int(u), y0 = int(v);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const double fx = u - x0, fy = v - y0;
      out.At(x, y) =
          (1 - fy) * ((1 - fx) * src.At(x0, y0) + fx * src.At(x1, y0)) +
          fy * ((1 - fx) * src.At(x0, y1) + fx * src.At(x1, y1));
    }
  }
  return out;
}

Mask ResizeMaskArea(const Mask& src, int out_width, int out_height) {
  if (out_width <= 0 || out_height <= 0) {
    throw InvalidInputError("resize: output size must be positive");
  }
  Mask out(out_width, out_height, 0.0);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0, weight = 0.0;
      bool all_valid = true;
      AreaAccumulate(
          src, x, y, out_width, out_height,
          [&](int sx, int sy) { return src.At(sx, sy); },
          [&](int, int) { return true; }, acc, weight, all_valid);
      if (weight > 0.0) out.At(x, y) = acc / weight;
    }
  }
  return out;
}

}  // namespace colrec
