#pragma once

#include "colrec/types.hpp"

namespace colrec {

/// Anti-aliased downscale by box averaging over the source footprint of each
/// destination pixel. Destination pixels whose footprint contains any invalid
/// source pixel stay invalid.
DepthMap ResizeDepthArea(const DepthMap& src, int out_width, int out_height);

/// Bilinear resize (used for upsampling between refinement iterations).
DepthMap ResizeDepthBilinear(const DepthMap& src, int out_width,
                             int out_height);

/// Bilinear resize with renormalization of the interpolated vectors.
NormalMap ResizeNormalsBilinear(const NormalMap& src, int out_width,
                                int out_height);

ImageRGB ResizeImageArea(const ImageRGB& src, int out_width, int out_height);
ImageRGB ResizeImageBilinear(const ImageRGB& src, int out_width,
                             int out_height);

Mask ResizeMaskArea(const Mask& src, int out_width, int out_height);

}  // namespace colrec
