#pragma once

#include "jpegrad/image.hpp"

namespace jpegrad {

/// Edge-replication pad to (new_h, new_w) >= current dims.
ImageTensor pad_replicate(const ImageTensor& x, int new_h, int new_w);
/// Adjoint: cotangents of replicated cells fold back into the edge pixels.
Cotangent pad_replicate_adjoint(const Cotangent& g, int orig_h, int orig_w);

ImageTensor crop(const ImageTensor& x, int row0, int col0, int h, int w);
/// Adjoint of crop: zero-embed at (row0, col0) inside (full_h, full_w).
Cotangent crop_adjoint(const Cotangent& g, int row0, int col0, int full_h, int full_w);

/// 2x2 average pooling; dims must be even.
ImageTensor avgpool2(const ImageTensor& x);
Cotangent avgpool2_adjoint(const Cotangent& g);

/// Bilinear resize with half-pixel centers and edge clamping. Linear in x,
/// so the adjoint is the exact transpose (weight scatter).
ImageTensor bilinear_resize(const ImageTensor& x, int out_h, int out_w);
Cotangent bilinear_resize_adjoint(const Cotangent& g, int in_h, int in_w);

}  // namespace jpegrad
