#pragma once

#include <array>

#include "jpegrad/diffop.hpp"
#include "jpegrad/image.hpp"

namespace jpegrad {

/// Orthonormal 8-point DCT-II basis, row k = basis vector k.
const std::array<float, 64>& dct_basis();

/// Orthonormal 2D DCT-II applied independently per 8x8 block of a
/// single-channel plane (F = D b D^T). Dims must be multiples of 8.
ImageTensor block_dct(const ImageTensor& plane);

/// Inverse (= adjoint, the basis is orthonormal): b = D^T F D.
ImageTensor block_idct(const ImageTensor& coefs);

class BlockDctOp : public DiffOp {
public:
    std::string name() const override { return "block_dct"; }
    ImageTensor forward(const ImageTensor& x) override { return block_dct(x); }
    Cotangent vjp(const Cotangent& g) const override { return block_idct(g); }
};

class BlockIdctOp : public DiffOp {
public:
    std::string name() const override { return "block_idct"; }
    ImageTensor forward(const ImageTensor& x) override { return block_idct(x); }
    Cotangent vjp(const Cotangent& g) const override { return block_dct(g); }
};

}  // namespace jpegrad
