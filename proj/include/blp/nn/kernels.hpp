#pragma once

#include <span>

#include "blp/nn/matrix.hpp"

// Dense-layer kernels. Two implementations exist for every kernel:
//
//   serial::  straightforward loops, used as the reference in tests
//   omp::     cache-friendly loops parallelised over independent output rows
//
// Both accumulate every output element in the same order (ascending over the
// reduced index, starting from the same initial value) and the project builds
// with -ffp-contract=off, so the two are bit-identical for any thread count.
// The unqualified functions in blp::kernels dispatch to omp::.
namespace blp::kernels {

namespace serial {
// y = x * w + b        x: n x in, w: in x out, b: out
void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y);
// dx = dy * w^T        dy: n x out, w: in x out
void backprop_input(const Matrix& dy, const Matrix& w, Matrix& dx);
// dw += x^T * dy,  db += column sums of dy
void accumulate_weight_grad(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db);
}  // namespace serial

namespace omp {
void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y);
void backprop_input(const Matrix& dy, const Matrix& w, Matrix& dx);
void accumulate_weight_grad(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db);
}  // namespace omp

inline void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y) {
  omp::affine_forward(x, w, b, y);
}
inline void backprop_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  omp::backprop_input(dy, w, dx);
}
inline void accumulate_weight_grad(const Matrix& x, const Matrix& dy, Matrix& dw,
                                   std::span<double> db) {
  omp::accumulate_weight_grad(x, dy, dw, db);
}

// Minimum multiply-add count before the omp kernels open a parallel region.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 17;

}  // namespace blp::kernels
