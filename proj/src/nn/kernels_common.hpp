#pragma once

#include <string>

#include "blp/nn/matrix.hpp"

namespace blp::kernels::detail {

inline void check_affine(const Matrix& x, const Matrix& w, std::size_t nb) {
  if (x.cols() != w.rows() || nb != w.cols())
    throw ShapeError("affine_forward: x is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", w is " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + ", b has " + std::to_string(nb));
}

inline void check_backprop(const Matrix& dy, const Matrix& w) {
  if (dy.cols() != w.cols())
    throw ShapeError("backprop_input: dy width " + std::to_string(dy.cols()) +
                     " != layer output " + std::to_string(w.cols()));
}

inline void check_weight_grad(const Matrix& x, const Matrix& dy, const Matrix& dw,
                              std::size_t nb) {
  if (x.rows() != dy.rows() || dw.rows() != x.cols() || dw.cols() != dy.cols() ||
      nb != dy.cols())
    throw ShapeError("accumulate_weight_grad: inconsistent shapes");
}

}  // namespace blp::kernels::detail
