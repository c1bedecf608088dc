#include "blp/nn/kernels.hpp"
#include "kernels_common.hpp"

namespace blp::kernels::serial {

void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y) {
  detail::check_affine(x, w, b.size());
  const std::size_t n = x.rows(), in = w.rows(), out = w.cols();
  if (y.rows() != n || y.cols() != out) y = Matrix(n, out);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < out; ++j) {
      double acc = b[j];
      for (std::size_t k = 0; k < in; ++k) acc += x(r, k) * w(k, j);
      y(r, j) = acc;
    }
}

void backprop_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  detail::check_backprop(dy, w);
  const std::size_t n = dy.rows(), in = w.rows(), out = w.cols();
  if (dx.rows() != n || dx.cols() != in) dx = Matrix(n, in);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < in; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < out; ++j) acc += dy(r, j) * w(k, j);
      dx(r, k) = acc;
    }
}

void accumulate_weight_grad(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db) {
  detail::check_weight_grad(x, dy, dw, db.size());
  const std::size_t n = x.rows(), in = x.cols(), out = dy.cols();
  for (std::size_t k = 0; k < in; ++k)
    for (std::size_t j = 0; j < out; ++j) {
      double acc = dw(k, j);
      for (std::size_t r = 0; r < n; ++r) acc += x(r, k) * dy(r, j);
      dw(k, j) = acc;
    }
  for (std::size_t j = 0; j < out; ++j) {
    double acc = db[j];
    for (std::size_t r = 0; r < n; ++r) acc += dy(r, j);
    db[j] = acc;
  }
}

}  // namespace blp::kernels::serial
