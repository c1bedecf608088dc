#include <cstdint>
#include <vector>

#include "blp/nn/kernels.hpp"
#include "kernels_common.hpp"

namespace blp::kernels::omp {

namespace {
bool worth_parallel(std::size_t a, std::size_t b, std::size_t c) {
  return a * b * c >= kParallelWorkThreshold;
}
}  // namespace

void affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y) {
  detail::check_affine(x, w, b.size());
  const std::int64_t n = static_cast<std::int64_t>(x.rows());
  const std::size_t in = w.rows(), out = w.cols();
  if (y.rows() != x.rows() || y.cols() != out) y = Matrix(x.rows(), out);
  const double* xd = x.data();
  const double* wd = w.data();
  double* yd = y.data();
#pragma omp parallel for schedule(static) if (worth_parallel(x.rows(), in, out))
  for (std::int64_t r = 0; r < n; ++r) {
    double* yr = yd + r * out;
    const double* xr = xd + r * in;
    for (std::size_t j = 0; j < out; ++j) yr[j] = b[j];
    // Unrolled terms stay left-associative, so the per-element order is k ascending.
    std::size_t k = 0;
    for (; k + 4 <= in; k += 4) {
      const double x0 = xr[k], x1 = xr[k + 1], x2 = xr[k + 2], x3 = xr[k + 3];
      const double* w0 = wd + k * out;
      const double* w1 = w0 + out;
      const double* w2 = w1 + out;
      const double* w3 = w2 + out;
      for (std::size_t j = 0; j < out; ++j)
        yr[j] = yr[j] + x0 * w0[j] + x1 * w1[j] + x2 * w2[j] + x3 * w3[j];
    }
    for (; k < in; ++k) {
      const double xv = xr[k];
      const double* wk = wd + k * out;
      for (std::size_t j = 0; j < out; ++j) yr[j] += xv * wk[j];
    }
  }
}

void backprop_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  detail::check_backprop(dy, w);
  const std::int64_t n = static_cast<std::int64_t>(dy.rows());
  const std::size_t in = w.rows(), out = w.cols();
  if (dx.rows() != dy.rows() || dx.cols() != in) dx = Matrix(dy.rows(), in);
  // w^T so the inner loop runs over contiguous memory
  std::vector<double> wt(in * out);
  for (std::size_t k = 0; k < in; ++k)
    for (std::size_t j = 0; j < out; ++j) wt[j * in + k] = w(k, j);
  const double* dyd = dy.data();
  double* dxd = dx.data();
#pragma omp parallel for schedule(static) if (worth_parallel(dy.rows(), in, out))
  for (std::int64_t r = 0; r < n; ++r) {
    double* dxr = dxd + r * in;
    const double* dyr = dyd + r * out;
    for (std::size_t k = 0; k < in; ++k) dxr[k] = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= out; j += 4) {
      const double g0 = dyr[j], g1 = dyr[j + 1], g2 = dyr[j + 2], g3 = dyr[j + 3];
      const double* w0 = wt.data() + j * in;
      const double* w1 = w0 + in;
      const double* w2 = w1 + in;
      const double* w3 = w2 + in;
      for (std::size_t k = 0; k < in; ++k)
        dxr[k] = dxr[k] + g0 * w0[k] + g1 * w1[k] + g2 * w2[k] + g3 * w3[k];
    }
    for (; j < out; ++j) {
      const double g = dyr[j];
      const double* wj = wt.data() + j * in;
      for (std::size_t k = 0; k < in; ++k) dxr[k] += g * wj[k];
    }
  }
}

void accumulate_weight_grad(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db) {
  detail::check_weight_grad(x, dy, dw, db.size());
  const std::size_t n = x.rows(), out = dy.cols();
  const std::int64_t in = static_cast<std::int64_t>(x.cols());
  const double* xd = x.data();
  const double* dyd = dy.data();
  double* dwd = dw.data();
#pragma omp parallel for schedule(static) if (worth_parallel(n, x.cols(), out))
  for (std::int64_t k = 0; k < in; ++k) {
    double* dwk = dwd + k * out;
    const std::size_t ld = x.cols();
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
      const double x0 = xd[r * ld + k], x1 = xd[(r + 1) * ld + k];
      const double x2 = xd[(r + 2) * ld + k], x3 = xd[(r + 3) * ld + k];
      const double* d0 = dyd + r * out;
      const double* d1 = d0 + out;
      const double* d2 = d1 + out;
      const double* d3 = d2 + out;
      for (std::size_t j = 0; j < out; ++j)
        dwk[j] = dwk[j] + x0 * d0[j] + x1 * d1[j] + x2 * d2[j] + x3 * d3[j];
    }
    for (; r < n; ++r) {
      const double xv = xd[r * ld + k];
      const double* dyr = dyd + r * out;
      for (std::size_t j = 0; j < out; ++j) dwk[j] += xv * dyr[j];
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    const double* dyr = dyd + r * out;
    for (std::size_t j = 0; j < out; ++j) db[j] += dyr[j];
  }
}

}  // namespace blp::kernels::omp
