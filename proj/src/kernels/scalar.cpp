#include <cmath>

#include "mlpdyn/kernels.hpp"

namespace mlpdyn::kernels {
namespace {

void tanh_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
}

void forward_scalar(const double* v, const double* w, std::size_t m, const double* x, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) f += v[j] * std::tanh(w[j] * x[i]);
    out[i] = f;
  }
}

double loss_grad_scalar(const double* v, const double* w, std::size_t m, const double* x, const double* y,
                        std::size_t n, double* grad, double* scratch) {
  const std::size_t stride = padded(n);
  double* t = scratch;               // m rows of tanh(w_j x_i)
  double* r = scratch + m * stride;  // residuals

  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) t[j * stride + i] = std::tanh(w[j] * x[i]);
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) f += v[j] * t[j * stride + i];
    r[i] = f - y[i];
    sum_sq += r[i] * r[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    double gv = 0.0;
    double gw = 0.0;
    const double* tj = t + j * stride;
    for (std::size_t i = 0; i < n; ++i) {
      gv += tj[i] * r[i];
      gw += x[i] * (1.0 - tj[i] * tj[i]) * r[i];
    }
    grad[j] = gv;
    grad[m + j] = v[j] * gw;
  }
  return sum_sq;
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", &tanh_scalar, &forward_scalar, &loss_grad_scalar};
  return table;
}

}  // namespace mlpdyn::kernels
