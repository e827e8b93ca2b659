#pragma once

// Training error L = (1/2n) sum_i (f(x_i) - y_i)^2, its analytic gradient and
// Hessian, and the generalization error R = E_{x~N(0,1)} (f(x) - T(x))^2
// evaluated with Gauss-Hermite quadrature.

#include <cstddef>
#include <string_view>
#include <vector>

#include "mlpdyn/data.hpp"
#include "mlpdyn/kernels.hpp"
#include "mlpdyn/model.hpp"
#include "mlpdyn/numerics.hpp"

namespace mlpdyn {

struct GradVector {
  std::vector<double> dv;
  std::vector<double> dw;

  std::vector<double> flat() const;
  double norm() const;
};

struct LossAndGradient {
  double loss = 0.0;
  GradVector grad;
};

// Signed residual f(x; theta) - y.
double residual(double x, double y, const Param& param);

// All of these throw ValidationError on an empty dataset.
double training_loss(const Param& param, const Dataset& dataset,
                     const kernels::KernelTable& k = kernels::best());
GradVector gradient(const Param& param, const Dataset& dataset, const kernels::KernelTable& k = kernels::best());
LossAndGradient loss_and_gradient(const Param& param, const Dataset& dataset,
                                  const kernels::KernelTable& k = kernels::best());

// Closed-form second derivatives in the order [v_1..v_m, w_1..w_m].
HessianMatrix hessian(const Param& param, const Dataset& dataset);

// n x 2m Jacobian of theta -> (f(x_1), ..., f(x_n)): columns tanh(w_j x_i)
// followed by v_j x_i sech^2(w_j x_i).
Matrix output_jacobian(const Param& param, std::span<const double> xs);

// Probabilists' Gauss-Hermite rule: sum_k weights[k] g(nodes[k]) approximates
// E[g(X)], X ~ N(0, 1); exact for polynomials of degree <= 2K - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const { return nodes.size(); }
};

inline constexpr std::size_t kDefaultQuadratureOrder = 64;
inline constexpr std::size_t kMaxQuadratureOrder = 256;

QuadratureRule gauss_hermite_rule(std::size_t order);

// Composite 8-point Gauss-Legendre on `panels` equal panels of
// [-half_width, half_width], standard normal density folded into the
// weights. Gauss-Hermite converges slowly once |w| grows past ~1.5 (the
// poles of tanh(w x) approach the real axis); this rule stays at round-off
// level for |w| up to about 50.
QuadratureRule normal_panel_rule(double half_width = 10.0, std::size_t panels = 1000);

// "panel" -> normal_panel_rule(), "hermite" -> gauss_hermite_rule(order).
QuadratureRule make_rule(std::string_view method, std::size_t order);

double generalization_error(const Param& param, const QuadratureRule& rule, Teacher teacher = Teacher::two_tanh,
                            const kernels::KernelTable& k = kernels::best());

}  // namespace mlpdyn
