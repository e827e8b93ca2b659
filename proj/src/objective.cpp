#include "mlpdyn/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "mlpdyn/error.hpp"

namespace mlpdyn {

std::vector<double> GradVector::flat() const {
  std::vector<double> out(dv);
  out.insert(out.end(), dw.begin(), dw.end());
  return out;
}

double GradVector::norm() const { return norm2(flat()); }

double residual(double x, double y, const Param& param) { return forward(param, x) - y; }

namespace {

void require_nonempty(const Dataset& dataset) {
  if (dataset.n() == 0) throw ValidationError("objective: empty dataset");
  if (dataset.x.size() != dataset.y.size()) throw ValidationError("objective: x and y lengths differ");
}

}  // namespace

LossAndGradient loss_and_gradient(const Param& param, const Dataset& dataset, const kernels::KernelTable& k) {
  require_nonempty(dataset);
  const std::size_t m = param.m();
  const std::size_t n = dataset.n();
  std::vector<double> scratch(kernels::scratch_size(m, n));
  std::vector<double> grad(2 * m);
  const double sum_sq = k.loss_grad(param.v().data(), param.w().data(), m, dataset.x.data(), dataset.y.data(), n,
                                    grad.data(), scratch.data());
  LossAndGradient out;
  out.loss = 0.5 * sum_sq / static_cast<double>(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  out.grad.dv.resize(m);
  out.grad.dw.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.grad.dv[j] = grad[j] * inv_n;
    out.grad.dw[j] = grad[m + j] * inv_n;
  }
  return out;
}

double training_loss(const Param& param, const Dataset& dataset, const kernels::KernelTable& k) {
  require_nonempty(dataset);
  std::vector<double> f(dataset.n());
  k.forward(param.v().data(), param.w().data(), param.m(), dataset.x.data(), f.data(), dataset.n());
  double s = 0.0;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    const double r = f[i] - dataset.y[i];
    s += r * r;
  }
  return 0.5 * s / static_cast<double>(dataset.n());
}

GradVector gradient(const Param& param, const Dataset& dataset, const kernels::KernelTable& k) {
  return loss_and_gradient(param, dataset, k).grad;
}

HessianMatrix hessian(const Param& param, const Dataset& dataset) {
  require_nonempty(dataset);
  const std::size_t m = param.m();
  const std::size_t n = dataset.n();
  HessianMatrix h(2 * m, 2 * m);
  std::vector<double> t(m), s(m), df(2 * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = dataset.x[i];
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      t[j] = std::tanh(param.w(j) * x);
      s[j] = 1.0 - t[j] * t[j];
      f += param.v(j) * t[j];
    }
    const double r = f - dataset.y[i];
    for (std::size_t j = 0; j < m; ++j) {
      df[j] = t[j];
      df[m + j] = param.v(j) * x * s[j];
    }
    // Gauss-Newton part.
    for (std::size_t a = 0; a < 2 * m; ++a)
      for (std::size_t b = a; b < 2 * m; ++b) h(a, b) += df[a] * df[b];
    // Residual-weighted second derivatives of f; only (v_j, w_j) and (w_j, w_j).
    for (std::size_t j = 0; j < m; ++j) {
      h(j, m + j) += r * x * s[j];
      h(m + j, m + j) += r * param.v(j) * x * x * (-2.0 * s[j] * t[j]);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t a = 0; a < 2 * m; ++a)
    for (std::size_t b = a; b < 2 * m; ++b) {
      h(a, b) *= inv_n;
      h(b, a) = h(a, b);
    }
  return h;
}

Matrix output_jacobian(const Param& param, std::span<const double> xs) {
  const std::size_t m = param.m();
  Matrix j(xs.size(), 2 * m);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      const double t = std::tanh(param.w(c) * xs[i]);
      j(i, c) = t;
      j(i, m + c) = param.v(c) * xs[i] * (1.0 - t * t);
    }
  }
  return j;
}

QuadratureRule normal_panel_rule(double half_width, std::size_t panels) {
  if (!(half_width > 0.0) || panels < 1) throw ValidationError("normal_panel_rule: need half_width > 0, panels >= 1");
  using GL = boost::math::quadrature::gauss<double, 8>;
  const auto& abs = GL::abscissa();
  const auto& wts = GL::weights();
  const double h = 2.0 * half_width / static_cast<double>(panels);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  QuadratureRule rule;
  rule.nodes.reserve(8 * panels);
  rule.weights.reserve(8 * panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = -half_width + (static_cast<double>(p) + 0.5) * h;
    // abscissa() holds the 4 non-negative points of the symmetric rule
    for (int side : {-1, 1}) {
      for (std::size_t k = 0; k < abs.size(); ++k) {
        const std::size_t kk = side < 0 ? abs.size() - 1 - k : k;
        const double x = mid + side * 0.5 * h * abs[kk];
        rule.nodes.push_back(x);
        rule.weights.push_back(0.5 * h * wts[kk] * norm * std::exp(-0.5 * x * x));
      }
    }
  }
  return rule;
}

QuadratureRule make_rule(std::string_view method, std::size_t order) {
  if (method == "panel") return normal_panel_rule();
  if (method == "hermite") return gauss_hermite_rule(order);
  throw ValidationError("unknown quadrature '" + std::string(method) + "' (expected panel or hermite)");
}

QuadratureRule gauss_hermite_rule(std::size_t order) {
  if (order < 1 || order > kMaxQuadratureOrder) {
    throw ValidationError("gauss_hermite_rule: order must be in [1, 256]");
  }
  // Nodes are the eigenvalues of the Jacobi matrix of the orthonormal
  // probabilists' Hermite recurrence (zero diagonal, off-diagonal sqrt(j)).
  // Each one is isolated by Sturm-count bisection, then polished by Newton on
  // p_K; weights are 1 / sum_j p_j(x)^2.
  const std::size_t n = order;
  auto count_below = [n](double x) {
    std::size_t neg = 0;
    double q = -x;
    if (q < 0.0) ++neg;
    for (std::size_t i = 1; i < n; ++i) {
      if (q == 0.0) q = 1e-300;
      q = -x - static_cast<double>(i) / q;
      if (q < 0.0) ++neg;
    }
    return neg;
  };
  // p_{K-1}(x), p_K(x) and sum_{j<K} p_j(x)^2 for the orthonormal family.
  struct Eval {
    double prev, last, sum_sq;
  };
  auto evaluate = [n](double x) {
    double p_prev = 0.0, p = 1.0, sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += p * p;
      const double next = (x * p - std::sqrt(static_cast<double>(j)) * p_prev) / std::sqrt(static_cast<double>(j + 1));
      p_prev = p;
      p = next;
    }
    return Eval{p_prev, p, sum};
  };

  // Gershgorin bound on the spectrum.
  const double bound = 2.0 * std::sqrt(static_cast<double>(n)) + 1.0;
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = n / 2;
  for (std::size_t k = n - half; k < n; ++k) {
    // k-th smallest eigenvalue lies where count_below jumps from k to k + 1.
    double lo = 0.0, hi = bound;
    for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (count_below(mid) > k ? hi : lo) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
      const auto e = evaluate(x);
      const double step = e.last / (std::sqrt(static_cast<double>(n)) * e.prev);
      if (!std::isfinite(step) || std::abs(step) > hi - lo + 1e-12) break;
      x -= step;
    }
    const double w = 1.0 / evaluate(x).sum_sq;
    if (!std::isfinite(x) || !(w > 0.0)) throw ConvergenceError("gauss_hermite_rule: node solver failed");
    rule.nodes[k] = x;
    rule.weights[k] = w;
    rule.nodes[n - 1 - k] = -x;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[half] = 0.0;
    rule.weights[half] = 1.0 / evaluate(0.0).sum_sq;
  }
  return rule;
}

double generalization_error(const Param& param, const QuadratureRule& rule, Teacher teacher,
                            const kernels::KernelTable& k) {
  if (rule.order() == 0 || rule.nodes.size() != rule.weights.size()) {
    throw ValidationError("generalization_error: invalid quadrature rule");
  }
  std::vector<double> f(rule.order());
  k.forward(param.v().data(), param.w().data(), param.m(), rule.nodes.data(), f.data(), rule.order());
  double s = 0.0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    const double d = f[i] - teacher_value(teacher, rule.nodes[i]);
    s += rule.weights[i] * d * d;
  }
  return s;
}

}  // namespace mlpdyn
