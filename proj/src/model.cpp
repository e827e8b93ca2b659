#include "mlpdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "mlpdyn/error.hpp"

namespace mlpdyn {

NetworkShape::NetworkShape(std::size_t hidden) : m(hidden) {
  if (hidden == 0) throw ValidationError("network needs at least one hidden neuron");
}

Param::Param(std::vector<double> v, std::vector<double> w) : v_(std::move(v)), w_(std::move(w)) {
  if (v_.size() != w_.size()) {
    throw ValidationError("param: v has " + std::to_string(v_.size()) + " entries but w has " +
                          std::to_string(w_.size()));
  }
  if (v_.empty()) throw ValidationError("param: m must be >= 1");
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i]) || !std::isfinite(w_[i])) {
      throw ValidationError("param: non-finite entry at neuron " + std::to_string(i + 1));
    }
  }
}

Param Param::zeros(std::size_t m) {
  return Param(std::vector<double>(m, 0.0), std::vector<double>(m, 0.0));
}

Param Param::from_flat(std::span<const double> flat) {
  if (flat.size() % 2 != 0) throw ValidationError("param: flat vector must have even length");
  const std::size_t m = flat.size() / 2;
  return Param(std::vector<double>(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(m)),
               std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(m), flat.end()));
}

std::vector<double> Param::flat() const {
  std::vector<double> out(v_);
  out.insert(out.end(), w_.begin(), w_.end());
  return out;
}

double Param::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) s += v_[i] * v_[i] + w_[i] * w_[i];
  return std::sqrt(s);
}

double forward(const Param& param, double x) {
  double f = 0.0;
  for (std::size_t i = 0; i < param.m(); ++i) f += param.v(i) * std::tanh(param.w(i) * x);
  return f;
}

double teacher_value(Teacher teacher, double x) {
  switch (teacher) {
    case Teacher::two_tanh:
      return 2.0 * std::tanh(x);
    case Teacher::fukumizu_amari:
      return 2.0 * std::tanh(x) - std::tanh(4.0 * x);
  }
  return 0.0;
}

std::string_view teacher_id(Teacher teacher) {
  switch (teacher) {
    case Teacher::two_tanh:
      return "2tanh";
    case Teacher::fukumizu_amari:
      return "2tanh-tanh4";
  }
  return "";
}

Teacher teacher_from_id(std::string_view id) {
  if (id == "2tanh") return Teacher::two_tanh;
  if (id == "2tanh-tanh4") return Teacher::fukumizu_amari;
  throw ValidationError("unknown teacher id '" + std::string(id) + "'");
}

Param SymmetryElement::apply(const Param& param) const {
  const std::size_t m = param.m();
  std::vector<double> v(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = flip[i] ? -1.0 : 1.0;
    v[i] = s * param.v(perm[i]);
    w[i] = s * param.w(perm[i]);
  }
  return Param(std::move(v), std::move(w));
}

std::vector<double> SymmetryElement::apply_flat(std::span<const double> flat) const {
  const std::size_t m = perm.size();
  std::vector<double> out(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = flip[i] ? -1.0 : 1.0;
    out[i] = s * flat[perm[i]];
    out[m + i] = s * flat[m + perm[i]];
  }
  return out;
}

std::vector<SymmetryElement> symmetry_group(std::size_t m) {
  if (m == 0 || m > 6) throw ValidationError("symmetry_group: m must be in [1, 6]");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<SymmetryElement> group;
  do {
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      SymmetryElement g{perm, std::vector<bool>(m)};
      for (std::size_t i = 0; i < m; ++i) g.flip[i] = ((mask >> i) & 1U) != 0;
      group.push_back(std::move(g));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return group;
}

Param canonicalize(const Param& param) {
  std::vector<std::pair<double, double>> neurons;  // (w, v)
  neurons.reserve(param.m());
  for (std::size_t i = 0; i < param.m(); ++i) {
    double v = param.v(i);
    double w = param.w(i);
    if (w < 0.0 || (w == 0.0 && v < 0.0)) {
      v = -v;
      w = -w;
    }
    // +0.0 in place of -0.0 so equal orbits give bit-identical representatives.
    neurons.emplace_back(w + 0.0, v + 0.0);
  }
  std::sort(neurons.begin(), neurons.end());
  std::vector<double> v, w;
  for (const auto& [wi, vi] : neurons) {
    v.push_back(vi);
    w.push_back(wi);
  }
  return Param(std::move(v), std::move(w));
}

namespace {

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

double orbit_distance(const Param& a, const Param& b) {
  if (a.m() != b.m()) throw ValidationError("orbit_distance: shape mismatch");
  if (a.m() > kExactOrbitMaxM) return euclid(canonicalize(a).flat(), canonicalize(b).flat());
  const auto fa = a.flat();
  const auto fb = b.flat();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : symmetry_group(a.m())) best = std::min(best, euclid(fa, g.apply_flat(fb)));
  return best;
}

bool is_synchronized(const Param& param, double tol) {
  if (tol < 0.0) throw ValidationError("is_synchronized: tol must be >= 0");
  for (std::size_t i = 0; i < param.m(); ++i) {
    for (std::size_t j = i + 1; j < param.m(); ++j) {
      if (std::hypot(param.v(i) - param.v(j), param.w(i) - param.w(j)) <= tol) return true;
    }
  }
  return false;
}

}  // namespace mlpdyn
