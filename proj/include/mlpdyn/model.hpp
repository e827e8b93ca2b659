#pragma once

// Bias-free, scalar-in/scalar-out tanh network
//
//   f(x; theta) = sum_i v_i * tanh(w_i * x)
//
// together with the teacher functions and the finite symmetry group
// (per-neuron sign flips and neuron permutations) that leaves f invariant.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlpdyn {

struct NetworkShape {
  std::size_t m = 2;  // hidden neurons

  explicit NetworkShape(std::size_t hidden);
  std::size_t dim() const { return 2 * m; }
};

// theta = (v, w). Flat coordinate order everywhere is [v_1..v_m, w_1..w_m].
class Param {
 public:
  // Throws ValidationError on length mismatch, m == 0 or non-finite entries.
  Param(std::vector<double> v, std::vector<double> w);

  static Param zeros(std::size_t m);
  static Param from_flat(std::span<const double> flat);

  std::size_t m() const { return v_.size(); }
  NetworkShape shape() const { return NetworkShape(m()); }

  std::span<const double> v() const { return v_; }
  std::span<const double> w() const { return w_; }
  double v(std::size_t i) const { return v_[i]; }
  double w(std::size_t i) const { return w_[i]; }

  std::vector<double> flat() const;
  double norm() const;

  bool operator==(const Param&) const = default;

 private:
  std::vector<double> v_;
  std::vector<double> w_;
};

double forward(const Param& param, double x);

enum class Teacher {
  two_tanh,        // T(x) = 2 tanh(x)
  fukumizu_amari,  // T(x) = 2 tanh(x) - tanh(4x)
};

double teacher_value(Teacher teacher, double x);
std::string_view teacher_id(Teacher teacher);
Teacher teacher_from_id(std::string_view id);  // throws ValidationError

// The reference teacher 2 tanh(x).
inline double target(double x) { return teacher_value(Teacher::two_tanh, x); }

// One element of the symmetry group: neuron i of g.theta is neuron perm[i]
// of theta, negated (both v and w) when flip[i] is set.
struct SymmetryElement {
  std::vector<std::size_t> perm;
  std::vector<bool> flip;

  Param apply(const Param& param) const;
  std::vector<double> apply_flat(std::span<const double> flat) const;
};

// All 2^m * m! elements. Throws ValidationError for m > 6.
std::vector<SymmetryElement> symmetry_group(std::size_t m);

// Orbit representative: every neuron flipped so that w_i > 0 (or v_i >= 0
// when w_i == 0), then neurons sorted lexicographically by (w_i, v_i).
Param canonicalize(const Param& param);

// Quotient distance min_g ||a - g.b||. Exact (full enumeration) for m <= 3;
// for larger m the canonical forms are compared, which is an upper bound.
double orbit_distance(const Param& a, const Param& b);

inline constexpr std::size_t kExactOrbitMaxM = 3;

// True iff two distinct neurons have ||(v_i, w_i) - (v_j, w_j)|| <= tol.
bool is_synchronized(const Param& param, double tol);

}  // namespace mlpdyn
