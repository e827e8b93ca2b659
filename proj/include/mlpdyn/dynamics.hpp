#pragma once

// Full-batch gradient descent theta(t+1) = theta(t) - eta * grad L(theta(t))
// with log-spaced recording and a per-step descent monitor.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlpdyn/data.hpp"
#include "mlpdyn/kernels.hpp"
#include "mlpdyn/model.hpp"

namespace mlpdyn {

struct GDConfig {
  double eta = 0.05;
  std::uint64_t max_iter = 2'000'000;
  // Geometric recording schedule; ignored when log_schedule is non-empty.
  double log_ratio = 1.05;
  std::size_t max_records = 5000;
  std::vector<std::uint64_t> log_schedule;
  double grad_tol = 0.0;
  double diverge_norm = 1e6;
  bool record_spectrum = false;
  bool record_regions = false;
  std::string quadrature = "panel";  // or "hermite"
  std::size_t quad_order = 64;       // Gauss-Hermite order
  std::string kernel = "auto";

  void validate() const;  // throws ValidationError
};

// 0, round(r), round(r^2), ... up to and including max_iter, deduplicated and
// thinned evenly to at most `cap` entries (0 and max_iter always kept).
std::vector<std::uint64_t> geometric_schedule(std::uint64_t max_iter, double ratio, std::size_t cap);

struct TrajectoryRecord {
  std::uint64_t t = 0;
  Param theta = Param::zeros(1);
  double loss = 0.0;
  double gen_error = 0.0;
  double grad_norm = 0.0;
  // L(t+1) and kappa = (L(t) - L(t+1)) / (eta ||grad L(t)||^2); NaN when
  // there is no next step or the gradient vanishes.
  double next_loss = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::vector<double>> eigs;  // ascending Hessian spectrum
  std::optional<double> dist_optimal;
  std::optional<double> dist_singular;
};

enum class TerminalStatus { converged, budget_exhausted, diverged };

std::string_view to_string(TerminalStatus status);

// Aggregates over every step, not only recorded ones.
struct StepMonitor {
  std::uint64_t monitored_steps = 0;
  std::uint64_t zero_gradient_steps = 0;
  std::uint64_t loss_increases = 0;  // steps with L(t+1) > L(t) + 1e-12
  double kappa_min = std::numeric_limits<double>::infinity();
  double kappa_max = -std::numeric_limits<double>::infinity();
  double max_increase = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  TerminalStatus status = TerminalStatus::budget_exhausted;
  std::string diagnostic;
  std::string dataset_fingerprint;
  GDConfig config;
  std::string kernel;
  StepMonitor monitor;

  const TrajectoryRecord& terminal() const { return records.back(); }
};

// One application of the update map.
Param gd_step(const Param& param, const Dataset& dataset, double eta,
              const kernels::KernelTable& k = kernels::best());

// Called on every recorded entry when config.record_regions is set.
using RecordAnnotator = std::function<void(TrajectoryRecord&)>;

Trajectory run(const Param& theta0, const Dataset& dataset, const GDConfig& config,
               const RecordAnnotator& annotate = {});

struct DescentReport {
  double kappa_min = std::numeric_limits<double>::quiet_NaN();
  double kappa_max = std::numeric_limits<double>::quiet_NaN();
  bool monotone = true;
  std::uint64_t ratios = 0;               // steps contributing a kappa value
  std::uint64_t zero_gradient_steps = 0;  // excluded from the ratio
};

// Strong descent monitor: L(t) - L(t+1) >= kappa * eta * ||grad L(t)||^2.
DescentReport descent_check(const Trajectory& trajectory);

// Uniform draw on [-half_width, half_width]^{2m} from Stream::init.
Param random_init(std::size_t m, std::uint64_t seed, double half_width = 1.0);

}  // namespace mlpdyn
