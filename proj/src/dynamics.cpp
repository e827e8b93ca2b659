#include "mlpdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "mlpdyn/error.hpp"
#include "mlpdyn/numerics.hpp"
#include "mlpdyn/objective.hpp"
#include "mlpdyn/rng.hpp"

namespace mlpdyn {

void GDConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be a finite value > 0");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(diverge_norm > 0.0)) throw ValidationError("diverge_norm must be > 0");
  if (!(grad_tol >= 0.0)) throw ValidationError("grad_tol must be >= 0");
  if (log_schedule.empty() && !(log_ratio > 1.0)) throw ValidationError("log_ratio must be > 1");
  if (max_records < 2) throw ValidationError("max_records must be >= 2");
  if (quad_order < 1 || quad_order > kMaxQuadratureOrder) throw ValidationError("quad_order must be in [1, 256]");
  if (quadrature != "panel" && quadrature != "hermite") throw ValidationError("quadrature must be panel or hermite");
  (void)kernels::by_name(kernel);
}

std::vector<std::uint64_t> geometric_schedule(std::uint64_t max_iter, double ratio, std::size_t cap) {
  if (!(ratio > 1.0)) throw ValidationError("geometric_schedule: ratio must be > 1");
  if (cap < 2) throw ValidationError("geometric_schedule: cap must be >= 2");
  std::vector<std::uint64_t> ts{0};
  for (double x = 1.0; x < static_cast<double>(max_iter); x *= ratio) {
    const auto t = static_cast<std::uint64_t>(std::llround(x));
    if (t > ts.back() && t < max_iter) ts.push_back(t);
  }
  if (max_iter > ts.back()) ts.push_back(max_iter);
  if (ts.size() <= cap) return ts;

  std::vector<std::uint64_t> thinned;
  const double step = static_cast<double>(ts.size() - 1) / static_cast<double>(cap - 1);
  for (std::size_t k = 0; k < cap; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * step));
    if (thinned.empty() || ts[idx] > thinned.back()) thinned.push_back(ts[idx]);
  }
  return thinned;
}

std::string_view to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::converged:
      return "converged";
    case TerminalStatus::budget_exhausted:
      return "budget_exhausted";
    case TerminalStatus::diverged:
      return "diverged";
  }
  return "";
}

Param gd_step(const Param& param, const Dataset& dataset, double eta, const kernels::KernelTable& k) {
  const auto g = gradient(param, dataset, k);
  std::vector<double> v(param.v().begin(), param.v().end());
  std::vector<double> w(param.w().begin(), param.w().end());
  for (std::size_t j = 0; j < param.m(); ++j) {
    v[j] -= eta * g.dv[j];
    w[j] -= eta * g.dw[j];
  }
  return Param(std::move(v), std::move(w));
}

Param random_init(std::size_t m, std::uint64_t seed, double half_width) {
  RandomStream rs(seed, Stream::init);
  std::vector<double> flat(2 * m);
  for (auto& x : flat) x = rs.uniform(-half_width, half_width);
  return Param::from_flat(flat);
}

namespace {

bool all_finite(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Trajectory run(const Param& theta0, const Dataset& dataset, const GDConfig& config, const RecordAnnotator& annotate) {
  config.validate();
  dataset.validate();
  const auto& kern = kernels::by_name(config.kernel);
  const auto rule = make_rule(config.quadrature, config.quad_order);
  const Teacher teacher = dataset.teacher();

  std::vector<std::uint64_t> schedule = config.log_schedule;
  if (schedule.empty()) {
    schedule = geometric_schedule(config.max_iter, config.log_ratio, config.max_records);
  } else {
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  }
  auto next_scheduled = schedule.begin();

  Trajectory traj;
  traj.config = config;
  traj.kernel = std::string(kern.name);
  traj.dataset_fingerprint = fingerprint(dataset);

  const std::size_t m = theta0.m();
  const std::size_t n = dataset.n();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> theta = theta0.flat();
  std::vector<double> grad(2 * m);
  std::vector<double> scratch(kernels::scratch_size(m, n));

  double prev_loss = 0.0;
  double prev_grad_sq = 0.0;
  bool prev_recorded = false;

  for (std::uint64_t t = 0;; ++t) {
    const double sum_sq = kern.loss_grad(theta.data(), theta.data() + m, m, dataset.x.data(), dataset.y.data(), n,
                                         grad.data(), scratch.data());
    const double loss = 0.5 * sum_sq * inv_n;
    double grad_sq = 0.0;
    for (auto& g : grad) {
      g *= inv_n;
      grad_sq += g * g;
    }
    const double grad_norm = std::sqrt(grad_sq);

    if (!std::isfinite(loss) || !all_finite(theta)) {
      traj.status = TerminalStatus::diverged;
      traj.diagnostic = "non-finite loss or parameters at t=" + std::to_string(t);
      if (traj.records.empty()) throw ValidationError("run: initial parameters give a non-finite loss");
      break;
    }

    if (t > 0) {
      auto& mon = traj.monitor;
      const double decrease = prev_loss - loss;
      if (-decrease > 1e-12) ++mon.loss_increases;
      mon.max_increase = std::max(mon.max_increase, -decrease);
      double kappa = std::numeric_limits<double>::quiet_NaN();
      if (prev_grad_sq > 0.0) {
        kappa = decrease / (config.eta * prev_grad_sq);
        ++mon.monitored_steps;
        mon.kappa_min = std::min(mon.kappa_min, kappa);
        mon.kappa_max = std::max(mon.kappa_max, kappa);
      } else {
        ++mon.zero_gradient_steps;
      }
      if (prev_recorded) {
        traj.records.back().next_loss = loss;
        traj.records.back().kappa = kappa;
      }
    }

    const double theta_norm = norm2(theta);
    std::optional<TerminalStatus> stop;
    if (theta_norm > config.diverge_norm) {
      stop = TerminalStatus::diverged;
      traj.diagnostic = "||theta|| exceeded diverge_norm at t=" + std::to_string(t);
    } else if (grad_norm <= config.grad_tol) {
      stop = TerminalStatus::converged;
    } else if (t >= config.max_iter) {
      stop = TerminalStatus::budget_exhausted;
    }

    while (next_scheduled != schedule.end() && *next_scheduled < t) ++next_scheduled;
    const bool scheduled = next_scheduled != schedule.end() && *next_scheduled == t;
    prev_recorded = scheduled || stop.has_value();
    if (prev_recorded) {
      TrajectoryRecord rec;
      rec.t = t;
      rec.theta = Param::from_flat(theta);
      rec.loss = loss;
      rec.gen_error = generalization_error(rec.theta, rule, teacher, kern);
      rec.grad_norm = grad_norm;
      if (config.record_spectrum) rec.eigs = sym_eigen(hessian(rec.theta, dataset)).values;
      if (config.record_regions && annotate) annotate(rec);
      traj.records.push_back(std::move(rec));
    }
    if (stop) {
      traj.status = *stop;
      break;
    }

    for (std::size_t a = 0; a < 2 * m; ++a) theta[a] -= config.eta * grad[a];
    prev_loss = loss;
    prev_grad_sq = grad_sq;
  }
  return traj;
}

DescentReport descent_check(const Trajectory& trajectory) {
  if (trajectory.records.empty()) throw ValidationError("descent_check: empty trajectory");
  DescentReport rep;
  double kmin = std::numeric_limits<double>::infinity();
  double kmax = -std::numeric_limits<double>::infinity();

  const auto& mon = trajectory.monitor;
  if (mon.monitored_steps > 0) {
    kmin = mon.kappa_min;
    kmax = mon.kappa_max;
    rep.ratios = mon.monitored_steps;
  } else {
    for (const auto& r : trajectory.records) {
      if (std::isnan(r.kappa)) continue;
      kmin = std::min(kmin, r.kappa);
      kmax = std::max(kmax, r.kappa);
      ++rep.ratios;
    }
  }
  rep.zero_gradient_steps = mon.zero_gradient_steps;
  if (rep.ratios > 0) {
    rep.kappa_min = kmin;
    rep.kappa_max = kmax;
  }

  rep.monotone = mon.max_increase <= 1e-12;
  const auto& recs = trajectory.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (i + 1 < recs.size() && recs[i + 1].loss > recs[i].loss + 1e-12) rep.monotone = false;
    if (!std::isnan(recs[i].next_loss) && recs[i].next_loss > recs[i].loss + 1e-12) rep.monotone = false;
  }
  return rep;
}

}  // namespace mlpdyn
