#include "mlpdyn/report.hpp"

#include <cmath>
#include <sstream>

#include "mlpdyn/io.hpp"

namespace mlpdyn::report {

Json number(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

Json param_json(const Param& param) {
  Json arr = Json::array();
  for (double x : param.flat()) arr.push_back(x);
  return arr;
}

Json config_json(const GDConfig& c) {
  Json j;
  j["eta"] = c.eta;
  j["max_iter"] = c.max_iter;
  j["log_ratio"] = c.log_ratio;
  j["max_records"] = c.max_records;
  j["log_schedule"] = c.log_schedule;
  j["grad_tol"] = c.grad_tol;
  j["diverge_norm"] = c.diverge_norm;
  j["record_spectrum"] = c.record_spectrum;
  j["record_regions"] = c.record_regions;
  j["quadrature"] = c.quadrature;
  j["quad_order"] = c.quad_order;
  j["kernel"] = c.kernel;
  return j;
}

Json record_json(const TrajectoryRecord& r) {
  Json j;
  j["t"] = r.t;
  j["theta"] = param_json(r.theta);
  j["loss"] = number(r.loss);
  j["gen_error"] = number(r.gen_error);
  j["grad_norm"] = number(r.grad_norm);
  j["kappa"] = number(r.kappa);
  if (r.eigs) j["eigs"] = *r.eigs;
  if (r.dist_optimal) j["dist_optimal"] = *r.dist_optimal;
  if (r.dist_singular) j["dist_singular"] = *r.dist_singular;
  return j;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  if (traj.records.empty()) return "";
  const std::size_t m = traj.records.front().theta.m();
  const bool eigs = traj.records.front().eigs.has_value();
  const bool dists = traj.records.front().dist_optimal.has_value();
  out << "t";
  for (std::size_t i = 1; i <= m; ++i) out << ",v" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",w" << i;
  out << ",loss,gen_error,grad_norm,kappa";
  if (eigs)
    for (std::size_t i = 1; i <= 2 * m; ++i) out << ",eig_" << i;
  if (dists) out << ",dist_optimal,dist_singular";
  out << '\n';
  for (const auto& r : traj.records) {
    out << r.t;
    for (double x : r.theta.flat()) out << ',' << format_double(x);
    out << ',' << format_double(r.loss) << ',' << format_double(r.gen_error) << ',' << format_double(r.grad_norm)
        << ',' << format_double(r.kappa);
    if (eigs)
      for (double e : *r.eigs) out << ',' << format_double(e);
    if (dists) out << ',' << format_double(*r.dist_optimal) << ',' << format_double(*r.dist_singular);
    out << '\n';
  }
  return out.str();
}

Json summary_json(const Trajectory& traj) {
  Json j;
  j["terminal_status"] = std::string(to_string(traj.status));
  if (!traj.diagnostic.empty()) j["diagnostic"] = traj.diagnostic;
  j["terminal"] = traj.records.empty() ? Json(nullptr) : record_json(traj.terminal());
  if (!traj.records.empty()) j["terminal_canonical_theta"] = param_json(canonicalize(traj.terminal().theta));
  j["records"] = traj.records.size();
  j["config"] = config_json(traj.config);
  j["kernel"] = traj.kernel;
  j["dataset_fingerprint"] = traj.dataset_fingerprint;
  const auto d = descent_check(traj);
  j["descent"] = {{"kappa_min", number(d.kappa_min)},
                  {"kappa_max", number(d.kappa_max)},
                  {"monotone", d.monotone},
                  {"ratios", d.ratios},
                  {"zero_gradient_steps", d.zero_gradient_steps},
                  {"loss_increases", traj.monitor.loss_increases},
                  {"max_increase", traj.monitor.max_increase}};
  return j;
}

Json region_json(const RegionSet& region) {
  Json j;
  j["kind"] = std::string(to_string(region.kind));
  j["provenance"] = region.provenance;
  Json pieces = Json::array();
  for (const auto& p : region.pieces) {
    Json dirs = Json::array();
    for (std::size_t k = 0; k < p.geometry.dim(); ++k) dirs.push_back(p.geometry.directions().column(k));
    pieces.push_back({{"label", p.geometry.label()},
                      {"base", p.geometry.base()},
                      {"directions", dirs},
                      {"reduced", param_json(p.reduced)}});
  }
  j["pieces"] = pieces;
  return j;
}

Json uniqueness_json(const UniquenessReport& rep) {
  Json j;
  j["k_started"] = rep.k_started;
  j["k_converged"] = rep.k_converged;
  j["k_diverged"] = rep.k_diverged;
  j["k_excluded_synchronized"] = rep.k_excluded_synchronized;
  j["cluster_count"] = rep.cluster_count;
  j["cluster_sizes"] = rep.cluster_sizes;
  j["max_intra_cluster_orbit_distance"] = rep.max_intra_cluster_orbit_distance;
  j["cluster_threshold"] = rep.cluster_threshold;
  j["representative"] = rep.representative ? param_json(*rep.representative) : Json(nullptr);
  Json runs = Json::array();
  for (const auto& r : rep.runs) {
    Json jr;
    jr["seed"] = r.seed;
    jr["theta0"] = param_json(r.theta0);
    jr["excluded_synchronized"] = r.excluded_synchronized;
    jr["status"] = r.status ? Json(std::string(to_string(*r.status))) : Json(nullptr);
    jr["terminal"] = r.terminal ? param_json(*r.terminal) : Json(nullptr);
    jr["terminal_loss"] = number(r.terminal_loss);
    jr["terminal_grad_norm"] = number(r.terminal_grad_norm);
    jr["cluster"] = r.cluster;
    runs.push_back(jr);
  }
  j["runs"] = runs;
  return j;
}

std::string plateau_csv(const PlateauReport& rep, std::size_t m) {
  std::ostringstream out;
  out << "t_start,t_end,mean_loss,mean_grad_norm";
  for (std::size_t i = 1; i <= m; ++i) out << ",mean_v" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",mean_w" << i;
  out << '\n';
  for (const auto& iv : rep.intervals) {
    out << iv.t_start << ',' << iv.t_end << ',' << format_double(iv.mean_loss) << ','
        << format_double(iv.mean_grad_norm);
    for (double x : iv.mean_theta) out << ',' << format_double(x);
    out << '\n';
  }
  return out.str();
}

std::string spectral_csv(const Trajectory& traj, const SpectralContrast* contrast) {
  std::vector<std::string> window(traj.records.size());
  if (contrast) {
    for (auto i : contrast->plateau.records) window[i] = "plateau";
    for (auto i : contrast->near_optimal.records) window[i] = "near_optimal";
  }
  std::ostringstream out;
  out << "t,n_pos,n_neg,n_zero,flow_unstable,window\n";
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& r = traj.records[i];
    if (!r.eigs) continue;
    const auto fi = flow_index(*r.eigs);
    out << r.t << ',' << fi.n_pos << ',' << fi.n_neg << ',' << fi.n_zero << ',' << fi.flow_unstable << ','
        << window[i] << '\n';
  }
  return out.str();
}

Json spectral_json(const SpectralContrast& c) {
  auto window = [](const SpectralWindow& w) {
    return Json{{"records", w.records.size()}, {"n_pos_mode", w.n_pos_mode},
                {"flow_unstable_mode", w.flow_unstable_mode}};
  };
  Json j;
  j["plateau"] = window(c.plateau);
  j["near_optimal"] = window(c.near_optimal);
  j["hessian_positive_difference"] = c.hessian_positive_difference;
  j["flow_unstable_difference"] = c.flow_unstable_difference;
  return j;
}

}  // namespace mlpdyn::report
