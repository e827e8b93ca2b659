#pragma once

// File formats consumed by the plotting scripts and by `verify`.
//
//   trajectory CSV  t, v1..vm, w1..wm, loss, gen_error, grad_norm, kappa,
//                   [eig_1..eig_2m], [dist_optimal, dist_singular]
//   summary JSON    terminal_status, terminal record, config echo,
//                   dataset fingerprint, descent report
//   region JSON     {kind, provenance, pieces: [{label, base, directions,
//                   reduced}]}; directions are the columns of U
//   plateau CSV     t_start, t_end, mean_loss, mean_grad_norm, mean_v*, mean_w*
//   spectral CSV    t, n_pos, n_neg, n_zero, flow_unstable, window

#include <string>

#include "json.hpp"
#include "mlpdyn/analysis.hpp"
#include "mlpdyn/dynamics.hpp"

namespace mlpdyn::report {

using Json = nlohmann::ordered_json;

Json param_json(const Param& param);  // flat [v1..vm, w1..wm]
Json config_json(const GDConfig& config);
Json record_json(const TrajectoryRecord& record);

std::string trajectory_csv(const Trajectory& trajectory);
Json summary_json(const Trajectory& trajectory);
Json region_json(const RegionSet& region);
Json uniqueness_json(const UniquenessReport& report);
std::string plateau_csv(const PlateauReport& report, std::size_t m);
// `contrast` may be null; then the window column is empty.
std::string spectral_csv(const Trajectory& trajectory, const SpectralContrast* contrast);
Json spectral_json(const SpectralContrast& contrast);

// NaN and infinities become null.
Json number(double value);

}  // namespace mlpdyn::report
