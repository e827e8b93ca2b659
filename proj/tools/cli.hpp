#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlpdyn/analysis.hpp"
#include "mlpdyn/dynamics.hpp"
#include "mlpdyn/reference.hpp"
#include "mlpdyn/report.hpp"

namespace mlpdyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitVerifyFailed = 3;

// Relative --out paths resolve against this directory when it is set.
inline constexpr const char* kOutputRootEnv = "MLPDYN_OUTPUT_ROOT";

struct ExperimentConfig {
  GDConfig gd;
  std::size_t n = reference::kN;
  double tau = reference::kNoisyTau;
  std::uint64_t seed = reference::kDataSeed;
  std::string target = "2tanh";
  std::size_t m = reference::kHidden;
  std::uint64_t init_seed = reference::kInitSeed;
  double init_box = 1.0;
  std::size_t k = reference::kMultistartK;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::string out;
  bool overwrite = false;

  ExperimentConfig();
  std::size_t effective_workers() const;
};

// Flat "key = value" lines; '#' starts a comment. Keys are the field names
// above plus the GDConfig ones (eta, max_iter, log_ratio, max_records,
// grad_tol, diverge_norm, record_spectrum, record_regions, quadrature, quad_order,
// kernel). Unknown keys and malformed values throw ValidationError.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin);
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

nlohmann::ordered_json experiment_json(const ExperimentConfig& cfg);

std::filesystem::path resolve_output(const std::string& path);

struct Panel {
  double tau = 0.0;
  Dataset dataset;
  Param theta0 = Param::zeros(1);
  Param one_neuron_optimum = Param::zeros(1);
  RegionSet optimal;
  RegionSet singular;
  Trajectory trajectory;
  PlateauReport plateaus;
  std::optional<SpectralContrast> contrast;
};

// One reference run with spectrum and region distances recorded.
Panel run_panel(const ExperimentConfig& cfg, double tau);

// Full command line including the program name. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlpdyn::cli
