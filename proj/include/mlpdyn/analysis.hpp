#pragma once

// Diagnostics for the two-neuron minimal model: region geometry, plateaus,
// Hessian sign counts, multi-start uniqueness, the chi^2 law of the loss on
// the optimal region, Jacobian ranks and a sampled reach estimator.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlpdyn/data.hpp"
#include "mlpdyn/dynamics.hpp"
#include "mlpdyn/model.hpp"
#include "mlpdyn/numerics.hpp"

namespace mlpdyn {

enum class RegionKind { optimal, singular };

std::string_view to_string(RegionKind kind);

// One affine piece plus the reduced network every point on it computes
// (Param::zeros(1) for the zero function).
struct RegionPiece {
  AffinePiece geometry;
  Param reduced;
};

struct RegionSet {
  RegionKind kind = RegionKind::optimal;
  std::string provenance;
  std::vector<RegionPiece> pieces;
};

// Parameters of the two-neuron network that compute exactly 2 tanh(x):
// the split line {w1 = w2 = 1, v1 + v2 = 2}, the silent-neuron lines
// {v1 = 0, (v2, w2) = (2, 1)} and {w1 = 0, (v2, w2) = (2, 1)}, and all
// their images under the symmetry group. Only m = 2 is supported.
RegionSet optimal_region(std::size_t m = 2);

// Zero-function pieces plus the embeddings of the one-neuron optimum
// o1 = (v_bar, w_bar), closed under the symmetry group. m = 2 only.
RegionSet singular_region(const Param& one_neuron_optimum, std::size_t m = 2);
RegionSet singular_region(const Dataset& dataset, std::size_t m = 2);

// Best one-neuron fit: grid over w in [0, 8] (2048 points) with the
// closed-form v(w), then gradient-descent polishing to ||grad|| <= 1e-10.
// Returned canonicalized.
Param solve_one_neuron_optimum(const Dataset& dataset);

struct RegionDistance {
  double distance = 0.0;
  std::size_t piece = 0;
};

// min over pieces and over symmetry images of param.
RegionDistance nearest_piece(const Param& param, const RegionSet& region);
double region_distance(const Param& param, const RegionSet& region);

// Annotator for dynamics::run filling dist_optimal / dist_singular.
RecordAnnotator region_annotator(RegionSet optimal, RegionSet singular);

struct FlowIndex {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_zero = 0;
  // Unstable directions of the gradient flow, i.e. eigenvalues of -H above
  // zero_tol. Equals n_neg; kept separate so both readings are reported.
  std::size_t flow_unstable = 0;
};

FlowIndex flow_index(std::span<const double> eigs, double zero_tol);
// zero_tol = 1e-8 * max |eig|
FlowIndex flow_index(std::span<const double> eigs);

struct PlateauInterval {
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  std::size_t first_record = 0;
  std::size_t last_record = 0;
  double mean_loss = 0.0;
  double mean_grad_norm = 0.0;
  std::vector<double> mean_theta;
};

struct PlateauReport {
  std::vector<PlateauInterval> intervals;
  double eps = 0.05;
  double min_span_decades = 0.5;
};

// Maximal runs of records (t >= 1) whose natural-log loss stays within eps
// of the first record's and that span at least min_span_decades in t.
PlateauReport detect_plateaus(const Trajectory& trajectory, double eps = 0.05, double min_span_decades = 0.5);

struct StartOutcome {
  std::uint64_t seed = 0;
  Param theta0 = Param::zeros(1);
  bool excluded_synchronized = false;
  std::optional<TerminalStatus> status;
  std::optional<Param> terminal;  // canonicalized
  double terminal_loss = 0.0;
  double terminal_grad_norm = 0.0;
  int cluster = -1;
};

struct UniquenessReport {
  std::size_t k_started = 0;
  std::size_t k_converged = 0;
  std::size_t k_diverged = 0;
  std::size_t k_excluded_synchronized = 0;
  std::size_t cluster_count = 0;
  std::vector<std::size_t> cluster_sizes;  // indexed by cluster id
  double max_intra_cluster_orbit_distance = 0.0;
  double cluster_threshold = 1e-3;
  std::optional<Param> representative;
  std::vector<StartOutcome> runs;
};

// k seeded starts drawn with random_init(m, init_seed + i). Runs execute on
// `workers` threads; results are ordered by start index.
UniquenessReport uniqueness_experiment(const Dataset& dataset, std::size_t k, const GDConfig& config,
                                       std::uint64_t init_seed, std::size_t m = 2, std::size_t workers = 1);

// Same, from explicit starting points. Starts with synchronized neurons
// (tol 1e-12) and diverged runs are excluded; the rest are clustered by
// single linkage at orbit distance `cluster_threshold`. Throws
// ValidationError when every run is excluded.
UniquenessReport uniqueness_from_starts(const Dataset& dataset, const std::vector<Param>& starts,
                                        const GDConfig& config, std::size_t workers = 1,
                                        double cluster_threshold = 1e-3);

struct ProbBound {
  double value = 0.0;
  bool valid = false;  // r / tau >= sqrt(n)
};

// max(0, 1 - exp(-(r/tau - sqrt(n))^2 / 2)); 0 with valid = false below
// the validity boundary.
ProbBound prob_bound(double r, double tau, std::size_t n);

struct ChiSquareStats {
  std::size_t num_datasets = 0;
  double mean = 0.0;
  double variance = 0.0;
  double expected_mean = 0.0;      // tau^2 / 2
  double expected_variance = 0.0;  // tau^4 / (2 n)
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  double min_grad_norm = 0.0;
  std::size_t zero_gradient_count = 0;
};

// Losses L(theta_star; D_i) on num_datasets datasets generated with seeds
// seed, seed + 1, ...; tested against (tau^2 / 2n) chi^2(n).
ChiSquareStats chi_square_check(const Param& theta_star, std::size_t n, double tau, std::size_t num_datasets,
                                std::uint64_t seed);

struct RankCase {
  std::string label;
  Param theta;
  std::size_t rank = 0;
};

struct JacobianRankReport {
  std::size_t full_rank = 0;
  std::vector<std::size_t> generic_ranks;
  std::vector<RankCase> degenerate;
};

JacobianRankReport jacobian_rank_sweep(const Dataset& dataset, std::size_t m, std::size_t num_samples,
                                       std::uint64_t seed);

struct ReachEstimate {
  double reach = 0.0;
  std::size_t p = 0;  // base point of the minimizing pair
  std::size_t q = 0;
  std::size_t pairs_used = 0;
  std::size_t points_without_tangent = 0;
};

// r = min over pairs (p, q) of ||q - p||^2 / (2 d(q - p, T_p)), where T_p is
// spanned by the columns of tangents[p]. Points whose tangent matrix is empty
// are used only as q. Throws ValidationError if no pair qualifies.
ReachEstimate reach_from_samples(const std::vector<std::vector<double>>& points,
                                 const std::vector<Matrix>& tangents);

// Samples theta uniformly in [-box, box]^{2m}, maps through
// F(theta) = (f(x_1; theta), ..., f(x_k; theta)) with k = n_small seeded
// normal inputs and estimates the reach of the image. Tangents come from the
// output Jacobian; rank-deficient points get no tangent.
ReachEstimate reach_estimate(std::size_t m, std::size_t n_small, std::size_t num_points, std::uint64_t seed,
                             double box);

enum class SpectralConvention {
  hessian_positive,  // n_pos of H
  flow_unstable,     // n_neg of H
};

std::string_view to_string(SpectralConvention convention);

struct SpectralWindow {
  std::vector<std::size_t> records;
  std::size_t n_pos_mode = 0;
  std::size_t flow_unstable_mode = 0;
};

struct SpectralContrast {
  SpectralWindow plateau;
  SpectralWindow near_optimal;
  // counted(plateau) - counted(near_optimal) under each convention
  long hessian_positive_difference = 0;
  long flow_unstable_difference = 0;
};

// Near-optimal window: records with dist_optimal <= 1.5 * its trajectory
// minimum. Plateau window: records inside the plateau intervals that are
// not in the near-optimal window. Needs eigs and dist_optimal on every
// record; throws ValidationError otherwise or when a window is empty.
SpectralContrast spectral_contrast(const Trajectory& trajectory, const PlateauReport& plateaus);

}  // namespace mlpdyn
