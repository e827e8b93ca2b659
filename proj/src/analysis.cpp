#include "mlpdyn/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

#include "mlpdyn/error.hpp"
#include "mlpdyn/objective.hpp"
#include "mlpdyn/rng.hpp"
#include "mlpdyn/stats.hpp"

namespace mlpdyn {

std::string_view to_string(RegionKind kind) { return kind == RegionKind::optimal ? "optimal" : "singular"; }

std::string_view to_string(SpectralConvention convention) {
  return convention == SpectralConvention::hessian_positive ? "hessian_positive" : "flow_unstable";
}

namespace {

// Flat coordinates for m = 2: [v1, v2, w1, w2].
constexpr std::size_t V1 = 0, V2 = 1, W1 = 2, W2 = 3;

std::vector<double> unit(std::size_t i) {
  std::vector<double> e(4, 0.0);
  e[i] = 1.0;
  return e;
}

std::vector<double> combo(std::initializer_list<std::pair<std::size_t, double>> terms) {
  std::vector<double> e(4, 0.0);
  for (auto [i, c] : terms) e[i] = c;
  return e;
}

struct Generator {
  std::vector<double> base;
  std::vector<std::vector<double>> spanning;
  std::string label;
  Param reduced;
};

bool same_piece(const AffinePiece& a, const AffinePiece& b) {
  if (a.dim() != b.dim()) return false;
  const double scale = 1.0 + norm2(a.base());
  if (affine_distance(a.base(), b).distance > 1e-12 * scale) return false;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    auto p = a.base();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += a.directions()(i, k);
    if (affine_distance(p, b).distance > 1e-12 * scale) return false;
  }
  return true;
}

// Adds every symmetry image of each generator, skipping duplicates.
void close_under_group(RegionSet& set, const std::vector<Generator>& gens, std::size_t m) {
  const auto group = symmetry_group(m);
  for (const auto& gen : gens) {
    for (std::size_t gi = 0; gi < group.size(); ++gi) {
      const auto& g = group[gi];
      std::vector<std::vector<double>> dirs;
      for (const auto& d : gen.spanning) dirs.push_back(g.apply_flat(d));
      auto piece = AffinePiece::spanned_by(g.apply_flat(gen.base), dirs,
                                           gi == 0 ? gen.label : gen.label + "#g" + std::to_string(gi));
      const bool dup = std::any_of(set.pieces.begin(), set.pieces.end(),
                                   [&](const RegionPiece& rp) { return same_piece(rp.geometry, piece); });
      if (!dup) set.pieces.push_back(RegionPiece{std::move(piece), gen.reduced});
    }
  }
}

void require_m2(std::size_t m, const char* what) {
  if (m != 2) throw ValidationError(std::string(what) + ": only m = 2 is supported");
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

RegionSet optimal_region(std::size_t m) {
  require_m2(m, "optimal_region");
  const Param teacher({2.0}, {1.0});
  std::vector<Generator> gens{
      {{1, 1, 1, 1}, {combo({{V1, 1.0}, {V2, -1.0}})}, "split", teacher},
      {{0, 2, 0, 1}, {unit(W1)}, "silent_v", teacher},
      {{0, 2, 0, 1}, {unit(V1)}, "silent_w", teacher},
  };
  RegionSet set;
  set.kind = RegionKind::optimal;
  set.provenance = "f = 2 tanh(x): split w1 = w2 = 1, v1 + v2 = 2; one neuron (2, 1) with the other silent";
  close_under_group(set, gens, m);
  return set;
}

RegionSet singular_region(const Param& o1, std::size_t m) {
  require_m2(m, "singular_region");
  if (o1.m() != 1) throw ValidationError("singular_region: one-neuron optimum must have m = 1");
  const double vb = o1.v(0), wb = o1.w(0);
  const Param zero = Param::zeros(1);
  const std::vector<double> origin(4, 0.0);
  std::vector<Generator> gens{
      {origin, {unit(W1), unit(W2)}, "zero_vv", zero},
      {origin, {unit(V1), unit(V2)}, "zero_ww", zero},
      {origin, {unit(W1), unit(V2)}, "zero_vw", zero},
      {origin, {unit(V1), unit(W2)}, "zero_wv", zero},
      {origin, {combo({{V1, 1.0}, {V2, -1.0}}), combo({{W1, 1.0}, {W2, 1.0}})}, "cancel", zero},
      {origin, {combo({{V1, 1.0}, {V2, 1.0}}), combo({{W1, 1.0}, {W2, -1.0}})}, "cancel_flip", zero},
      {{vb / 2, vb / 2, wb, wb}, {combo({{V1, 1.0}, {V2, -1.0}})}, "o1_split", o1},
      {{0, vb, 0, wb}, {unit(W1)}, "o1_silent_v", o1},
      {{0, vb, 0, wb}, {unit(V1)}, "o1_silent_w", o1},
  };
  RegionSet set;
  set.kind = RegionKind::singular;
  set.provenance = "zero function pieces and embeddings of O1 = (v=" + std::to_string(vb) +
                   ", w=" + std::to_string(wb) + ")";
  close_under_group(set, gens, m);
  return set;
}

RegionSet singular_region(const Dataset& dataset, std::size_t m) {
  require_m2(m, "singular_region");
  return singular_region(solve_one_neuron_optimum(dataset), m);
}

Param solve_one_neuron_optimum(const Dataset& dataset) {
  dataset.validate();
  if (std::all_of(dataset.x.begin(), dataset.x.end(), [](double x) { return x == 0.0; }))
    throw ValidationError("solve_one_neuron_optimum: all inputs are zero");

  const std::size_t n = dataset.n();
  constexpr std::size_t kGrid = 2048;
  constexpr double kWMax = 8.0;
  double best_loss = std::numeric_limits<double>::infinity();
  double best_v = 0.0, best_w = 0.0;
  for (std::size_t k = 0; k < kGrid; ++k) {
    const double w = kWMax * static_cast<double>(k) / static_cast<double>(kGrid - 1);
    double sty = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = std::tanh(w * dataset.x[i]);
      sty += t * dataset.y[i];
      stt += t * t;
    }
    const double v = stt > 0.0 ? sty / stt : 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = v * std::tanh(w * dataset.x[i]) - dataset.y[i];
      loss += r * r;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_v = v;
      best_w = w;
    }
  }

  // Polish with plain gradient descent at step 1 / lambda_max, refreshing the
  // step size as the curvature changes.
  const auto& kern = kernels::scalar();
  Param p({best_v}, {best_w});
  constexpr std::uint64_t kMaxSteps = 2'000'000;
  double eta = 0.0;
  for (std::uint64_t s = 0; s < kMaxSteps; ++s) {
    const auto g = gradient(p, dataset, kern);
    if (g.norm() <= 1e-10) return canonicalize(p);
    if (s % 1000 == 0) {
      const auto eig = sym_eigen(hessian(p, dataset)).values;
      const double lmax = std::max(std::abs(eig.front()), std::abs(eig.back()));
      eta = lmax > 0.0 ? 1.0 / lmax : 1.0;
    }
    p = Param({p.v(0) - eta * g.dv[0]}, {p.w(0) - eta * g.dw[0]});
  }
  throw ConvergenceError("solve_one_neuron_optimum: gradient descent did not reach ||grad|| <= 1e-10");
}

RegionDistance nearest_piece(const Param& param, const RegionSet& region) {
  if (region.pieces.empty()) throw ValidationError("region_distance: empty region");
  const auto flat = param.flat();
  if (region.pieces.front().geometry.ambient_dim() != flat.size())
    throw ValidationError("region_distance: dimension mismatch");
  RegionDistance best{std::numeric_limits<double>::infinity(), 0};
  for (const auto& g : symmetry_group(param.m())) {
    const auto image = g.apply_flat(flat);
    for (std::size_t k = 0; k < region.pieces.size(); ++k) {
      const double d = affine_distance(image, region.pieces[k].geometry).distance;
      if (d < best.distance) best = {d, k};
    }
  }
  return best;
}

double region_distance(const Param& param, const RegionSet& region) { return nearest_piece(param, region).distance; }

RecordAnnotator region_annotator(RegionSet optimal, RegionSet singular) {
  return [opt = std::move(optimal), sing = std::move(singular)](TrajectoryRecord& rec) {
    rec.dist_optimal = region_distance(rec.theta, opt);
    rec.dist_singular = region_distance(rec.theta, sing);
  };
}

FlowIndex flow_index(std::span<const double> eigs, double zero_tol) {
  if (!(zero_tol >= 0.0)) throw ValidationError("flow_index: zero_tol must be >= 0");
  FlowIndex fi;
  for (double e : eigs) {
    if (e > zero_tol)
      ++fi.n_pos;
    else if (e < -zero_tol)
      ++fi.n_neg;
    else
      ++fi.n_zero;
  }
  fi.flow_unstable = fi.n_neg;
  return fi;
}

FlowIndex flow_index(std::span<const double> eigs) {
  double scale = 0.0;
  for (double e : eigs) scale = std::max(scale, std::abs(e));
  return flow_index(eigs, 1e-8 * scale);
}

PlateauReport detect_plateaus(const Trajectory& trajectory, double eps, double min_span_decades) {
  if (!(eps > 0.0)) throw ValidationError("detect_plateaus: eps must be > 0");
  PlateauReport rep;
  rep.eps = eps;
  rep.min_span_decades = min_span_decades;
  const auto& recs = trajectory.records;
  // t = 0 is treated as t = 1 so the first record can open an interval.
  auto decades = [&](std::size_t a, std::size_t b) {
    return std::log10(static_cast<double>(recs[b].t) / static_cast<double>(std::max<std::uint64_t>(recs[a].t, 1)));
  };

  std::size_t i = 0;
  while (i < recs.size()) {
    if (!(recs[i].loss > 0.0)) {
      ++i;
      continue;
    }
    const double anchor = std::log(recs[i].loss);
    std::size_t j = i;
    while (j + 1 < recs.size() && recs[j + 1].loss > 0.0 && std::abs(std::log(recs[j + 1].loss) - anchor) <= eps) ++j;
    if (j > i && decades(i, j) >= min_span_decades) {
      PlateauInterval iv;
      iv.t_start = recs[i].t;
      iv.t_end = recs[j].t;
      iv.first_record = i;
      iv.last_record = j;
      iv.mean_theta.assign(2 * recs[i].theta.m(), 0.0);
      for (std::size_t k = i; k <= j; ++k) {
        iv.mean_loss += recs[k].loss;
        iv.mean_grad_norm += recs[k].grad_norm;
        const auto f = recs[k].theta.flat();
        for (std::size_t a = 0; a < f.size(); ++a) iv.mean_theta[a] += f[a];
      }
      const double cnt = static_cast<double>(j - i + 1);
      iv.mean_loss /= cnt;
      iv.mean_grad_norm /= cnt;
      for (auto& x : iv.mean_theta) x /= cnt;
      rep.intervals.push_back(std::move(iv));
      i = j + 1;
    } else {
      ++i;
    }
  }
  return rep;
}

UniquenessReport uniqueness_experiment(const Dataset& dataset, std::size_t k, const GDConfig& config,
                                       std::uint64_t init_seed, std::size_t m, std::size_t workers) {
  if (k < 2) throw ValidationError("uniqueness_experiment: k must be >= 2");
  std::vector<Param> starts;
  for (std::size_t i = 0; i < k; ++i) starts.push_back(random_init(m, init_seed + i));
  auto rep = uniqueness_from_starts(dataset, starts, config, workers);
  for (std::size_t i = 0; i < k; ++i) rep.runs[i].seed = init_seed + i;
  return rep;
}

UniquenessReport uniqueness_from_starts(const Dataset& dataset, const std::vector<Param>& starts,
                                        const GDConfig& config, std::size_t workers, double cluster_threshold) {
  if (starts.size() < 2) throw ValidationError("uniqueness_experiment: k must be >= 2");
  config.validate();
  GDConfig cfg = config;
  cfg.record_spectrum = false;
  cfg.record_regions = false;
  cfg.max_records = std::min<std::size_t>(cfg.max_records, 64);

  UniquenessReport rep;
  rep.k_started = starts.size();
  rep.cluster_threshold = cluster_threshold;
  rep.runs.resize(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    rep.runs[i].seed = i;
    rep.runs[i].theta0 = starts[i];
    rep.runs[i].excluded_synchronized = is_synchronized(starts[i], 1e-12);
  }

  parallel_for(starts.size(), workers, [&](std::size_t i) {
    auto& out = rep.runs[i];
    if (out.excluded_synchronized) return;
    const auto traj = run(out.theta0, dataset, cfg);
    out.status = traj.status;
    if (traj.status == TerminalStatus::diverged) return;
    out.terminal = canonicalize(traj.terminal().theta);
    out.terminal_loss = traj.terminal().loss;
    out.terminal_grad_norm = traj.terminal().grad_norm;
  });

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const auto& r = rep.runs[i];
    if (r.excluded_synchronized)
      ++rep.k_excluded_synchronized;
    else if (!r.terminal)
      ++rep.k_diverged;
    else
      kept.push_back(i);
  }
  rep.k_converged = kept.size();
  if (kept.empty()) throw ValidationError("uniqueness_experiment: every run was excluded");

  // Single linkage via union-find.
  std::vector<std::size_t> parent(kept.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<std::vector<double>> dist(kept.size(), std::vector<double>(kept.size(), 0.0));
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = a + 1; b < kept.size(); ++b) {
      const double d = orbit_distance(*rep.runs[kept[a]].terminal, *rep.runs[kept[b]].terminal);
      dist[a][b] = dist[b][a] = d;
      if (d <= cluster_threshold) parent[find(a)] = find(b);
    }
  }
  std::map<std::size_t, int> ids;  // root -> cluster id in order of first appearance
  for (std::size_t a = 0; a < kept.size(); ++a) {
    const auto root = find(a);
    auto it = ids.find(root);
    if (it == ids.end()) {
      it = ids.emplace(root, static_cast<int>(ids.size())).first;
      rep.cluster_sizes.push_back(0);
    }
    rep.runs[kept[a]].cluster = it->second;
    ++rep.cluster_sizes[static_cast<std::size_t>(it->second)];
  }
  rep.cluster_count = ids.size();
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t b = a + 1; b < kept.size(); ++b)
      if (rep.runs[kept[a]].cluster == rep.runs[kept[b]].cluster)
        rep.max_intra_cluster_orbit_distance = std::max(rep.max_intra_cluster_orbit_distance, dist[a][b]);

  // Representative: first member of the largest cluster.
  const auto largest = static_cast<int>(
      std::max_element(rep.cluster_sizes.begin(), rep.cluster_sizes.end()) - rep.cluster_sizes.begin());
  for (auto i : kept) {
    if (rep.runs[i].cluster == largest) {
      rep.representative = rep.runs[i].terminal;
      break;
    }
  }
  return rep;
}

ProbBound prob_bound(double r, double tau, std::size_t n) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("prob_bound: r must be > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("prob_bound: tau must be > 0");
  const double gap = r / tau - std::sqrt(static_cast<double>(n));
  if (gap < 0.0) return {0.0, false};
  return {std::max(0.0, -std::expm1(-0.5 * gap * gap)), true};
}

ChiSquareStats chi_square_check(const Param& theta_star, std::size_t n, double tau, std::size_t num_datasets,
                                std::uint64_t seed) {
  if (num_datasets < 100) throw ValidationError("chi_square_check: num_datasets must be >= 100");
  if (n < 1) throw ValidationError("chi_square_check: n must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("chi_square_check: tau must be >= 0");
  if (region_distance(theta_star, optimal_region(theta_star.m())) >= 1e-10)
    throw ValidationError("chi_square_check: theta_star is not in the optimal region");

  std::vector<double> losses(num_datasets);
  std::vector<double> grad_norms(num_datasets);
  // Scalar tanh matches the teacher bit for bit, so tau = 0 gives exact zeros.
  const auto& kern = kernels::scalar();
  for (std::size_t i = 0; i < num_datasets; ++i) {
    const auto d = generate(n, tau, seed + i);
    const auto lg = loss_and_gradient(theta_star, d, kern);
    losses[i] = lg.loss;
    grad_norms[i] = lg.grad.norm();
  }

  ChiSquareStats st;
  st.num_datasets = num_datasets;
  st.mean = mean(losses);
  st.variance = sample_variance(losses);
  st.expected_mean = 0.5 * tau * tau;
  st.expected_variance = std::pow(tau, 4) / (2.0 * static_cast<double>(n));
  st.min_grad_norm = *std::min_element(grad_norms.begin(), grad_norms.end());
  st.zero_gradient_count =
      static_cast<std::size_t>(std::count(grad_norms.begin(), grad_norms.end(), 0.0));
  if (tau > 0.0) {
    const double scale = 2.0 * static_cast<double>(n) / (tau * tau);
    const double dof = static_cast<double>(n);
    const auto ks = ks_test(losses, [&](double l) { return chi_squared_cdf(l * scale, dof); });
    st.ks_statistic = ks.statistic;
    st.ks_pvalue = ks.pvalue;
  }
  return st;
}

JacobianRankReport jacobian_rank_sweep(const Dataset& dataset, std::size_t m, std::size_t num_samples,
                                       std::uint64_t seed) {
  dataset.validate();
  if (m < 1) throw ValidationError("jacobian_rank_sweep: m must be >= 1");
  if (dataset.n() < 2 * m) throw ValidationError("jacobian_rank_sweep: need n >= 2m");
  JacobianRankReport rep;
  rep.full_rank = 2 * m;
  RandomStream rs(seed, Stream::sampling);
  auto draw = [&] {
    std::vector<double> flat(2 * m);
    for (auto& x : flat) x = rs.uniform(-3.0, 3.0);
    return flat;
  };
  for (std::size_t s = 0; s < num_samples; ++s)
    rep.generic_ranks.push_back(numerical_rank(output_jacobian(Param::from_flat(draw()), dataset.x)));

  auto add_case = [&](std::string label, std::vector<double> flat) {
    Param p = Param::from_flat(flat);
    const auto rank = numerical_rank(output_jacobian(p, dataset.x));
    rep.degenerate.push_back({std::move(label), std::move(p), rank});
  };
  if (m >= 2) {
    auto f = draw();
    f[m + 1] = f[m];
    add_case("w1=w2", f);
  }
  auto f = draw();
  f[0] = 0.0;
  f[m] = 0.0;
  add_case("v1=0,w1=0", f);
  return rep;
}

ReachEstimate reach_from_samples(const std::vector<std::vector<double>>& points, const std::vector<Matrix>& tangents) {
  if (points.size() != tangents.size()) throw ValidationError("reach: points and tangents differ in length");
  ReachEstimate est;
  est.reach = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (tangents[p].empty()) {
      ++est.points_without_tangent;
      continue;
    }
    const Matrix basis = column_space_basis(tangents[p]);
    const auto& x = points[p];
    for (std::size_t q = 0; q < points.size(); ++q) {
      if (q == p) continue;
      const auto& y = points[q];
      std::vector<double> delta(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) delta[i] = y[i] - x[i];
      const double len = norm2(delta);
      if (len == 0.0) continue;
      auto normal = delta;
      for (std::size_t k = 0; k < basis.cols(); ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < delta.size(); ++i) c += basis(i, k) * delta[i];
        for (std::size_t i = 0; i < delta.size(); ++i) normal[i] -= c * basis(i, k);
      }
      const double d = norm2(normal);
      if (d <= 1e-14 * len) continue;
      ++est.pairs_used;
      const double r = len * len / (2.0 * d);
      if (r < est.reach) {
        est.reach = r;
        est.p = p;
        est.q = q;
        found = true;
      }
    }
  }
  if (!found) throw ValidationError("reach: no usable point pair");
  return est;
}

ReachEstimate reach_estimate(std::size_t m, std::size_t n_small, std::size_t num_points, std::uint64_t seed,
                             double box) {
  if (m < 1) throw ValidationError("reach_estimate: m must be >= 1");
  if (n_small < 2 * m + 1) throw ValidationError("reach_estimate: n_small must be >= 2m + 1");
  if (num_points < 100) throw ValidationError("reach_estimate: num_points must be >= 100");
  if (!(box > 0.0)) throw ValidationError("reach_estimate: box must be > 0");

  RandomStream xs_rng(seed, Stream::inputs);
  std::vector<double> xs(n_small);
  for (auto& x : xs) x = xs_rng.normal();

  // Prefix-nested: the first N points are the same for every num_points >= N.
  RandomStream th_rng(seed, Stream::sampling);
  std::vector<std::vector<double>> points;
  std::vector<Matrix> tangents;
  for (std::size_t s = 0; s < num_points; ++s) {
    std::vector<double> flat(2 * m);
    for (auto& v : flat) v = th_rng.uniform(-box, box);
    const Param p = Param::from_flat(flat);
    std::vector<double> image(n_small);
    for (std::size_t i = 0; i < n_small; ++i) image[i] = forward(p, xs[i]);
    const Matrix jac = output_jacobian(p, xs);
    points.push_back(std::move(image));
    tangents.push_back(numerical_rank(jac) == 2 * m ? jac : Matrix());
  }
  return reach_from_samples(points, tangents);
}

namespace {

std::size_t mode_of(const std::vector<std::size_t>& xs) {
  std::map<std::size_t, std::size_t> counts;
  for (auto x : xs) ++counts[x];
  std::size_t best = 0, best_count = 0;
  for (auto [value, c] : counts) {
    if (c > best_count) {
      best = value;
      best_count = c;
    }
  }
  return best;
}

SpectralWindow summarize_window(const Trajectory& traj, std::vector<std::size_t> idx) {
  SpectralWindow w;
  std::vector<std::size_t> pos, unstable;
  for (auto i : idx) {
    const auto fi = flow_index(*traj.records[i].eigs);
    pos.push_back(fi.n_pos);
    unstable.push_back(fi.flow_unstable);
  }
  w.records = std::move(idx);
  w.n_pos_mode = mode_of(pos);
  w.flow_unstable_mode = mode_of(unstable);
  return w;
}

}  // namespace

SpectralContrast spectral_contrast(const Trajectory& trajectory, const PlateauReport& plateaus) {
  const auto& recs = trajectory.records;
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    if (!r.eigs || !r.dist_optimal) throw ValidationError("spectral_contrast: records need eigs and dist_optimal");
    dmin = std::min(dmin, *r.dist_optimal);
  }
  std::vector<bool> near(recs.size(), false);
  std::vector<std::size_t> near_idx, plateau_idx;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (*recs[i].dist_optimal <= 1.5 * dmin) {
      near[i] = true;
      near_idx.push_back(i);
    }
  }
  for (const auto& iv : plateaus.intervals)
    for (std::size_t i = iv.first_record; i <= iv.last_record && i < recs.size(); ++i)
      if (!near[i]) plateau_idx.push_back(i);
  if (near_idx.empty() || plateau_idx.empty()) throw ValidationError("spectral_contrast: empty window");

  SpectralContrast sc;
  sc.plateau = summarize_window(trajectory, std::move(plateau_idx));
  sc.near_optimal = summarize_window(trajectory, std::move(near_idx));
  sc.hessian_positive_difference =
      static_cast<long>(sc.plateau.n_pos_mode) - static_cast<long>(sc.near_optimal.n_pos_mode);
  sc.flow_unstable_difference =
      static_cast<long>(sc.plateau.flow_unstable_mode) - static_cast<long>(sc.near_optimal.flow_unstable_mode);
  return sc;
}

}  // namespace mlpdyn
