#include <doctest.h>

#include <cmath>
#include <vector>

#include "mlpdyn/analysis.hpp"
#include "mlpdyn/data.hpp"
#include "mlpdyn/error.hpp"
#include "mlpdyn/objective.hpp"
#include "mlpdyn/rng.hpp"

using namespace mlpdyn;

namespace {

Param p2(double v1, double v2, double w1, double w2) { return Param({v1, v2}, {w1, w2}); }

// Distance to a piece found by grid search plus pattern refinement over its
// own coordinates; no projection formula involved.
double brute_piece_distance(const std::vector<double>& q, const AffinePiece& piece) {
  const std::size_t k = piece.dim();
  auto dist2 = [&](const std::vector<double>& c) {
    const auto p = piece.point_at(c);
    double s = 0;
    for (std::size_t i = 0; i < q.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
    return s;
  };
  std::vector<double> c(k, 0.0), best_c(k, 0.0);
  double best = dist2(c);
  if (k == 1) {
    for (double a = -12; a <= 12; a += 0.01)
      if (double s = dist2({a}); s < best) best = s, best_c = {a};
  } else if (k == 2) {
    for (double a = -12; a <= 12; a += 0.05)
      for (double b = -12; b <= 12; b += 0.05)
        if (double s = dist2({a, b}); s < best) best = s, best_c = {a, b};
  }
  for (double h = 0.05; h > 1e-10; h *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t j = 0; j < k; ++j)
        for (double sgn : {1.0, -1.0}) {
          auto t = best_c;
          t[j] += sgn * h;
          if (double s = dist2(t); s < best) best = s, best_c = t, moved = true;
        }
    }
  }
  return std::sqrt(best);
}

double max_function_gap(const Param& a, const Param& b) {
  double gap = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = -4.0 + 8.0 * i / 99.0;
    gap = std::max(gap, std::abs(forward(a, x) - forward(b, x)));
  }
  return gap;
}

Trajectory synthetic(const std::vector<std::uint64_t>& ts, const std::vector<double>& losses) {
  Trajectory tr;
  tr.config.eta = 0.05;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    TrajectoryRecord r;
    r.t = ts[i];
    r.theta = p2(0.1 * static_cast<double>(i), 0, 1, 1);
    r.loss = losses[i];
    r.grad_norm = 1e-3;
    tr.records.push_back(r);
  }
  return tr;
}

}  // namespace

TEST_CASE("optimal region membership") {
  const auto opt = optimal_region();
  CHECK(opt.kind == RegionKind::optimal);
  CHECK(region_distance(p2(2, 0, 1, 0.37), opt) < 1e-15);
  CHECK(region_distance(p2(1, 1, 1, 1), opt) < 1e-15);
  CHECK(region_distance(p2(-1, -1, -1, -1), opt) < 1e-15);
  CHECK(region_distance(p2(0.0, 2, -3.0, 1), opt) < 1e-15);
  CHECK(region_distance(p2(1, 1, 1, 1.2), opt) == doctest::Approx(0.2));
  CHECK_THROWS_AS(optimal_region(3), ValidationError);

  // Sampled points reproduce the teacher.
  RandomStream rs(1, Stream::sampling);
  for (const auto& piece : opt.pieces) {
    for (int s = 0; s < 5; ++s) {
      std::vector<double> c(piece.geometry.dim());
      for (auto& x : c) x = rs.uniform(-3, 3);
      const auto theta = Param::from_flat(piece.geometry.point_at(c));
      CHECK(max_function_gap(theta, Param({2.0}, {1.0})) <= 1e-12);
    }
  }
}

TEST_CASE("region distance against brute force") {
  const Dataset d = generate(100, 0.2, 4);
  const auto regions = {optimal_region(), singular_region(d)};
  RandomStream rs(5, Stream::sampling);
  for (const auto& region : regions) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto theta = p2(rs.uniform(-3, 3), rs.uniform(-3, 3), rs.uniform(-3, 3), rs.uniform(-3, 3));
      double brute = INFINITY;
      for (const auto& piece : region.pieces) brute = std::min(brute, brute_piece_distance(theta.flat(), piece.geometry));
      CHECK(std::abs(region_distance(theta, region) - brute) < 1e-6);

      for (const auto& g : symmetry_group(2))
        CHECK(std::abs(region_distance(g.apply(theta), region) - region_distance(theta, region)) <= 1e-12);
    }
  }
}

TEST_CASE("one-neuron optimum") {
  const auto clean = solve_one_neuron_optimum(generate(100, 0.0, 42));
  CHECK(std::abs(clean.v(0) - 2.0) < 1e-6);
  CHECK(std::abs(clean.w(0) - 1.0) < 1e-6);

  auto zero = generate(50, 0.0, 1);
  for (auto& y : zero.y) y = 0.0;
  CHECK(std::abs(solve_one_neuron_optimum(zero).v(0)) < 1e-12);

  Dataset flat;
  flat.x = {0.0, 0.0};
  flat.y = {1.0, 2.0};
  CHECK_THROWS_AS(solve_one_neuron_optimum(flat), ValidationError);

  // Dense (v, w) grid with local refinement as the oracle.
  const auto d = generate(100, 0.2, 42);
  const auto o1 = solve_one_neuron_optimum(d);
  CHECK(o1.w(0) > 0);
  auto loss = [&](double v, double w) { return training_loss(Param({v}, {w}), d, kernels::scalar()); };
  double bv = 0, bw = 0, best = loss(0, 0);
  for (double v = 0; v <= 4; v += 0.02)
    for (double w = 0; w <= 4; w += 0.02)
      if (double l = loss(v, w); l < best) best = l, bv = v, bw = w;
  for (double h = 0.02; h > 1e-9; h *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (auto [dv, dw] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}})
        if (double l = loss(bv + dv, bw + dw); l < best) best = l, bv += dv, bw += dw, moved = true;
    }
  }
  CHECK(std::abs(o1.v(0) - bv) < 1e-3);
  CHECK(std::abs(o1.w(0) - bw) < 1e-3);
  CHECK(gradient(o1, d).norm() <= 1e-10);
}

TEST_CASE("singular region") {
  const auto d = generate(100, 0.2, 42);
  const auto o1 = solve_one_neuron_optimum(d);
  const auto sing = singular_region(o1);
  CHECK(sing.kind == RegionKind::singular);
  CHECK(region_distance(p2(3, -3, 1.4, 1.4), sing) < 1e-15);
  CHECK(region_distance(p2(0, 0, 0.3, -2), sing) < 1e-15);
  CHECK(region_distance(p2(o1.v(0) / 2, o1.v(0) / 2, o1.w(0), o1.w(0)), sing) < 1e-14);
  CHECK(region_distance(p2(0, o1.v(0), 5.0, o1.w(0)), sing) < 1e-14);

  // Points on each piece reproduce the reduced network; split pieces are critical.
  RandomStream rs(2, Stream::sampling);
  for (const auto& piece : sing.pieces) {
    for (int s = 0; s < 3; ++s) {
      std::vector<double> c(piece.geometry.dim());
      for (auto& x : c) x = rs.uniform(-2, 2);
      const auto theta = Param::from_flat(piece.geometry.point_at(c));
      CHECK(max_function_gap(theta, piece.reduced) <= 1e-12);
      if (piece.geometry.label().rfind("o1_split", 0) == 0) CHECK(gradient(theta, d).norm() < 1e-8);
    }
  }
}

TEST_CASE("flow index") {
  const std::vector<double> id{1, 1, 1, 1};
  const auto a = flow_index(id);
  CHECK(a.n_pos == 4);
  CHECK(a.n_neg == 0);
  CHECK(a.flow_unstable == 0);
  const std::vector<double> e{-1, -1e-12, 1e-12, 2};
  const auto b = flow_index(e, 1e-9);
  CHECK(b.n_pos == 1);
  CHECK(b.n_neg == 1);
  CHECK(b.n_zero == 2);
  CHECK(b.flow_unstable == 1);
}

TEST_CASE("plateau detection") {
  std::vector<std::uint64_t> ts{0};
  for (double t = 1; t <= 1000; t *= 1.2) ts.push_back(static_cast<std::uint64_t>(std::round(t)));
  ts.push_back(1000);
  std::vector<double> flat(ts.size(), 0.3);
  const auto one = detect_plateaus(synthetic(ts, flat));
  REQUIRE(one.intervals.size() == 1);
  CHECK(one.intervals[0].first_record == 0);
  CHECK(one.intervals[0].last_record == ts.size() - 1);
  CHECK(one.intervals[0].mean_loss == doctest::Approx(0.3));

  std::vector<double> decay(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) decay[i] = std::pow(0.9, static_cast<double>(i));
  CHECK(detect_plateaus(synthetic(ts, decay)).intervals.empty());

  // Two flat stretches separated by a drop; intervals are disjoint and ordered.
  std::vector<double> steps(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) steps[i] = ts[i] < 30 ? 1.0 : 0.01;
  const auto two = detect_plateaus(synthetic(ts, steps));
  REQUIRE(two.intervals.size() == 2);
  CHECK(two.intervals[0].t_end < two.intervals[1].t_start);
}

TEST_CASE("spectral contrast") {
  std::vector<std::uint64_t> ts{0, 1, 10, 100, 1000, 10000};
  auto tr = synthetic(ts, {1, 1, 1, 1, 0.1, 0.1});
  const std::vector<std::vector<double>> eigs{{-1, 1, 2, 3}, {-1, 1, 2, 3}, {-1, -2, 2, 3},
                                              {-1, -2, 2, 3}, {1, 2, 3, 4}, {1, 2, 3, 4}};
  const std::vector<double> dist{2, 2, 2, 2, 0.01, 0.012};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tr.records[i].eigs = eigs[i];
    tr.records[i].dist_optimal = dist[i];
  }
  PlateauReport pr;
  PlateauInterval iv;
  iv.first_record = 1;
  iv.last_record = 3;
  pr.intervals.push_back(iv);
  const auto c = spectral_contrast(tr, pr);
  CHECK(c.near_optimal.records == std::vector<std::size_t>{4, 5});
  CHECK(c.plateau.n_pos_mode == 2);
  CHECK(c.near_optimal.n_pos_mode == 4);
  CHECK(c.hessian_positive_difference == -2);
  CHECK(c.flow_unstable_difference == 2);

  tr.records[2].eigs.reset();
  CHECK_THROWS_AS(spectral_contrast(tr, pr), ValidationError);
}

TEST_CASE("uniqueness bookkeeping") {
  const auto d = generate(100, 0.2, 4);
  GDConfig c;
  c.max_iter = 200;
  c.max_records = 10;
  CHECK_THROWS_AS(uniqueness_from_starts(d, {p2(1, 1, 0.5, 0.5), p2(1, 1, 0.5, 0.5)}, c), ValidationError);
  CHECK_THROWS_AS(uniqueness_experiment(d, 1, c, 1), ValidationError);

  const auto rep = uniqueness_experiment(d, 4, c, 10, 2, 2);
  CHECK(rep.k_started == 4);
  CHECK(rep.k_converged + rep.k_diverged + rep.k_excluded_synchronized == rep.k_started);
  CHECK(rep.cluster_count >= 1);
  CHECK(rep.runs[2].seed == 12);
  // Thread count does not change the outcome.
  const auto serial = uniqueness_experiment(d, 4, c, 10, 2, 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(*serial.runs[i].terminal == *rep.runs[i].terminal);
}

TEST_CASE("probability bound") {
  CHECK(prob_bound(10.0, 1.0, 100).value == 0.0);
  CHECK(prob_bound(10.0, 1.0, 100).valid);
  CHECK_FALSE(prob_bound(5.0, 1.0, 100).valid);
  CHECK(prob_bound(5.0, 1.0, 100).value == 0.0);
  CHECK(prob_bound(12.0, 1.0, 100).value == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-15));
  CHECK(prob_bound(22.0, 1.0, 100).value > 1.0 - 1e-12);
  double prev = 0;
  for (double r = 10; r < 20; r += 0.5) {
    const double v = prob_bound(r, 1.0, 100).value;
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prob_bound(1.0, 0.05, 100).value >= prob_bound(1.0, 0.08, 100).value);
  CHECK_THROWS_AS(prob_bound(0.0, 1.0, 10), ValidationError);
  CHECK_THROWS_AS(prob_bound(1.0, -1.0, 10), ValidationError);
}

TEST_CASE("chi-square check") {
  const auto zero = chi_square_check(p2(1, 1, 1, 1), 100, 0.0, 100, 1);
  CHECK(zero.mean == 0.0);
  CHECK(zero.variance == 0.0);

  const auto s = chi_square_check(Param({2.0, 0.0}, {1.0, -0.5}), 100, 0.2, 2000, 7);
  CHECK(std::abs(s.mean - 0.02) / 0.02 < 0.02);
  CHECK(std::abs(s.variance - 8e-6) / 8e-6 < 0.15);
  CHECK(s.ks_pvalue > 0.001);

  CHECK_THROWS_AS(chi_square_check(p2(1, 1, 1, 1.1), 100, 0.2, 100, 1), ValidationError);
  CHECK_THROWS_AS(chi_square_check(p2(1, 1, 1, 1), 100, 0.2, 99, 1), ValidationError);
}

TEST_CASE("jacobian rank sweep") {
  const auto rep = jacobian_rank_sweep(generate(100, 0.2, 1), 2, 50, 3);
  CHECK(rep.full_rank == 4);
  REQUIRE(rep.generic_ranks.size() == 50);
  for (auto r : rep.generic_ranks) CHECK(r == 4);
  REQUIRE(rep.degenerate.size() >= 2);
  for (const auto& c : rep.degenerate) CHECK(c.rank <= 3);
  CHECK_THROWS_AS(jacobian_rank_sweep(generate(3, 0.2, 1), 2, 5, 3), ValidationError);
}

TEST_CASE("reach estimator") {
  // Circle of radius 2: reach equals the radius.
  std::vector<std::vector<double>> pts;
  std::vector<Matrix> tan;
  RandomStream rs(8, Stream::sampling);
  for (int i = 0; i < 400; ++i) {
    const double a = rs.uniform(0, 2 * M_PI);
    pts.push_back({2 * std::cos(a), 2 * std::sin(a)});
    Matrix t(2, 1);
    t(0, 0) = -std::sin(a);
    t(1, 0) = std::cos(a);
    tan.push_back(t);
  }
  CHECK(std::abs(reach_from_samples(pts, tan).reach - 2.0) < 0.2);

  const auto small = reach_estimate(1, 4, 100, 9, 2.0);
  const auto large = reach_estimate(1, 4, 200, 9, 2.0);
  CHECK(small.reach > 0);
  CHECK(large.reach <= small.reach);
  CHECK(small.p != small.q);
}
