#include <doctest.h>

#include <cmath>

#include "mlpdyn/data.hpp"
#include "mlpdyn/dynamics.hpp"
#include "mlpdyn/error.hpp"
#include "mlpdyn/objective.hpp"

using namespace mlpdyn;

namespace {

Dataset single(double x, double y) {
  Dataset d;
  d.x = {x};
  d.y = {y};
  return d;
}

GDConfig quick(std::uint64_t iters, double eta = 0.05) {
  GDConfig c;
  c.eta = eta;
  c.max_iter = iters;
  c.max_records = 200;
  return c;
}

}  // namespace

TEST_CASE("gd_step examples") {
  const auto d = generate(20, 0.2, 1);
  CHECK(gd_step(Param::zeros(2), d, 0.1) == Param::zeros(2));
  const Param p({0.3, -0.2}, {1.1, 0.4});
  CHECK(gd_step(p, d, 0.0) == p);

  const auto next = gd_step(Param({1.0}, {0.0}), single(1.0, 1.0), 0.1);
  CHECK(next.v(0) == doctest::Approx(1.0));
  CHECK(next.w(0) == doctest::Approx(0.1));

  // theta - eta * grad.
  const auto g = gradient(p, d).flat();
  const auto s = gd_step(p, d, 0.05).flat();
  const auto f = p.flat();
  for (std::size_t j = 0; j < 4; ++j) CHECK(s[j] == doctest::Approx(f[j] - 0.05 * g[j]).epsilon(1e-15));
}

TEST_CASE("geometric schedule") {
  const auto s = geometric_schedule(2'000'000, 1.05, 5000);
  CHECK(s.front() == 0);
  CHECK(s.back() == 2'000'000);
  CHECK(s.size() <= 5000);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
  const auto tight = geometric_schedule(1000, 1.01, 10);
  CHECK(tight.size() <= 10);
  CHECK(tight.front() == 0);
  CHECK(tight.back() == 1000);
  CHECK(geometric_schedule(0, 1.05, 10) == std::vector<std::uint64_t>{0});
}

TEST_CASE("config validation") {
  GDConfig c;
  CHECK_NOTHROW(c.validate());
  c.eta = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = GDConfig{};
  c.quadrature = "trapezoid";
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = GDConfig{};
  c.kernel = "mmx";
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = GDConfig{};
  c.max_records = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("run from a fixed point") {
  auto c = quick(1000);
  c.grad_tol = 1e-12;
  const auto tr = run(Param::zeros(2), generate(30, 0.2, 3), c);
  CHECK(tr.status == TerminalStatus::converged);
  CHECK(tr.terminal().t == 0);
  const auto rep = descent_check(tr);
  CHECK(rep.monotone);
  CHECK(rep.ratios == 0);
}

TEST_CASE("run bookkeeping and determinism") {
  const auto d = generate(100, 0.2, 5);
  const auto theta0 = random_init(2, 3);
  const auto c = quick(20000);
  const auto a = run(theta0, d, c);
  const auto b = run(theta0, d, c);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].theta == b.records[i].theta);
    CHECK(a.records[i].loss == b.records[i].loss);
  }
  CHECK(a.records.front().t == 0);
  CHECK(a.records.front().theta == theta0);
  CHECK(a.terminal().t == 20000);
  CHECK(a.status == TerminalStatus::budget_exhausted);
  CHECK(a.dataset_fingerprint == fingerprint(d));

  // Recorded theta matches stepping by hand.
  Param p = theta0;
  for (int i = 0; i < 100; ++i) p = gd_step(p, d, c.eta, kernels::by_name(a.kernel));
  for (const auto& r : a.records)
    if (r.t == 100) CHECK(r.theta == p);

  for (std::size_t i = 1; i < a.records.size(); ++i) CHECK(a.records[i].loss <= a.records[i - 1].loss + 1e-12);
  const auto rep = descent_check(a);
  CHECK(rep.monotone);
  CHECK(rep.kappa_min > 0);
  CHECK(rep.ratios == 20000);
}

TEST_CASE("symmetry equivariance") {
  const auto d = generate(100, 0.2, 8);
  const auto theta0 = random_init(2, 4);
  const auto c = quick(5000);
  const auto base = run(theta0, d, c);
  for (const auto& g : symmetry_group(2)) {
    const auto img = run(g.apply(theta0), d, c);
    REQUIRE(img.records.size() == base.records.size());
    for (std::size_t i = 0; i < img.records.size(); ++i) {
      CHECK(std::abs(img.records[i].loss - base.records[i].loss) <= 1e-12);
      CHECK(orbit_distance(img.records[i].theta, base.records[i].theta) <= 1e-10);
    }
  }
}

TEST_CASE("divergence and overshoot") {
  const auto d = generate(50, 0.2, 2);
  auto c = quick(2000, 50.0);
  c.diverge_norm = 1e3;
  const auto tr = run(Param({3.0, -2.0}, {0.5, 1.0}), d, c);
  const auto rep = descent_check(tr);
  CHECK_FALSE(rep.monotone);
  if (tr.status == TerminalStatus::diverged) CHECK(tr.terminal().theta.norm() > c.diverge_norm);
  CHECK(!tr.diagnostic.empty());
}

TEST_CASE("spectrum recording") {
  auto c = quick(100);
  c.record_spectrum = true;
  const auto tr = run(random_init(2, 1), generate(40, 0.1, 1), c);
  for (const auto& r : tr.records) {
    REQUIRE(r.eigs.has_value());
    CHECK(r.eigs->size() == 4);
    CHECK(std::is_sorted(r.eigs->begin(), r.eigs->end()));
  }
}

TEST_CASE("random_init") {
  const auto a = random_init(3, 9, 2.0);
  CHECK(a == random_init(3, 9, 2.0));
  CHECK(a != random_init(3, 10, 2.0));
  for (double x : a.flat()) CHECK(std::abs(x) <= 2.0);
}
