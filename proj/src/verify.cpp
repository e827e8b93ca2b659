#include "mlpdyn/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mlpdyn/analysis.hpp"
#include "mlpdyn/error.hpp"
#include "mlpdyn/objective.hpp"
#include "mlpdyn/reference.hpp"
#include "mlpdyn/rng.hpp"

namespace mlpdyn::verify {

namespace {

using Check = std::function<SuiteResult(const Options&)>;

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(3) << x;
  return s.str();
}

double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

Param random_param(RandomStream& rs, std::size_t m, double box) {
  std::vector<double> f(2 * m);
  for (auto& x : f) x = rs.uniform(-box, box);
  return Param::from_flat(f);
}

std::vector<double> fd_gradient(const Param& p, const Dataset& d, double h) {
  auto f = p.flat();
  std::vector<double> g(f.size());
  for (std::size_t a = 0; a < f.size(); ++a) {
    auto up = f, dn = f;
    up[a] += h;
    dn[a] -= h;
    g[a] = (training_loss(Param::from_flat(up), d, kernels::scalar()) -
            training_loss(Param::from_flat(dn), d, kernels::scalar())) /
           (2.0 * h);
  }
  return g;
}

SuiteResult gradient_suite(const Options& opt) {
  const auto d = generate(20, reference::kNoisyTau, opt.seed);
  RandomStream rs(opt.seed, Stream::sampling);
  double worst = 0.0, worst_sym = 0.0;
  const auto group = symmetry_group(2);
  for (int s = 0; s < 100; ++s) {
    const auto p = random_param(rs, 2, 3.0);
    auto g = gradient(p, d).flat();
    if (opt.break_gradient) g[0] *= 1.001;
    const auto fd = fd_gradient(p, d, 1e-5);
    std::vector<double> diff(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) diff[a] = g[a] - fd[a];
    worst = std::max(worst, max_abs(diff) / std::max(max_abs(fd), 1e-300));

    const double l0 = training_loss(p, d);
    const double n0 = gradient(p, d).norm();
    for (const auto& el : group) {
      const auto q = el.apply(p);
      worst_sym = std::max(worst_sym, std::abs(training_loss(q, d) - l0) / std::max(l0, 1e-300));
      worst_sym = std::max(worst_sym, std::abs(gradient(q, d).norm() - n0) / std::max(n0, 1e-300));
    }
  }
  const bool ok = worst < 1e-6 && worst_sym <= 1e-12;
  return {"gradient", ok, "max rel FD error " + fmt(worst) + " (< 1e-6), symmetry " + fmt(worst_sym), 0};
}

SuiteResult hessian_suite(const Options& opt) {
  const auto d = generate(20, reference::kNoisyTau, opt.seed);
  RandomStream rs(opt.seed + 1, Stream::sampling);
  double worst = 0.0, asym = 0.0;
  const double h = 1e-5;
  for (int s = 0; s < 100; ++s) {
    const auto p = random_param(rs, 2, 3.0);
    const auto hm = hessian(p, d);
    const auto f = p.flat();
    double scale = 0.0, err = 0.0;
    for (std::size_t a = 0; a < f.size(); ++a) {
      auto up = f, dn = f;
      up[a] += h;
      dn[a] -= h;
      const auto gu = gradient(Param::from_flat(up), d, kernels::scalar()).flat();
      const auto gd = gradient(Param::from_flat(dn), d, kernels::scalar()).flat();
      for (std::size_t b = 0; b < f.size(); ++b) {
        const double fd = (gu[b] - gd[b]) / (2.0 * h);
        scale = std::max(scale, std::abs(fd));
        err = std::max(err, std::abs(hm(b, a) - fd));
        asym = std::max(asym, std::abs(hm(a, b) - hm(b, a)));
      }
    }
    worst = std::max(worst, err / std::max(scale, 1e-300));
  }
  const bool ok = worst < 1e-5 && asym <= 1e-12;
  return {"hessian", ok, "max rel FD error " + fmt(worst) + " (< 1e-5), asymmetry " + fmt(asym), 0};
}

SuiteResult quadrature_suite(const Options& opt) {
  auto moments = [](const QuadratureRule& rule) {
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t k = 0; k < rule.order(); ++k) {
      const double x2 = rule.nodes[k] * rule.nodes[k];
      m2 += rule.weights[k] * x2;
      m4 += rule.weights[k] * x2 * x2;
    }
    return std::max(std::abs(m2 - 1.0), std::abs(m4 - 3.0));
  };
  const auto hermite = gauss_hermite_rule(kDefaultQuadratureOrder);
  const auto rule = make_rule(GDConfig{}.quadrature, GDConfig{}.quad_order);
  const double moment_err = std::max(moments(hermite), moments(rule));

  // Both rules agree where Gauss-Hermite is resolved (|w| <= 1).
  const auto hermite_fine = gauss_hermite_rule(kMaxQuadratureOrder);
  RandomStream rs(opt.seed + 2, Stream::sampling);
  double rule_gap = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto p = random_param(rs, 2, 1.0);
    rule_gap = std::max(rule_gap, std::abs(generalization_error(p, rule) - generalization_error(p, hermite_fine)));
  }

  std::vector<Param> thetas;
  for (int s = 0; s < 20; ++s) thetas.push_back(random_param(rs, 2, 3.0));
  // Monte Carlo with one shared x sample.
  RandomStream xs_rng(opt.seed + 2, Stream::inputs);
  std::vector<double> xs(opt.mc_samples);
  for (auto& x : xs) x = xs_rng.normal();
  std::vector<double> teacher(xs.size()), fx(xs.size());
  const auto& kern = kernels::best();
  const double tv[1] = {2.0}, tw[1] = {1.0};
  kern.forward(tv, tw, 1, xs.data(), teacher.data(), xs.size());
  double worst_z = 0.0;
  for (const auto& p : thetas) {
    kern.forward(p.v().data(), p.w().data(), p.m(), xs.data(), fx.data(), xs.size());
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = fx[i] - teacher[i];
      s1 += e * e;
      s2 += e * e * e * e;
    }
    const double nn = static_cast<double>(xs.size());
    const double mc = s1 / nn;
    const double se = std::sqrt(std::max(s2 / nn - mc * mc, 0.0) / nn);
    const double z = std::abs(generalization_error(p, rule) - mc) / std::max(se, 1e-300);
    worst_z = std::max(worst_z, z);
  }
  const bool ok = moment_err <= 1e-12 && rule_gap <= 1e-10 && worst_z <= 3.0;
  return {"quadrature", ok,
          "moment error " + fmt(moment_err) + ", panel vs Gauss-Hermite(256) " + fmt(rule_gap) +
              ", max MC z-score " + fmt(worst_z) + " over 20 points",
          0};
}

// The training error carries a 1/2 that the generalization error does not,
// so 2L is the estimator of R compared here.
SuiteResult limit_suite(const Options& opt) {
  const Param p({1.5, -0.7}, {0.8, 2.1});
  const double r = generalization_error(p, make_rule("panel", 0));
  std::vector<double> gaps;
  double last_se = 0.0;
  for (std::size_t n : {100u, 10'000u, 1'000'000u}) {
    const auto d = generate(n, 0.0, opt.seed + 3);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = residual(d.x[i], d.y[i], p);
      s1 += e * e;
      s2 += e * e * e * e;
    }
    const double nn = static_cast<double>(n);
    const double two_l = 2.0 * training_loss(p, d);
    gaps.push_back(std::abs(two_l - r));
    last_se = std::sqrt(std::max(s2 / nn - (s1 / nn) * (s1 / nn), 0.0) / nn);
  }
  const bool ok = gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 3.0 * last_se;
  return {"limit", ok,
          "|2L - R| = " + fmt(gaps[0]) + ", " + fmt(gaps[1]) + ", " + fmt(gaps[2]) + " (3 SE = " +
              fmt(3.0 * last_se) + ")",
          0};
}

SuiteResult chi2_suite(const Options& opt) {
  const auto star = canonicalize(Param({2.0, 0.0}, {1.0, 1.0}));
  const auto st = chi_square_check(star, reference::kN, reference::kNoisyTau, opt.num_datasets, opt.seed + 4);
  const double mean_rel = std::abs(st.mean - st.expected_mean) / st.expected_mean;
  const double var_rel = std::abs(st.variance - st.expected_variance) / st.expected_variance;
  const bool ok = mean_rel < 0.02 && var_rel < 0.10 && st.ks_pvalue > 0.01 && st.zero_gradient_count == 0;
  return {"chi2", ok,
          "mean rel " + fmt(mean_rel) + ", var rel " + fmt(var_rel) + ", KS p " + fmt(st.ks_pvalue) +
              ", min |grad| " + fmt(st.min_grad_norm) + " over " + std::to_string(st.num_datasets) + " datasets",
          0};
}

SuiteResult probbound_suite(const Options&) {
  const std::size_t n = 100;
  const double sn = std::sqrt(static_cast<double>(n));
  bool ok = prob_bound(sn * 0.2, 0.2, n).value == 0.0;
  ok = ok && std::abs(prob_bound((sn + 2.0) * 0.2, 0.2, n).value - (1.0 - std::exp(-2.0))) <= 1e-12;
  ok = ok && prob_bound((sn + 12.0) * 0.2, 0.2, n).value > 1.0 - 1e-12;
  ok = ok && !prob_bound(0.5 * sn * 0.2, 0.2, n).valid;
  // Monotone in r (tau fixed) and in tau (r fixed) on the validity domain.
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double v = prob_bound(0.2 * (sn + 0.05 * i), 0.2, n).value;
    ok = ok && v >= prev;
    prev = v;
  }
  prev = 2.0;
  const double r = 0.2 * (sn + 5.0);
  for (int i = 0; i < 100; ++i) {
    const double tau = r / (sn + 5.0) * (0.5 + 0.005 * i);
    const auto pb = prob_bound(r, tau, n);
    if (!pb.valid) break;
    ok = ok && pb.value <= prev;
    prev = pb.value;
  }
  return {"probbound", ok, "boundary, e^-2 point, tau -> 0 limit, monotonicity", 0};
}

SuiteResult jacobian_suite(const Options& opt) {
  const auto d = generate(reference::kN, reference::kNoisyTau, opt.seed + 5);
  const auto rep = jacobian_rank_sweep(d, 2, 50, opt.seed + 5);
  const bool generic = std::all_of(rep.generic_ranks.begin(), rep.generic_ranks.end(),
                                   [&](std::size_t r) { return r == rep.full_rank; });
  bool degenerate = !rep.degenerate.empty();
  std::string detail = std::string(generic ? "generic rank 4" : "generic rank deficient");
  for (const auto& c : rep.degenerate) {
    degenerate = degenerate && c.rank <= 3;
    detail += ", " + c.label + " rank " + std::to_string(c.rank);
  }
  return {"jacobian", generic && degenerate, detail, 0};
}

SuiteResult regions_suite(const Options& opt) {
  const auto d = generate(reference::kN, reference::kNoisyTau, reference::kDataSeed);
  const auto o1 = solve_one_neuron_optimum(d);
  const auto opt_set = optimal_region(2);
  const auto sing = singular_region(o1, 2);

  std::vector<double> grid(100);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -4.0 + 8.0 * static_cast<double>(i) / 99.0;

  RandomStream rs(opt.seed + 6, Stream::sampling);
  double fn_err = 0.0, crit = 0.0, sym = 0.0;
  for (const auto* set : {&opt_set, &sing}) {
    for (const auto& piece : set->pieces) {
      for (int s = 0; s < 100; ++s) {
        std::vector<double> c(piece.geometry.dim());
        for (auto& x : c) x = rs.uniform(-3.0, 3.0);
        const auto p = Param::from_flat(piece.geometry.point_at(c));
        for (double x : grid) fn_err = std::max(fn_err, std::abs(forward(p, x) - forward(piece.reduced, x)));
        if (piece.geometry.label().rfind("o1_split", 0) == 0) crit = std::max(crit, gradient(p, d).norm());
      }
    }
  }
  const auto group = symmetry_group(2);
  for (int s = 0; s < 20; ++s) {
    const auto p = random_param(rs, 2, 3.0);
    const double base_o = region_distance(p, opt_set), base_s = region_distance(p, sing);
    for (const auto& g : group) {
      sym = std::max(sym, std::abs(region_distance(g.apply(p), opt_set) - base_o));
      sym = std::max(sym, std::abs(region_distance(g.apply(p), sing) - base_s));
    }
  }
  const bool ok = fn_err <= 1e-12 && crit < 1e-8 && sym <= 1e-12;
  return {"regions", ok,
          "function error " + fmt(fn_err) + ", max |grad| on O1 split " + fmt(crit) + ", symmetry " + fmt(sym), 0};
}

SuiteResult reach_suite(const Options& opt) {
  std::vector<std::vector<double>> pts;
  std::vector<Matrix> tans;
  RandomStream rs(opt.seed + 7, Stream::sampling);
  for (int i = 0; i < 1000; ++i) {
    const double a = rs.uniform(0.0, 2.0 * std::numbers::pi);
    pts.push_back({2.0 * std::cos(a), 2.0 * std::sin(a)});
    tans.push_back(Matrix{{-std::sin(a)}, {std::cos(a)}});
  }
  const double circle = reach_from_samples(pts, tans).reach;
  const auto small = reach_estimate(1, 4, 200, opt.seed + 7, 3.0);
  const bool ok = std::abs(circle - 2.0) <= 0.2 && small.reach > 0.0;
  return {"reach", ok, "circle radius 2 -> " + fmt(circle) + ", m=1 n=4 -> " + fmt(small.reach), 0};
}

const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> r{
      {"gradient", gradient_suite}, {"hessian", hessian_suite},     {"quadrature", quadrature_suite},
      {"limit", limit_suite},       {"chi2", chi2_suite},           {"probbound", probbound_suite},
      {"jacobian", jacobian_suite}, {"regions", regions_suite},     {"reach", reach_suite},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

std::vector<SuiteResult> run(const Options& options) {
  for (const auto& s : options.suites)
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ValidationError("unknown suite '" + s + "'");
  std::vector<SuiteResult> results;
  for (const auto& [name, fn] : registry()) {
    if (!options.suites.empty() && std::find(options.suites.begin(), options.suites.end(), name) == options.suites.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
      r = fn(options);
    } catch (const std::exception& e) {
      r = {name, false, std::string("error: ") + e.what(), 0};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }
  return results;
}

void print_table(std::ostream& out, const std::vector<SuiteResult>& results) {
  for (const auto& r : results) {
    out << std::left << std::setw(12) << r.name << (r.passed ? "PASS  " : "FAIL  ") << std::right << std::fixed
        << std::setprecision(2) << std::setw(7) << r.seconds << "s  " << r.detail << '\n';
    out.unsetf(std::ios::floatfield);
  }
}

}  // namespace mlpdyn::verify
