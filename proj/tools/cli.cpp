#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

#include "mlpdyn/data.hpp"
#include "mlpdyn/error.hpp"
#include "mlpdyn/io.hpp"
#include "mlpdyn/rng.hpp"
#include "mlpdyn/verify.hpp"

namespace mlpdyn::cli {

namespace fs = std::filesystem;

ExperimentConfig::ExperimentConfig() {
  gd.eta = reference::kEta;
  gd.max_iter = reference::kMaxIter;
}

std::size_t ExperimentConfig::effective_workers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& key, const std::string& value) {
  double x = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x))
    throw ValidationError(key + ": '" + value + "' is not a finite number");
  return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t x = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec == std::errc() && ptr == end) return x;
  // Accept integral reals such as 2e6.
  const double d = parse_real(key, value);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19) throw ValidationError(key + ": '" + value + "' is not a count");
  return static_cast<std::uint64_t>(d);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError(key + ": '" + value + "' is not a boolean");
}

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec) && !overwrite)
    throw ValidationError("output directory " + dir.string() + " already exists; pass --overwrite to reuse it");
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const report::Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string panel_dir_name(double tau) { return "tau_" + format_double(tau); }

// Options shared by the experiment subcommands. Values are collected as
// strings and applied through apply_config after the config file, so flags
// take precedence.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, bool> switches;
  std::string config_path;
  CLI::Option* config_opt = nullptr;

  void option(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_option(flag, values[key], help);
  }
  void flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_flag(flag, switches[key], help);
  }
  void config(CLI::App* app) {
    config_opt = app->add_option("--config", config_path, "key = value experiment file");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (config_opt && config_opt->count() > 0)
      apply_config(cfg, parse_config_text(read_text_file(config_path), config_path));
    std::map<std::string, std::string> given;
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      auto sw = switches.find(key);
      given[key] = sw != switches.end() ? (sw->second ? "true" : "false") : values.at(key);
    }
    apply_config(cfg, given);
    return cfg;
  }
};

void add_data_flags(CLI::App* app, FlagSet& f) {
  f.option(app, "--n", "n", "number of samples");
  f.option(app, "--tau", "tau", "noise standard deviation");
  f.option(app, "--seed", "seed", "dataset seed");
  f.option(app, "--target", "target", "teacher id (2tanh, 2tanh-tanh4)");
}

void add_gd_flags(CLI::App* app, FlagSet& f) {
  f.option(app, "--eta", "eta", "learning rate");
  f.option(app, "--max-iter", "max_iter", "iteration budget");
  f.option(app, "--grad-tol", "grad_tol", "stop when ||grad L|| <= grad-tol");
  f.option(app, "--diverge-norm", "diverge_norm", "divergence threshold on ||theta||");
  f.option(app, "--log-ratio", "log_ratio", "ratio of the geometric recording schedule");
  f.option(app, "--max-records", "max_records", "cap on recorded entries");
  f.option(app, "--quadrature", "quadrature", "rule for the generalization error: panel or hermite");
  f.option(app, "--quad-order", "quad_order", "Gauss-Hermite order (with --quadrature hermite)");
  f.option(app, "--kernel", "kernel", "auto, scalar or avx2");
  f.option(app, "--m", "m", "hidden neurons");
  f.option(app, "--init-seed", "init_seed", "seed of the uniform initialization");
  f.option(app, "--init-box", "init_box", "half-width of the uniform initialization");
}

Dataset dataset_for(const ExperimentConfig& cfg, const std::string& data_path) {
  if (!data_path.empty()) return load(resolve_output(data_path));
  return generate(cfg.n, cfg.tau, cfg.seed, teacher_from_id(cfg.target));
}

report::Json dataset_json(const Dataset& d, const std::string& path) {
  report::Json j;
  j["source"] = path.empty() ? "generated" : path;
  j["n"] = d.n();
  j["tau"] = d.tau;
  j["seed"] = d.seed;
  j["target_id"] = d.target_id;
  j["generator_name"] = kGeneratorName;
  j["fingerprint"] = fingerprint(d);
  return j;
}

Param parse_theta(const std::string& text) {
  std::vector<double> flat;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) flat.push_back(parse_real("theta0", trim(cell)));
  if (flat.empty() || flat.size() % 2 != 0) throw ValidationError("theta0: expected v1..vm,w1..wm");
  return Param::from_flat(flat);
}

int cmd_gen_data(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.n < 1) throw ValidationError("n must be >= 1");
  if (!(cfg.tau >= 0.0)) throw ValidationError("tau must be >= 0");
  const auto d = generate(cfg.n, cfg.tau, cfg.seed, teacher_from_id(cfg.target));
  std::string rel = cfg.out;
  if (rel.empty())
    rel = "data/n" + std::to_string(cfg.n) + "_tau" + format_double(cfg.tau) + "_seed" + std::to_string(cfg.seed) +
          ".csv";
  const auto path = resolve_output(rel);
  if (fs::exists(path) && !cfg.overwrite)
    throw ValidationError(path.string() + " already exists; pass --overwrite to replace it");
  save(d, path);
  out << "wrote " << path.string() << " and " << sidecar_path(path).string() << '\n';
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& data_path, const std::string& theta0_text,
              std::ostream& out) {
  cfg.gd.validate();
  const auto d = dataset_for(cfg, data_path);
  const Param theta0 = theta0_text.empty() ? random_init(cfg.m, cfg.init_seed, cfg.init_box) : parse_theta(theta0_text);

  RecordAnnotator annotate;
  std::optional<RegionSet> opt_set, sing_set;
  if (cfg.gd.record_regions) {
    if (theta0.m() != 2) throw ValidationError("region distances are available for m = 2 only");
    opt_set = optimal_region(2);
    sing_set = singular_region(d, 2);
    annotate = region_annotator(*opt_set, *sing_set);
  }

  const auto dir = resolve_output(cfg.out.empty() ? "runs/train" : cfg.out);
  prepare_output_dir(dir, cfg.overwrite);
  const auto traj = run(theta0, d, cfg.gd, annotate);

  auto summary = report::summary_json(traj);
  summary["theta0"] = report::param_json(theta0);
  summary["dataset"] = dataset_json(d, data_path);
  summary["experiment"] = experiment_json(cfg);
  write_text_file(dir / "trajectory.csv", report::trajectory_csv(traj));
  if (opt_set) {
    write_json(dir / "regions_optimal.json", report::region_json(*opt_set));
    write_json(dir / "regions_singular.json", report::region_json(*sing_set));
    write_text_file(dir / "plateaus.csv", report::plateau_csv(detect_plateaus(traj), theta0.m()));
  }
  write_json(dir / "summary.json", summary);
  out << "status " << to_string(traj.status) << ", " << traj.records.size() << " records, terminal loss "
      << format_double(traj.terminal().loss) << ", wrote " << dir.string() << '\n';
  return kExitOk;
}

int cmd_multistart(const ExperimentConfig& cfg, const std::string& data_path, std::ostream& out) {
  if (cfg.k < 2) throw ValidationError("k must be >= 2");
  cfg.gd.validate();
  const auto d = dataset_for(cfg, data_path);
  const auto dir = resolve_output(cfg.out.empty() ? "runs/multistart" : cfg.out);
  prepare_output_dir(dir, cfg.overwrite);
  const auto rep = uniqueness_experiment(d, cfg.k, cfg.gd, cfg.init_seed, cfg.m, cfg.effective_workers());
  auto j = report::uniqueness_json(rep);
  j["dataset"] = dataset_json(d, data_path);
  j["experiment"] = experiment_json(cfg);
  write_json(dir / "uniqueness.json", j);
  out << "clusters " << rep.cluster_count << " (" << rep.k_converged << " of " << rep.k_started
      << " runs kept), max intra-cluster orbit distance " << format_double(rep.max_intra_cluster_orbit_distance)
      << ", wrote " << (dir / "uniqueness.json").string() << '\n';
  return kExitOk;
}

int cmd_reproduce(const ExperimentConfig& cfg, const std::vector<double>& taus, std::ostream& out) {
  cfg.gd.validate();
  for (double t : taus)
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("tau must be >= 0");
  const auto dir = resolve_output(cfg.out.empty() ? "runs/reproduce" : cfg.out);
  prepare_output_dir(dir, cfg.overwrite);

  std::vector<std::optional<Panel>> panels(taus.size());
  std::vector<std::exception_ptr> errors(taus.size());
  {
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(cfg.effective_workers(), taus.size());
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < taus.size(); i = next++) {
          try {
            panels[i] = run_panel(cfg, taus[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  report::Json manifest;
  manifest["experiment"] = experiment_json(cfg);
  manifest["panels"] = report::Json::array();
  for (const auto& p : panels) {
    const auto sub = dir / panel_dir_name(p->tau);
    fs::create_directories(sub);
    write_text_file(sub / "trajectory.csv", report::trajectory_csv(p->trajectory));
    write_text_file(sub / "plateaus.csv", report::plateau_csv(p->plateaus, p->theta0.m()));
    write_text_file(sub / "spectral.csv", report::spectral_csv(p->trajectory, p->contrast ? &*p->contrast : nullptr));
    write_json(sub / "regions_optimal.json", report::region_json(p->optimal));
    write_json(sub / "regions_singular.json", report::region_json(p->singular));
    auto summary = report::summary_json(p->trajectory);
    summary["tau"] = p->tau;
    summary["theta0"] = report::param_json(p->theta0);
    summary["one_neuron_optimum"] = report::param_json(p->one_neuron_optimum);
    summary["dataset"] = dataset_json(p->dataset, "");
    summary["plateau_count"] = p->plateaus.intervals.size();
    summary["spectral_contrast"] = p->contrast ? report::spectral_json(*p->contrast) : report::Json(nullptr);
    summary["experiment"] = experiment_json(cfg);
    write_json(sub / "summary.json", summary);
    manifest["panels"].push_back({{"tau", p->tau},
                                  {"dir", panel_dir_name(p->tau)},
                                  {"files",
                                   {"trajectory.csv", "summary.json", "plateaus.csv", "spectral.csv",
                                    "regions_optimal.json", "regions_singular.json"}}});
    out << panel_dir_name(p->tau) << ": status " << to_string(p->trajectory.status) << ", terminal loss "
        << format_double(p->trajectory.terminal().loss) << ", terminal gen_error "
        << format_double(p->trajectory.terminal().gen_error) << ", plateaus " << p->plateaus.intervals.size()
        << '\n';
  }
  write_json(dir / "manifest.json", manifest);
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  for (int lineno = 1; std::getline(ss, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "n") cfg.n = parse_uint(key, value);
    else if (key == "tau") cfg.tau = parse_real(key, value);
    else if (key == "seed") cfg.seed = parse_uint(key, value);
    else if (key == "target") cfg.target = value;
    else if (key == "m") cfg.m = parse_uint(key, value);
    else if (key == "init_seed") cfg.init_seed = parse_uint(key, value);
    else if (key == "init_box") cfg.init_box = parse_real(key, value);
    else if (key == "k") cfg.k = parse_uint(key, value);
    else if (key == "workers") cfg.workers = parse_uint(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "overwrite") cfg.overwrite = parse_bool(key, value);
    else if (key == "eta") cfg.gd.eta = parse_real(key, value);
    else if (key == "max_iter") cfg.gd.max_iter = parse_uint(key, value);
    else if (key == "log_ratio") cfg.gd.log_ratio = parse_real(key, value);
    else if (key == "max_records") cfg.gd.max_records = parse_uint(key, value);
    else if (key == "grad_tol") cfg.gd.grad_tol = parse_real(key, value);
    else if (key == "diverge_norm") cfg.gd.diverge_norm = parse_real(key, value);
    else if (key == "record_spectrum") cfg.gd.record_spectrum = parse_bool(key, value);
    else if (key == "record_regions") cfg.gd.record_regions = parse_bool(key, value);
    else if (key == "quad_order") cfg.gd.quad_order = parse_uint(key, value);
    else if (key == "quadrature") cfg.gd.quadrature = value;
    else if (key == "kernel") cfg.gd.kernel = value;
    else throw ValidationError("unknown config key '" + key + "'");
  }
  if (cfg.m < 1) throw ValidationError("m must be >= 1");
  if (!(cfg.init_box > 0.0)) throw ValidationError("init_box must be > 0");
  (void)teacher_from_id(cfg.target);
}

nlohmann::ordered_json experiment_json(const ExperimentConfig& cfg) {
  report::Json j;
  j["n"] = cfg.n;
  j["tau"] = cfg.tau;
  j["seed"] = cfg.seed;
  j["target"] = cfg.target;
  j["m"] = cfg.m;
  j["init_seed"] = cfg.init_seed;
  j["init_box"] = cfg.init_box;
  j["k"] = cfg.k;
  j["workers"] = cfg.workers;
  j["out"] = cfg.out;
  j["overwrite"] = cfg.overwrite;
  j["gd"] = report::config_json(cfg.gd);
  return j;
}

fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / p;
  return p;
}

Panel run_panel(const ExperimentConfig& cfg, double tau) {
  Panel p;
  p.tau = tau;
  p.dataset = generate(cfg.n, tau, cfg.seed, teacher_from_id(cfg.target));
  p.theta0 = random_init(cfg.m, cfg.init_seed, cfg.init_box);
  p.one_neuron_optimum = solve_one_neuron_optimum(p.dataset);
  p.optimal = optimal_region(cfg.m);
  p.singular = singular_region(p.one_neuron_optimum, cfg.m);
  GDConfig gd = cfg.gd;
  gd.record_spectrum = true;
  gd.record_regions = true;
  p.trajectory = run(p.theta0, p.dataset, gd, region_annotator(p.optimal, p.singular));
  p.plateaus = detect_plateaus(p.trajectory);
  try {
    p.contrast = spectral_contrast(p.trajectory, p.plateaus);
  } catch (const ValidationError&) {
    p.contrast.reset();
  }
  return p;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-descent laboratory for bias-free two-layer tanh networks", "mlpdyn"};
  app.require_subcommand(1);

  FlagSet gen_flags, train_flags, multi_flags, repro_flags;

  auto* gen = app.add_subcommand("gen-data", "write a noisy teacher dataset (CSV + JSON sidecar)");
  add_data_flags(gen, gen_flags);
  gen_flags.option(gen, "--out", "out", "CSV path");
  gen_flags.flag(gen, "--overwrite", "overwrite", "replace existing files");
  gen_flags.config(gen);

  std::string train_data, theta0_text;
  auto* train = app.add_subcommand("train", "run one gradient-descent training");
  train->add_option("--data", train_data, "dataset CSV (generated from --n/--tau/--seed when omitted)");
  train->add_option("--theta0", theta0_text, "initial parameters v1..vm,w1..wm");
  add_data_flags(train, train_flags);
  add_gd_flags(train, train_flags);
  train_flags.flag(train, "--spectrum", "record_spectrum", "record Hessian eigenvalues");
  train_flags.flag(train, "--regions", "record_regions", "record distances to the optimal and singular regions");
  train_flags.option(train, "--out", "out", "output directory");
  train_flags.flag(train, "--overwrite", "overwrite", "reuse a non-empty output directory");
  train_flags.config(train);

  std::string multi_data;
  auto* multi = app.add_subcommand("multistart", "multi-start uniqueness experiment");
  multi->add_option("--data", multi_data, "dataset CSV (generated from --n/--tau/--seed when omitted)");
  add_data_flags(multi, multi_flags);
  add_gd_flags(multi, multi_flags);
  multi_flags.option(multi, "--k", "k", "number of starts");
  multi_flags.option(multi, "--workers", "workers", "parallel runs (default: all cores)");
  multi_flags.option(multi, "--out", "out", "output directory");
  multi_flags.flag(multi, "--overwrite", "overwrite", "reuse a non-empty output directory");
  multi_flags.config(multi);

  verify::Options vopt;
  auto* ver = app.add_subcommand("verify", "run the property suites");
  ver->add_option("--suite", vopt.suites, "suite to run (repeatable): " + [] {
    std::string s;
    for (const auto& n : verify::suite_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  ver->add_flag("--break-gradient", vopt.break_gradient, "perturb the analytic gradient (harness self-test)");
  ver->add_option("--num-datasets", vopt.num_datasets, "datasets for the chi2 suite");
  ver->add_option("--mc-samples", vopt.mc_samples, "Monte Carlo samples for the quadrature suite");
  ver->add_option("--seed", vopt.seed, "base seed");
  ver->add_option("--workers", vopt.workers, "worker threads");

  std::vector<double> repro_taus{0.0, reference::kNoisyTau};
  auto* repro = app.add_subcommand("reproduce-figure", "reference runs for tau = 0 and tau = 0.2 with annotations");
  repro->add_option("--tau", repro_taus, "panel noise levels (repeatable)");
  repro_flags.option(repro, "--n", "n", "number of samples");
  repro_flags.option(repro, "--seed", "seed", "dataset seed");
  add_gd_flags(repro, repro_flags);
  repro_flags.option(repro, "--workers", "workers", "parallel panels");
  repro_flags.option(repro, "--out", "out", "output directory");
  repro_flags.flag(repro, "--overwrite", "overwrite", "reuse a non-empty output directory");
  repro_flags.config(repro);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*gen) return cmd_gen_data(gen_flags.resolve(), out);
    if (*train) return cmd_train(train_flags.resolve(), train_data, theta0_text, out);
    if (*multi) return cmd_multistart(multi_flags.resolve(), multi_data, out);
    if (*repro) return cmd_reproduce(repro_flags.resolve(), repro_taus, out);
    if (*ver) {
      const auto results = verify::run(vopt);
      verify::print_table(out, results);
      const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
      return ok ? kExitOk : kExitVerifyFailed;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace mlpdyn::cli
