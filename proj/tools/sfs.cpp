// sfs: command-line front end.
//
//   sfs run       --model gaussian1d --estimator unbiased --m 1000 --seed 1
//   sfs bench     --model gaussian1d --preset desk
//   sfs variance  --model gaussian1d --levels 1..8 --fixed-pool
//   sfs rates     --model gaussian1d --levels 2..7 --log2n 4..10
//   sfs reference --model logistic --chains 8
//
// Every subcommand writes <subcommand>-<model>-<seed>.{json,csv} into --out.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfs/bench.hpp"
#include "sfs/config.hpp"
#include "sfs/estimators.hpp"
#include "sfs/mcmc.hpp"

#ifndef SFS_VERSION
#define SFS_VERSION "unknown"
#endif

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Range {
  int lo = 0;
  int hi = 0;
};

Range parse_range(const std::string& s, const std::string& flag) {
  Range r;
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(s);
    } else {
      r.lo = std::stoi(s.substr(0, dots));
      r.hi = std::stoi(s.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw sfs::ConfigError(flag, "expected an integer range such as 1..8, got '" + s + "'");
  }
  if (r.hi < r.lo) throw sfs::ConfigError(flag, "empty range '" + s + "'");
  return r;
}

struct Output {
  fs::path json_path;
  fs::path csv_path;
};

Output output_paths(const std::string& dir, const std::string& sub, const std::string& model, std::uint64_t seed) {
  fs::create_directories(dir);
  const std::string stem = sub + "-" + model + "-" + std::to_string(seed);
  return {fs::path(dir) / (stem + ".json"), fs::path(dir) / (stem + ".csv")};
}

std::vector<std::string> csv_header(const std::string& sub, std::uint64_t seed, const std::string& hash) {
  return {"subcommand=" + sub, "seed=" + std::to_string(seed), "config_hash=" + hash,
          std::string("version=") + SFS_VERSION};
}

json envelope(const std::string& sub, std::uint64_t seed, const std::string& hash, json config) {
  return {{"subcommand", sub}, {"seed", seed}, {"config_hash", hash}, {"version", SFS_VERSION},
          {"config", std::move(config)}};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <class Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Hash of a subcommand's parameters (the seed and output location excluded).
std::string params_hash(const json& params) { return sfs::fnv1a_hex(params.dump()); }

// ----------------------------------------------------------------------------
// run

struct RunFlags {
  std::string config;
  std::string model;
  std::string estimator;
  std::string preset;
  std::optional<std::size_t> m;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::optional<int> level;
  std::optional<std::size_t> n;
  bool refresh_pool = false;
  std::optional<int> l_start, l_target;
  std::optional<int> l_min, l_max, p_min, p_max;
  std::optional<std::uint64_t> n0;
  std::string drift_form;
  bool independent_subpool = false;
  bool cap_precision = false;
  std::optional<double> mcmc_step;
  std::optional<std::size_t> mcmc_burn_in, mcmc_thin;
  std::optional<std::size_t> dim;
};

json merged_run_json(const RunFlags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw sfs::ConfigError("config", "cannot open '" + f.config + "'");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw sfs::ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
  }
  auto object_at = [&j](const char* key) -> json& {
    if (!j.contains(key)) j[key] = json::object();
    if (j[key].is_string()) {
      const std::string v = j[key];
      j[key] = json{{std::string(key) == "model" ? "name" : "kind", v}};
    }
    return j[key];
  };
  if (!f.model.empty()) object_at("model")["name"] = f.model;
  if (f.dim) object_at("model")["dim"] = *f.dim;
  if (!f.estimator.empty()) object_at("estimator")["kind"] = f.estimator;
  if (!f.preset.empty()) j["preset"] = f.preset;
  if (f.seed) j["seed"] = *f.seed;
  if (f.jobs) j["jobs"] = *f.jobs;
  if (!f.out.empty()) j["out"] = f.out;
  auto set_est = [&](const char* key, auto v) { object_at("estimator")[key] = v; };
  if (f.m) set_est("m", *f.m);
  if (f.level) set_est("level", *f.level);
  if (f.n) set_est("n", *f.n);
  if (f.refresh_pool) set_est("fixed_pool", false);
  if (f.l_start) set_est("l_start", *f.l_start);
  if (f.l_target) set_est("l_target", *f.l_target);
  if (!f.drift_form.empty()) set_est("drift_form", f.drift_form);
  if (f.independent_subpool) set_est("independent_subpool", true);
  if (f.cap_precision) set_est("cap_precision_by_level", true);
  auto set_rand = [&](const char* key, auto v) {
    json& e = object_at("estimator");
    if (!e.contains("randomization")) e["randomization"] = json::object();
    e["randomization"][key] = v;
  };
  if (f.l_min) set_rand("l_min", *f.l_min);
  if (f.l_max) set_rand("l_max", *f.l_max);
  if (f.p_min) set_rand("p_min", *f.p_min);
  if (f.p_max) set_rand("p_max", *f.p_max);
  if (f.n0) set_rand("n0", *f.n0);
  auto set_mcmc = [&](const char* key, auto v) {
    json& e = object_at("estimator");
    if (!e.contains("mcmc")) e["mcmc"] = json::object();
    e["mcmc"][key] = v;
  };
  if (f.mcmc_step) set_mcmc("step_size", *f.mcmc_step);
  if (f.mcmc_burn_in) set_mcmc("burn_in", *f.mcmc_burn_in);
  if (f.mcmc_thin) set_mcmc("thin", *f.mcmc_thin);
  return j;
}

int cmd_run(const RunFlags& flags) {
  const sfs::RunConfig cfg = sfs::parse_config(merged_run_json(flags).dump());
  const sfs::TargetModel model = sfs::build_model(cfg.model);
  const std::string hash = sfs::config_hash(cfg);
  std::cout << "seed " << cfg.seed << "  config " << hash << "  " << cfg.estimator.summary() << std::endl;

  sfs::EstimateReport rep = sfs::run_estimator(model, cfg.estimator, sfs::identity_phi(), cfg.seed, cfg.jobs);
  rep.config_hash = hash;

  json cfg_json = json::parse(sfs::serialize_config(cfg));
  cfg_json.erase("jobs");
  cfg_json.erase("out");
  json doc = envelope("run", cfg.seed, hash, cfg_json);
  doc["model"] = model.descriptor;
  doc["mean"] = rep.mean;
  doc["standard_error"] = rep.standard_error;
  doc["replicates"] = rep.replicates.size();
  doc["total_cost_units"] = rep.total_cost_units;
  doc["degenerate_weights"] = rep.degenerate_weights;
  if (model.reference_mean) doc["reference_mean"] = *model.reference_mean;

  const Output o = output_paths(cfg.out, "run", cfg.model.name, cfg.seed);
  write_file(o.json_path, doc.dump(2) + "\n");
  write_stream(o.csv_path, [&](std::ostream& out) {
    sfs::write_replicates_csv(out, rep, csv_header("run", cfg.seed, hash));
  });

  std::printf("mean");
  for (double v : rep.mean) std::printf(" %.6g", v);
  std::printf("\nse  ");
  for (double v : rep.standard_error) std::printf(" %.3g", v);
  std::printf("\ncost %llu units, %.2f s\n", static_cast<unsigned long long>(rep.total_cost_units), rep.wall_time_s);
  std::cout << "wrote " << o.json_path.string() << " and " << o.csv_path.string() << std::endl;
  return 0;
}

// ----------------------------------------------------------------------------
// shared model flags for the other subcommands

struct ModelFlags {
  std::string model = "gaussian1d";
  std::optional<std::size_t> dim;
  std::optional<double> variance;
};

sfs::ModelSpec model_spec(const ModelFlags& f) {
  json j{{"name", f.model}};
  if (f.dim) j["dim"] = *f.dim;
  if (f.variance) j["variance"] = *f.variance;
  json root{{"model", j}, {"estimator", "single"}};
  return sfs::parse_config(root.dump()).model;
}

json model_json(const sfs::ModelSpec& spec) {
  sfs::RunConfig c;
  c.model = spec;
  return json::parse(sfs::serialize_config(c))["model"];
}

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--model", f.model, "gaussian1d | mixture | logistic | double_well")->capture_default_str();
  app->add_option("--dim", f.dim, "double_well dimension");
  app->add_option("--variance", f.variance, "gaussian1d variance");
}

std::optional<sfs::Vec> read_reference_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sfs::ConfigError("--reference", "cannot open '" + path + "'");
  sfs::Vec mean;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string idx, value;
    std::getline(ss, idx, ',');
    std::getline(ss, value, ',');
    mean.push_back(std::stod(value));
  }
  return mean;
}

// ----------------------------------------------------------------------------
// bench

struct BenchFlags {
  ModelFlags model;
  std::string preset = "desk";
  std::vector<std::string> estimators{"single", "multilevel", "unbiased"};
  int points = 4;
  std::size_t reps = 100;
  std::size_t m0 = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = ".";
  std::string reference;
};

int cmd_bench(const BenchFlags& f) {
  const sfs::ModelSpec spec = model_spec(f.model);
  const sfs::TargetModel model = sfs::build_model(spec);
  const sfs::Preset preset = sfs::parse_preset(f.preset);
  const sfs::RandomizationParams params = sfs::preset_randomization(preset, spec.name);

  sfs::Vec reference;
  if (!f.reference.empty()) {
    reference = *read_reference_csv(f.reference);
  } else if (model.reference_mean) {
    reference = *model.reference_mean;
  } else {
    throw sfs::ConfigError("--reference", "model '" + spec.name + "' has no analytic reference; run `sfs reference` first");
  }
  if (reference.size() != model.dim) throw sfs::ConfigError("--reference", "dimension does not match the model");

  std::vector<sfs::EstimatorSpec> grid;
  for (const auto& name : f.estimators) {
    sfs::EstimatorKind kind;
    try {
      kind = sfs::parse_estimator_kind(name);
    } catch (const std::invalid_argument& e) {
      throw sfs::ConfigError("--estimators", e.what());
    }
    auto g = sfs::bench_grid(kind, params, f.points, f.m0, sfs::default_mcmc(spec.name));
    grid.insert(grid.end(), g.begin(), g.end());
  }

  json params_json{{"model", model_json(spec)}, {"preset", f.preset}, {"estimators", f.estimators},
                   {"points", f.points}, {"repetitions", f.reps}, {"m0", f.m0}, {"reference", reference}};
  const std::string hash = params_hash(params_json);
  std::cout << "seed " << f.seed << "  config " << hash << "  " << grid.size() << " grid points x " << f.reps
            << " repetitions" << std::endl;

  const auto rows = sfs::mse_vs_cost(model, grid, f.reps, reference, sfs::identity_phi(), f.seed, f.jobs);

  json doc = envelope("bench", f.seed, hash, params_json);
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back({{"estimator", r.tag}, {"config", r.summary}, {"repetitions", r.repetitions}, {"mse", r.mse},
                     {"mean_cost_units", r.mean_cost_units}, {"cost_p50", r.cost_p50}, {"cost_p90", r.cost_p90},
                     {"cost_p99", r.cost_p99}, {"bias_z", r.bias_z}});
  }
  doc["rows"] = jrows;
  // Fitted log-MSE vs log-cost slope per estimator.
  json slopes = json::object();
  for (const auto& name : f.estimators) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      if (r.tag == sfs::to_string(sfs::parse_estimator_kind(name))) {
        x.push_back(r.mean_cost_units);
        y.push_back(r.mse);
      }
    }
    if (x.size() >= 3) {
      const auto fit = sfs::fit_loglog_slope(x, y);
      slopes[name] = {{"slope", fit.slope}, {"r2", fit.r2}};
      std::printf("%-14s slope %.3f (r2 %.3f)\n", name.c_str(), fit.slope, fit.r2);
    }
  }
  doc["slopes"] = slopes;

  const Output o = output_paths(f.out, "bench", spec.name, f.seed);
  write_file(o.json_path, doc.dump(2) + "\n");
  write_stream(o.csv_path, [&](std::ostream& out) { sfs::write_bench_csv(out, rows, csv_header("bench", f.seed, hash)); });
  for (const auto& r : rows) {
    std::printf("%-40s mse %.4g  cost %.4g  p99 %.4g\n", r.summary.c_str(), r.mse, r.mean_cost_units, r.cost_p99);
  }
  std::cout << "wrote " << o.json_path.string() << " and " << o.csv_path.string() << std::endl;
  return 0;
}

// ----------------------------------------------------------------------------
// variance

struct VarianceFlags {
  ModelFlags model;
  std::string levels = "1..8";
  std::size_t n = 64;
  std::size_t reps = 10000;
  bool fixed_pool = false;
  bool refreshed = false;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = ".";
};

int cmd_variance(const VarianceFlags& f) {
  const sfs::ModelSpec spec = model_spec(f.model);
  const sfs::TargetModel model = sfs::build_model(spec);
  const Range lv = parse_range(f.levels, "--levels");
  const bool fixed = !f.refreshed;
  json params_json{{"model", model_json(spec)}, {"levels", f.levels}, {"n", f.n}, {"repetitions", f.reps},
                   {"fixed_pool", fixed}};
  const std::string hash = params_hash(params_json);
  std::cout << "seed " << f.seed << "  config " << hash << "  " << (fixed ? "fixed" : "refreshed") << " pool"
            << std::endl;
  const auto rows = sfs::variance_decay(model, lv.lo, lv.hi, f.n, f.reps, fixed, sfs::identity_phi(), f.seed, f.jobs);

  json doc = envelope("variance", f.seed, hash, params_json);
  json jrows = json::array();
  std::vector<double> x, y;
  for (const auto& r : rows) {
    jrows.push_back({{"level", r.level}, {"variance", r.variance}, {"log2_variance", r.log2_variance}});
    std::printf("level %2d  log2 var %8.3f\n", r.level, r.log2_variance);
    if (r.variance > 0.0) {
      x.push_back(std::ldexp(1.0, r.level));
      y.push_back(r.variance);
    }
  }
  doc["rows"] = jrows;
  if (x.size() >= 3) {
    const auto fit = sfs::fit_loglog_slope(x, y);
    doc["slope"] = fit.slope;
    std::printf("slope of log2 variance vs level: %.3f\n", fit.slope);
  }
  const Output o = output_paths(f.out, "variance", spec.name, f.seed);
  write_file(o.json_path, doc.dump(2) + "\n");
  write_stream(o.csv_path,
               [&](std::ostream& out) { sfs::write_variance_csv(out, rows, csv_header("variance", f.seed, hash)); });
  std::cout << "wrote " << o.json_path.string() << " and " << o.csv_path.string() << std::endl;
  return 0;
}

// ----------------------------------------------------------------------------
// rates

struct RatesFlags {
  ModelFlags model;
  std::string levels = "2..7";
  std::string log2n = "4..10";
  std::size_t reps = 5000;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = ".";
};

int cmd_rates(const RatesFlags& f) {
  const sfs::ModelSpec spec = model_spec(f.model);
  const sfs::TargetModel model = sfs::build_model(spec);
  const Range lv = parse_range(f.levels, "--levels");
  const Range ln = parse_range(f.log2n, "--log2n");
  if (ln.lo < 0 || ln.hi > 20) throw sfs::ConfigError("--log2n", "must lie in [0, 20]");
  std::vector<int> levels;
  for (int l = lv.lo; l <= lv.hi; ++l) levels.push_back(l);
  std::vector<std::size_t> ns;
  for (int p = ln.lo; p <= ln.hi; ++p) ns.push_back(std::size_t{1} << p);

  json params_json{{"model", model_json(spec)}, {"levels", f.levels}, {"log2n", f.log2n}, {"repetitions", f.reps}};
  const std::string hash = params_hash(params_json);
  std::cout << "seed " << f.seed << "  config " << hash << std::endl;
  const auto rows = sfs::coupling_rate(model, levels, ns, f.reps, f.seed, f.jobs);

  json doc = envelope("rates", f.seed, hash, params_json);
  json jrows = json::array();
  std::vector<double> xs, ys, zs;
  for (const auto& r : rows) {
    jrows.push_back({{"level", r.level}, {"n", r.n}, {"second_moment", r.second_moment}});
    xs.push_back(std::ldexp(1.0, r.level));
    ys.push_back(static_cast<double>(r.n));
    zs.push_back(r.second_moment);
  }
  doc["rows"] = jrows;
  if (levels.size() >= 2 && ns.size() >= 2) {
    const auto fit = sfs::fit_loglog_plane(xs, ys, zs);
    doc["slope_level"] = fit.slope_x;
    doc["slope_log2n"] = fit.slope_y;
    std::printf("slope vs level %.3f, slope vs log2 N %.3f (r2 %.3f)\n", fit.slope_x, fit.slope_y, fit.r2);
  }
  const Output o = output_paths(f.out, "rates", spec.name, f.seed);
  write_file(o.json_path, doc.dump(2) + "\n");
  write_stream(o.csv_path, [&](std::ostream& out) { sfs::write_rate_csv(out, rows, csv_header("rates", f.seed, hash)); });
  std::cout << "wrote " << o.json_path.string() << " and " << o.csv_path.string() << std::endl;
  return 0;
}

// ----------------------------------------------------------------------------
// reference

struct ReferenceFlags {
  ModelFlags model{"logistic", {}, {}};
  std::size_t chains = 8;
  std::size_t samples = 20000;
  std::size_t burn_in = 1000;
  std::size_t thin = 1;
  std::optional<double> step;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = ".";
};

int cmd_reference(const ReferenceFlags& f) {
  const sfs::ModelSpec spec = model_spec(f.model);
  const sfs::TargetModel model = sfs::build_model(spec);
  const sfs::RngStream root(f.seed);
  const sfs::Vec x0(model.dim, 0.0);
  const sfs::LogDensityFn log_pi = [&model](std::span<const double> x) { return model.log_target(x); };
  sfs::McmcConfig cfg;
  cfg.n_samples = f.samples;
  cfg.burn_in = f.burn_in;
  cfg.thin = f.thin;
  cfg.step_size = f.step ? *f.step : sfs::tune_step_size(root.substream(0, "tune"), log_pi, x0);

  json params_json{{"model", model_json(spec)}, {"chains", f.chains}, {"samples", f.samples},
                   {"burn_in", f.burn_in}, {"thin", f.thin}, {"step_size", cfg.step_size}};
  const std::string hash = params_hash(params_json);
  std::cout << "seed " << f.seed << "  config " << hash << "  step " << cfg.step_size << std::endl;
  const auto ref = sfs::reference_posterior_mean(root.substream(0, "reference"), model, cfg, f.chains, f.jobs);

  json doc = envelope("reference", f.seed, hash, params_json);
  doc["mean"] = ref.mean;
  doc["standard_error"] = ref.standard_error;
  const Output o = output_paths(f.out, "reference", spec.name, f.seed);
  write_file(o.json_path, doc.dump(2) + "\n");
  write_stream(o.csv_path, [&](std::ostream& out) {
    for (const auto& line : csv_header("reference", f.seed, hash)) out << "# " << line << '\n';
    out << "coordinate,mean,standard_error\n" << std::setprecision(17);
    for (std::size_t j = 0; j < ref.mean.size(); ++j) {
      out << j << ',' << ref.mean[j] << ',' << ref.standard_error[j] << '\n';
    }
  });
  for (std::size_t j = 0; j < ref.mean.size(); ++j) {
    std::printf("beta[%zu] = %.5f +- %.5f\n", j, ref.mean[j], ref.standard_error[j]);
  }
  std::cout << "wrote " << o.json_path.string() << " and " << o.csv_path.string() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schroedinger-Foellmer sampler estimators and benchmarks"};
  app.set_version_flag("--version", std::string(SFS_VERSION));
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "run one estimator");
  run_cmd->add_option("--config", run.config, "JSON config file; flags override its values");
  run_cmd->add_option("--model", run.model, "gaussian1d | mixture | logistic | double_well");
  run_cmd->add_option("--estimator", run.estimator, "single | multilevel | unbiased | unbiased-alt");
  run_cmd->add_option("--preset", run.preset, "randomization defaults: table1 | desk");
  run_cmd->add_option("--m", run.m, "number of replicates");
  run_cmd->add_option("--seed", run.seed, "root seed");
  run_cmd->add_option("--jobs", run.jobs, "worker threads (0 = all cores); does not change results");
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_option("--level", run.level, "single: discretization level");
  run_cmd->add_option("--n", run.n, "single: pool size");
  run_cmd->add_flag("--refresh-pool", run.refresh_pool, "single: resample the pool at every step");
  run_cmd->add_option("--l-start", run.l_start, "multilevel: first level");
  run_cmd->add_option("--l-target", run.l_target, "multilevel: target level");
  run_cmd->add_option("--l-min", run.l_min, "unbiased: minimum level");
  run_cmd->add_option("--l-max", run.l_max, "unbiased: maximum level");
  run_cmd->add_option("--p-min", run.p_min, "unbiased: minimum precision");
  run_cmd->add_option("--p-max", run.p_max, "unbiased: maximum precision");
  run_cmd->add_option("--n0", run.n0, "unbiased: base pool size");
  run_cmd->add_flag("--cap-precision", run.cap_precision, "unbiased: cap P by l_max - L");
  run_cmd->add_flag("--independent-subpool", run.independent_subpool, "unbiased: draw the low-precision pool independently");
  run_cmd->add_option("--drift-form", run.drift_form, "grad | zscore");
  run_cmd->add_option("--mcmc-step", run.mcmc_step, "unbiased-alt: RWM proposal sd");
  run_cmd->add_option("--mcmc-burn-in", run.mcmc_burn_in, "unbiased-alt: burn-in per chain");
  run_cmd->add_option("--mcmc-thin", run.mcmc_thin, "unbiased-alt: thinning");
  run_cmd->add_option("--dim", run.dim, "double_well dimension");

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "MSE against cost over a grid of estimator settings");
  add_model_flags(bench_cmd, bench.model);
  bench_cmd->add_option("--preset", bench.preset, "table1 | desk")->capture_default_str();
  bench_cmd->add_option("--estimators", bench.estimators, "estimators to benchmark")->capture_default_str();
  bench_cmd->add_option("--points", bench.points, "grid points per estimator")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "repetitions per grid point")->capture_default_str();
  bench_cmd->add_option("--m0", bench.m0, "smallest M for the unbiased estimators")->capture_default_str();
  bench_cmd->add_option("--reference", bench.reference, "reference CSV written by `sfs reference`");
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--jobs", bench.jobs)->capture_default_str();
  bench_cmd->add_option("--out", bench.out)->capture_default_str();

  VarianceFlags var;
  auto* var_cmd = app.add_subcommand("variance", "variance of coupled level differences");
  add_model_flags(var_cmd, var.model);
  var_cmd->add_option("--levels", var.levels, "level range lo..hi")->capture_default_str();
  var_cmd->add_option("--n", var.n, "pool size")->capture_default_str();
  var_cmd->add_option("--reps", var.reps, "repetitions per level")->capture_default_str();
  auto* fixed_flag = var_cmd->add_flag("--fixed-pool", var.fixed_pool, "one pool per path pair (default)");
  var_cmd->add_flag("--refreshed", var.refreshed, "fresh pool at every step")->excludes(fixed_flag);
  var_cmd->add_option("--seed", var.seed)->capture_default_str();
  var_cmd->add_option("--jobs", var.jobs)->capture_default_str();
  var_cmd->add_option("--out", var.out)->capture_default_str();

  RatesFlags rates;
  auto* rates_cmd = app.add_subcommand("rates", "coupling error against the exact-drift coupling");
  add_model_flags(rates_cmd, rates.model);
  rates_cmd->add_option("--levels", rates.levels, "level range lo..hi")->capture_default_str();
  rates_cmd->add_option("--log2n", rates.log2n, "pool sizes 2^lo..2^hi")->capture_default_str();
  rates_cmd->add_option("--reps", rates.reps)->capture_default_str();
  rates_cmd->add_option("--seed", rates.seed)->capture_default_str();
  rates_cmd->add_option("--jobs", rates.jobs)->capture_default_str();
  rates_cmd->add_option("--out", rates.out)->capture_default_str();

  ReferenceFlags ref;
  auto* ref_cmd = app.add_subcommand("reference", "posterior mean by random-walk Metropolis");
  add_model_flags(ref_cmd, ref.model);
  ref_cmd->add_option("--chains", ref.chains)->capture_default_str();
  ref_cmd->add_option("--samples", ref.samples, "samples per chain")->capture_default_str();
  ref_cmd->add_option("--burn-in", ref.burn_in)->capture_default_str();
  ref_cmd->add_option("--thin", ref.thin)->capture_default_str();
  ref_cmd->add_option("--step", ref.step, "proposal sd (tuned when omitted)");
  ref_cmd->add_option("--seed", ref.seed)->capture_default_str();
  ref_cmd->add_option("--jobs", ref.jobs)->capture_default_str();
  ref_cmd->add_option("--out", ref.out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    if (var_cmd->parsed()) return cmd_variance(var);
    if (rates_cmd->parsed()) return cmd_rates(rates);
    if (ref_cmd->parsed()) return cmd_reference(ref);
  } catch (const sfs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
