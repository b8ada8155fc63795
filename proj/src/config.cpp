#include "sfs/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sfs {
namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(prefix, key), "unknown key");
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& path, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path, std::string("wrong type (") + e.what() + ")");
  }
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw ConfigError(path, "expected a nonnegative integer");
  }
  return it->get<std::size_t>();
}

json require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

const std::set<std::string>& model_keys(const std::string& name, const std::string& path) {
  static const std::set<std::string> g{"name", "mean", "variance"};
  static const std::set<std::string> mix{"name", "component_variance", "means"};
  static const std::set<std::string> logit{"name", "n_obs", "n_cov", "beta_true", "data_seed", "data_csv"};
  static const std::set<std::string> dw{"name", "dim"};
  if (name == "gaussian1d") return g;
  if (name == "mixture") return mix;
  if (name == "logistic") return logit;
  if (name == "double_well") return dw;
  throw ConfigError(path, "unknown model '" + name + "' (expected gaussian1d | mixture | logistic | double_well)");
}

ModelSpec parse_model(const json& j) {
  ModelSpec m;
  json obj = j.is_string() ? json{{"name", j}} : require_object(j, "model");
  if (!obj.contains("name")) throw ConfigError("model.name", "missing");
  m.name = get<std::string>(obj, "name", "model.name", "");
  reject_unknown(obj, "model", model_keys(m.name, "model.name"));
  m.mean = get<double>(obj, "mean", "model.mean", m.mean);
  m.variance = get<double>(obj, "variance", "model.variance", m.variance);
  m.component_variance = get<double>(obj, "component_variance", "model.component_variance", m.component_variance);
  if (obj.contains("means")) {
    try {
      m.means = obj["means"].get<std::vector<std::array<double, 2>>>();
    } catch (const json::exception&) {
      throw ConfigError("model.means", "expected a list of 2-vectors");
    }
  }
  m.n_obs = get_count(obj, "n_obs", "model.n_obs", m.n_obs);
  m.n_cov = get_count(obj, "n_cov", "model.n_cov", m.n_cov);
  m.beta_true = get<std::vector<double>>(obj, "beta_true", "model.beta_true", m.beta_true);
  m.data_seed = get<std::uint64_t>(obj, "data_seed", "model.data_seed", m.data_seed);
  m.data_csv = get<std::string>(obj, "data_csv", "model.data_csv", m.data_csv);
  m.dim = get_count(obj, "dim", "model.dim", m.dim);
  return m;
}

json model_to_json(const ModelSpec& m) {
  json j{{"name", m.name}};
  if (m.name == "gaussian1d") {
    j["mean"] = m.mean;
    j["variance"] = m.variance;
  } else if (m.name == "mixture") {
    j["component_variance"] = m.component_variance;
    j["means"] = m.means;
  } else if (m.name == "logistic") {
    j["n_obs"] = m.n_obs;
    j["n_cov"] = m.n_cov;
    j["beta_true"] = m.beta_true;
    j["data_seed"] = m.data_seed;
    j["data_csv"] = m.data_csv;
  } else if (m.name == "double_well") {
    j["dim"] = m.dim;
  }
  return j;
}

McmcConfig parse_mcmc(const json& j, const McmcConfig& base) {
  require_object(j, "estimator.mcmc");
  reject_unknown(j, "estimator.mcmc", {"step_size", "n_samples", "burn_in", "thin"});
  McmcConfig c = base;
  c.step_size = get<double>(j, "step_size", "estimator.mcmc.step_size", c.step_size);
  c.n_samples = get_count(j, "n_samples", "estimator.mcmc.n_samples", c.n_samples);
  c.burn_in = get_count(j, "burn_in", "estimator.mcmc.burn_in", c.burn_in);
  c.thin = get_count(j, "thin", "estimator.mcmc.thin", c.thin);
  return c;
}

json mcmc_to_json(const McmcConfig& c) {
  return {{"step_size", c.step_size}, {"n_samples", c.n_samples}, {"burn_in", c.burn_in}, {"thin", c.thin}};
}

EstimatorSpec parse_estimator(const json& j, const std::string& model_name, Preset preset) {
  EstimatorSpec e;
  json obj = j.is_string() ? json{{"kind", j}} : require_object(j, "estimator");
  reject_unknown(obj, "estimator",
                 {"kind", "m", "level", "n", "fixed_pool", "l_start", "l_target", "randomization", "level_exponent",
                  "cap_precision_by_level", "independent_subpool", "mcmc", "drift_form"});
  try {
    e.kind = parse_estimator_kind(get<std::string>(obj, "kind", "estimator.kind", "unbiased"));
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("estimator.kind", ex.what());
  }
  e.m = get_count(obj, "m", "estimator.m", e.m);
  e.level = get<int>(obj, "level", "estimator.level", e.level);
  e.n = get_count(obj, "n", "estimator.n", e.n);
  e.fixed_pool = get<bool>(obj, "fixed_pool", "estimator.fixed_pool", e.fixed_pool);
  e.l_start = get<int>(obj, "l_start", "estimator.l_start", e.l_start);
  e.l_target = get<int>(obj, "l_target", "estimator.l_target", e.l_target);
  e.level_exponent = get<double>(obj, "level_exponent", "estimator.level_exponent", e.level_exponent);
  e.cap_precision_by_level =
      get<bool>(obj, "cap_precision_by_level", "estimator.cap_precision_by_level", e.cap_precision_by_level);
  e.independent_subpool = get<bool>(obj, "independent_subpool", "estimator.independent_subpool", e.independent_subpool);
  try {
    e.form = parse_drift_form(get<std::string>(obj, "drift_form", "estimator.drift_form", "grad"));
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("estimator.drift_form", ex.what());
  }

  e.randomization = preset_randomization(preset, model_name);
  if (obj.contains("randomization")) {
    const json& r = require_object(obj["randomization"], "estimator.randomization");
    reject_unknown(r, "estimator.randomization", {"p_min", "p_max", "l_min", "l_max", "n0"});
    auto& rp = e.randomization;
    rp.p_min = get<int>(r, "p_min", "estimator.randomization.p_min", rp.p_min);
    rp.p_max = get<int>(r, "p_max", "estimator.randomization.p_max", rp.p_max);
    rp.l_min = get<int>(r, "l_min", "estimator.randomization.l_min", rp.l_min);
    rp.l_max = get<int>(r, "l_max", "estimator.randomization.l_max", rp.l_max);
    rp.n0 = get<std::uint64_t>(r, "n0", "estimator.randomization.n0", rp.n0);
  }
  if (obj.contains("mcmc")) e.mcmc = parse_mcmc(obj["mcmc"], default_mcmc(model_name));
  return e;
}

json estimator_to_json(const EstimatorSpec& e) {
  const auto& r = e.randomization;
  json j{{"kind", to_string(e.kind)},
         {"m", e.m},
         {"level", e.level},
         {"n", e.n},
         {"fixed_pool", e.fixed_pool},
         {"l_start", e.l_start},
         {"l_target", e.l_target},
         {"randomization", {{"p_min", r.p_min}, {"p_max", r.p_max}, {"l_min", r.l_min}, {"l_max", r.l_max}, {"n0", r.n0}}},
         {"level_exponent", e.level_exponent},
         {"cap_precision_by_level", e.cap_precision_by_level},
         {"independent_subpool", e.independent_subpool},
         {"drift_form", std::string(to_string(e.form))}};
  if (e.mcmc) j["mcmc"] = mcmc_to_json(*e.mcmc);
  return j;
}

json to_json(const RunConfig& cfg, bool with_runtime) {
  json j{{"model", model_to_json(cfg.model)}, {"estimator", estimator_to_json(cfg.estimator)},
         {"preset", to_string(cfg.preset)}};
  if (with_runtime) {
    j["seed"] = cfg.seed;
    j["jobs"] = cfg.jobs;
    j["out"] = cfg.out;
  }
  return j;
}

}  // namespace

std::string to_string(Preset p) { return p == Preset::Desk ? "desk" : "table1"; }

Preset parse_preset(std::string_view s) {
  if (s == "table1") return Preset::Table1;
  if (s == "desk") return Preset::Desk;
  throw ConfigError("preset", "unknown preset '" + std::string(s) + "' (expected table1 | desk)");
}

RandomizationParams preset_randomization(Preset p, std::string_view model_name) {
  return p == Preset::Desk ? desk_defaults(model_name) : table1_defaults(model_name);
}

McmcConfig default_mcmc(std::string_view model_name) {
  McmcConfig c;
  c.n_samples = 1000;
  c.burn_in = 1000;
  c.thin = 1;
  c.step_size = model_name == "mixture" ? 0.3 : (model_name == "gaussian1d" ? 1.5 : 0.5);
  return c;
}

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  require_object(j, "<root>");
  reject_unknown(j, "", {"model", "estimator", "preset", "seed", "jobs", "out"});
  RunConfig cfg;
  if (!j.contains("model")) throw ConfigError("model", "missing");
  cfg.model = parse_model(j["model"]);
  cfg.preset = parse_preset(get<std::string>(j, "preset", "preset", "table1"));
  cfg.estimator = parse_estimator(j.contains("estimator") ? j["estimator"] : json("unbiased"), cfg.model.name,
                                  cfg.preset);
  cfg.seed = get<std::uint64_t>(j, "seed", "seed", cfg.seed);
  cfg.jobs = get<int>(j, "jobs", "jobs", cfg.jobs);
  cfg.out = get<std::string>(j, "out", "out", cfg.out);
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) { return to_json(cfg, true).dump(2); }

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(to_json(cfg, false).dump()); }

void validate_config(const RunConfig& cfg) {
  const auto& m = cfg.model;
  if (m.name == "gaussian1d" && !(m.variance > 0.0)) throw ConfigError("model.variance", "must be > 0");
  if (m.name == "mixture") {
    if (!(m.component_variance > 0.0)) throw ConfigError("model.component_variance", "must be > 0");
  }
  if (m.name == "logistic") {
    if (m.data_csv.empty() && (m.n_obs < 1 || m.n_cov < 1)) throw ConfigError("model.n_obs", "n_obs, n_cov must be >= 1");
    if (!m.beta_true.empty() && m.beta_true.size() != m.n_cov) {
      throw ConfigError("model.beta_true", "length must equal n_cov");
    }
  }
  if (m.name == "double_well" && m.dim < 1) throw ConfigError("model.dim", "must be >= 1");

  const auto& e = cfg.estimator;
  if (e.m < 1) throw ConfigError("estimator.m", "must be >= 1");
  if (cfg.jobs < 0) throw ConfigError("jobs", "must be >= 0 (0 = all cores)");
  switch (e.kind) {
    case EstimatorKind::Single:
      if (e.level < 0 || e.level > 24) throw ConfigError("estimator.level", "must lie in [0, 24]");
      if (e.n < 1) throw ConfigError("estimator.n", "must be >= 1");
      break;
    case EstimatorKind::Multilevel:
      if (e.l_start < 0) throw ConfigError("estimator.l_start", "must be >= 0");
      if (e.l_target < e.l_start || e.l_target > 20) {
        throw ConfigError("estimator.l_target", "must lie in [l_start, 20]");
      }
      break;
    case EstimatorKind::UnbiasedAlt:
      if (!e.mcmc) throw ConfigError("estimator.mcmc", "required for unbiased-alt");
      try {
        e.mcmc->validate();
      } catch (const std::exception& ex) {
        throw ConfigError("estimator.mcmc", ex.what());
      }
      [[fallthrough]];
    case EstimatorKind::Unbiased: {
      const auto& r = e.randomization;
      if (r.l_min < 0) throw ConfigError("estimator.randomization.l_min", "must be >= 0");
      if (r.l_max < r.l_min || r.l_max > 24) {
        throw ConfigError("estimator.randomization.l_max", "must lie in [l_min, 24]");
      }
      if (r.p_min < 0) throw ConfigError("estimator.randomization.p_min", "must be >= 0");
      if (r.p_max < r.p_min || r.p_max > 40) {
        throw ConfigError("estimator.randomization.p_max", "must lie in [p_min, 40]");
      }
      if (r.n0 < 1) throw ConfigError("estimator.randomization.n0", "must be >= 1");
      if (!(e.level_exponent > 0.0)) throw ConfigError("estimator.level_exponent", "must be > 0");
      break;
    }
  }
}

TargetModel build_model(const ModelSpec& spec) {
  if (spec.name == "gaussian1d") return gaussian1d(spec.mean, spec.variance);
  if (spec.name == "mixture") {
    return gaussian_mixture_2d(spec.means.empty() ? default_mixture_means() : spec.means, spec.component_variance);
  }
  if (spec.name == "double_well") return double_well(spec.dim);
  if (spec.name == "logistic") {
    if (!spec.data_csv.empty()) {
      std::ifstream in(spec.data_csv);
      if (!in) throw ConfigError("model.data_csv", "cannot open '" + spec.data_csv + "'");
      return logistic_regression(read_logistic_csv(in));
    }
    const Vec beta = spec.beta_true.empty() ? Vec(spec.n_cov, 1.0) : spec.beta_true;
    return logistic_regression(generate_logistic_data(RngStream(spec.data_seed), spec.n_obs, spec.n_cov, beta));
  }
  throw ConfigError("model.name", "unknown model '" + spec.name + "'");
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sfs
