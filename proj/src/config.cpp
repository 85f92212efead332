#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ngalerkin/harness.hpp"

namespace ngalerkin {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

namespace {

struct Entry {
  YAML::Node node;
  int line;
  std::string source;
};

using Flat = std::map<std::string, Entry>;

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

void flatten(const YAML::Node& root, const std::string& source, Flat& out, std::optional<Entry>& preset_entry) {
  if (root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError(source, line_of(root), "config must be a mapping of sections");
  std::vector<std::string> seen;
  for (const auto& kv : root) {
    const std::string section = kv.first.as<std::string>();
    if (std::find(seen.begin(), seen.end(), section) != seen.end()) {
      throw ConfigError(source, line_of(kv.first), "duplicate section '" + section + "'");
    }
    seen.push_back(section);
    if (section == "preset") {
      preset_entry = Entry{kv.second, line_of(kv.first), source};
      continue;
    }
    if (kv.second.IsNull()) continue;
    if (!kv.second.IsMap()) throw ConfigError(source, line_of(kv.first), "section '" + section + "' must be a mapping");
    for (const auto& item : kv.second) {
      const std::string key = section + "." + item.first.as<std::string>();
      if (out.count(key)) throw ConfigError(source, line_of(item.first), "duplicate key '" + key + "'");
      out[key] = Entry{item.second, line_of(item.first), source};
    }
  }
}

template <class T>
T as(const Entry& e, const std::string& key) {
  try {
    if (!e.node.IsScalar()) throw YAML::Exception(e.node.Mark(), "expected a scalar");
    return e.node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(e.source, e.line, "bad value for '" + key + "'");
  }
}

bool as_bool(const Entry& e, const std::string& key) { return as<bool>(e, key); }

double as_real(const Entry& e, const std::string& key) {
  const double v = as<double>(e, key);
  if (!std::isfinite(v)) throw ConfigError(e.source, e.line, "'" + key + "' must be finite");
  return v;
}

std::size_t as_count(const Entry& e, const std::string& key) {
  const long long v = as<long long>(e, key);
  if (v < 0) throw ConfigError(e.source, e.line, "'" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

template <class E>
E as_enum(const Entry& e, const std::string& key, const std::vector<std::pair<std::string, E>>& names) {
  const std::string s = as<std::string>(e, key);
  for (const auto& [n, v] : names) {
    if (n == s) return v;
  }
  std::string allowed;
  for (const auto& [n, v] : names) allowed += (allowed.empty() ? "" : ", ") + n;
  throw ConfigError(e.source, e.line, "'" + key + "' must be one of " + allowed);
}

template <class E>
std::string enum_name(E v, const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [n, x] : names) {
    if (x == v) return n;
  }
  return "?";
}

const std::vector<std::pair<std::string, Scheme>> kSchemes{{"rk4", Scheme::rk4}, {"forward_euler", Scheme::forward_euler}};
const std::vector<std::pair<std::string, SolveMethod>> kMethods{{"svd_pinv", SolveMethod::svd_pinv},
                                                                {"tikhonov", SolveMethod::tikhonov}};
const std::vector<std::pair<std::string, CutoffReference>> kCutoffs{
    {"particle_rows", CutoffReference::particle_rows}, {"full_system", CutoffReference::full_system}};
const std::vector<std::pair<std::string, SamplerKind>> kKinds{
    {"svgd", SamplerKind::svgd}, {"langevin", SamplerKind::langevin}, {"static_uniform", SamplerKind::static_uniform}};
const std::vector<std::pair<std::string, TargetKind>> kTargets{{"residual", TargetKind::residual_squared},
                                                               {"solution", TargetKind::solution_magnitude}};
const std::vector<std::pair<std::string, BoundaryPolicy>> kBoundaries{{"clamp", BoundaryPolicy::clamp},
                                                                      {"reflect", BoundaryPolicy::reflect}};
const std::vector<std::pair<std::string, KernelConvention>> kKernels{
    {"gaussian", KernelConvention::gaussian}, {"scaled_by_h", KernelConvention::scaled_by_h}};
const std::vector<std::pair<std::string, GradientMode>> kGradients{
    {"exact", GradientMode::exact}, {"finite_difference", GradientMode::finite_difference}};

const std::vector<std::string> kProblems{"kdv", "advection5d", "fokker_planck"};

/// Per-problem values from the experiment descriptions.
void apply_problem_defaults(RunConfig& cfg, std::optional<double>& final_time) {
  SamplerConfig& s = cfg.sampler;
  if (cfg.problem == "kdv") {
    cfg.stepper.dt = 1e-4;
    final_time = 6.0;
    cfg.m = 100;
    s.bandwidth = 0.05;
    s.step_size = 0.05;
    s.n_substeps = 500;
    s.gamma = 0.25;
    cfg.fit.n_fit_samples = 2000;
    cfg.fit.tolerance = 1e-5;
    cfg.fit.restarts = 8;
    cfg.fit.weight_decay = 1e-8;
    cfg.metrics.l2_grid = 2001;
  } else if (cfg.problem == "advection5d") {
    cfg.stepper.dt = 1e-3;
    final_time = 1.2;
    cfg.m = 2500;
    s.bandwidth = 0.1;
    s.step_size = 0.1;
    s.n_substeps = 300;
    s.gamma = 0.25;
    cfg.fit.n_fit_samples = 4000;
  } else if (cfg.problem == "fokker_planck") {
    cfg.stepper.dt = 1e-3;
    final_time = 5.0;
    cfg.m = 2500;
    s.gamma = 0.5;
    if (s.target == TargetKind::solution_magnitude) {
      s.bandwidth = 5.0;
      s.step_size = 0.01;
      s.n_substeps = 100;
    } else {
      s.bandwidth = 0.05;
      s.step_size = 0.5;
      s.n_substeps = 250;
    }
    cfg.fit.n_fit_samples = 1000;
    cfg.metrics.l2 = false;
  }
}

using Setter = std::function<void(RunConfig&, const Entry&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["problem.d"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.d = as_count(e, k); };
    t["problem.penalty_weight"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.penalty_weight = as_real(e, k);
    };
    t["stepper.scheme"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.stepper.scheme = as_enum(e, k, kSchemes);
    };
    t["stepper.dt"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.stepper.dt = as_real(e, k); };
    t["solve.method"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.stepper.solve.method = as_enum(e, k, kMethods);
    };
    t["solve.rel_cutoff"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.stepper.solve.rel_cutoff = as_real(e, k);
    };
    t["solve.lambda"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.stepper.solve.lambda = as_real(e, k);
    };
    t["solve.cutoff_reference"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.stepper.solve.cutoff_reference = as_enum(e, k, kCutoffs);
    };
    t["sampler.kind"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.kind = as_enum(e, k, kKinds);
    };
    t["sampler.gamma"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.sampler.gamma = as_real(e, k); };
    t["sampler.bandwidth"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.bandwidth = as_real(e, k);
    };
    t["sampler.step_size"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.step_size = as_real(e, k);
    };
    t["sampler.n_substeps"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.n_substeps = as_count(e, k);
    };
    t["sampler.smoothing"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.smoothing = as_real(e, k);
    };
    t["sampler.boundary"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.boundary = as_enum(e, k, kBoundaries);
    };
    t["sampler.kernel"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.kernel = as_enum(e, k, kKernels);
    };
    t["sampler.gradient"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.gradient = as_enum(e, k, kGradients);
    };
    t["sampler.fd_relative_step"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sampler.fd_relative_step = as_real(e, k);
    };
    t["fit.n_fit_samples"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.fit.n_fit_samples = as_count(e, k);
    };
    t["fit.max_iters"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.fit.max_iters = as_count(e, k); };
    t["fit.step_size"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.fit.step_size = as_real(e, k); };
    t["fit.tolerance"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.fit.tolerance = as_real(e, k); };
    t["fit.restarts"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.fit.restarts = as_count(e, k); };
    t["fit.weight_decay"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.fit.weight_decay = as_real(e, k);
    };
    t["run.m"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.m = as_count(e, k); };
    t["run.seed"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.seed = as<std::uint64_t>(e, k); };
    t["run.out"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.out = as<std::string>(e, k); };
    t["run.stride"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.stride = as_count(e, k); };
    t["metrics.l2"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.metrics.l2 = as_bool(e, k); };
    t["metrics.l2_grid"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.metrics.l2_grid = as_count(e, k);
    };
    t["metrics.l2_mc"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.metrics.l2_mc = as_count(e, k); };
    t["metrics.marginals"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      if (!e.node.IsSequence()) throw ConfigError(e.source, e.line, "'" + k + "' must be a list of axes");
      c.metrics.marginal_axes.clear();
      for (const auto& v : e.node) c.metrics.marginal_axes.push_back(as_count(Entry{v, e.line, e.source}, k));
    };
    t["metrics.marginal_points"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.metrics.marginal_points = as_count(e, k);
    };
    t["metrics.marginal_samples"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.metrics.marginal_samples = as_count(e, k);
    };
    t["metrics.snis"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.metrics.snis = as_bool(e, k); };
    t["metrics.snis_samples"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.metrics.snis_samples = as_count(e, k);
    };
    t["metrics.entropy"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.metrics.entropy = as_bool(e, k);
    };
    t["metrics.kde_paths"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.metrics.kde_paths = as_count(e, k);
    };
    t["benchmark.n_paths"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.benchmark.n_paths = as_count(e, k);
    };
    t["benchmark.dt"] = [](RunConfig& c, const Entry& e, const std::string& k) { c.benchmark.dt = as_real(e, k); };
    return t;
  }();
  return table;
}

YAML::Node load_yaml(std::string_view text, const std::string& source) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(source, ex.mark.line + 1, ex.msg);
  }
}

RunConfig build(Flat base, const Flat& file, const std::string& preset_name) {
  // a step count in one layer replaces a final time in the other
  if (file.count("stepper.n_steps") || file.count("stepper.final_time")) {
    base.erase("stepper.n_steps");
    base.erase("stepper.final_time");
  }
  for (const auto& [k, v] : file) base[k] = v;

  RunConfig cfg;
  cfg.preset = preset_name;
  if (auto it = base.find("problem.name"); it != base.end()) {
    cfg.problem = as<std::string>(it->second, it->first);
    if (std::find(kProblems.begin(), kProblems.end(), cfg.problem) == kProblems.end()) {
      throw ConfigError(it->second.source, it->second.line, "unknown problem '" + cfg.problem + "'");
    }
  } else {
    throw ConfigError(file.empty() ? "<config>" : file.begin()->second.source, 0, "missing problem.name");
  }
  if (auto it = base.find("sampler.target"); it != base.end()) cfg.sampler.target = as_enum(it->second, it->first, kTargets);
  std::optional<double> final_time;
  apply_problem_defaults(cfg, final_time);

  std::optional<std::size_t> n_steps;
  bool stride_set = false;
  for (const auto& [key, entry] : base) {
    if (key == "problem.name" || key == "sampler.target") continue;
    if (key == "stepper.n_steps") {
      n_steps = as_count(entry, key);
      final_time.reset();
      continue;
    }
    if (key == "stepper.final_time") {
      final_time = as_real(entry, key);
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(entry.source, entry.line, "unknown key '" + key + "'");
    it->second(cfg, entry, key);
    stride_set |= key == "run.stride";
  }
  if (final_time) {
    const auto it = base.find("stepper.final_time");
    try {
      cfg.stepper.n_steps = steps_for_final_time(*final_time, cfg.stepper.dt);
    } catch (const std::exception& ex) {
      throw ConfigError(it == base.end() ? "<defaults>" : it->second.source, it == base.end() ? 0 : it->second.line,
                        ex.what());
    }
  } else if (n_steps) {
    cfg.stepper.n_steps = *n_steps;
  }
  if (!stride_set) cfg.stride = std::max<std::size_t>(1, (cfg.stepper.n_steps + 9) / 10);

  try {
    validate(cfg);
  } catch (const std::exception& ex) {
    throw ConfigError(file.empty() ? "<config>" : file.begin()->second.source, 0, ex.what());
  }
  return cfg;
}

RunConfig parse_layers(const YAML::Node& root, const std::string& source) {
  Flat file;
  std::optional<Entry> preset_entry;
  flatten(root, source, file, preset_entry);
  Flat base;
  std::string preset_name;
  if (preset_entry) {
    preset_name = as<std::string>(*preset_entry, "preset");
    const Preset* p = nullptr;
    for (const Preset& q : presets()) {
      if (q.name == preset_name) p = &q;
    }
    if (!p) throw ConfigError(source, preset_entry->line, "unknown preset '" + preset_name + "'");
    std::optional<Entry> nested;
    flatten(load_yaml(p->yaml, "preset:" + p->name), "preset:" + p->name, base, nested);
  }
  return build(std::move(base), file, preset_name);
}

}  // namespace

RunConfig parse_config_text(std::string_view text, const std::string& source) {
  return parse_layers(load_yaml(text, source), source);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void validate(const RunConfig& cfg) {
  if (std::find(kProblems.begin(), kProblems.end(), cfg.problem) == kProblems.end()) {
    throw std::invalid_argument("unknown problem '" + cfg.problem + "'");
  }
  if (cfg.stride < 1) throw std::invalid_argument("run.stride must be at least 1");
  if (cfg.m < 1) throw std::invalid_argument("run.m must be positive");
  if (cfg.problem == "fokker_planck" && cfg.d < 2) throw std::invalid_argument("problem.d must be at least 2");
  if (cfg.penalty_weight && !(*cfg.penalty_weight >= 0.0)) {
    throw std::invalid_argument("problem.penalty_weight must be nonnegative");
  }
  validate(cfg.stepper);
  validate(cfg.sampler);
  validate(cfg.fit);
  const std::size_t d = cfg.problem == "kdv" ? 1 : cfg.problem == "advection5d" ? 5 : cfg.d;
  for (std::size_t a : cfg.metrics.marginal_axes) {
    if (a >= d) throw std::invalid_argument("metrics.marginals axis " + std::to_string(a) + " out of range");
  }
  if ((cfg.metrics.snis || cfg.metrics.entropy) && cfg.problem != "fokker_planck") {
    throw std::invalid_argument("metrics.snis and metrics.entropy need the fokker_planck problem");
  }
  if (cfg.metrics.l2_grid < 2 || cfg.metrics.l2_mc < 1 || cfg.metrics.marginal_points < 2 ||
      cfg.metrics.marginal_samples < 1 || cfg.metrics.snis_samples < 2 || cfg.metrics.kde_paths < 2) {
    throw std::invalid_argument("metrics sample counts too small");
  }
  if (cfg.benchmark.n_paths < 2 || !(cfg.benchmark.dt > 0.0)) throw std::invalid_argument("bad benchmark block");
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list{
      {"kdv", "KdV two solitons on [-20, 40), t in [0, 6], m = 100, 500 SVGD steps",
       "problem:\n  name: kdv\nrun:\n  stride: 1000\n"},
      {"kdv_desk", "KdV at desk scale: t in [0, 0.5], dt = 1e-3, 50 SVGD steps",
       "problem:\n  name: kdv\nstepper:\n  dt: 1e-3\n  final_time: 0.5\nsampler:\n  n_substeps: 50\nrun:\n"
       "  stride: 50\n"},
      {"advection5d", "advection in [0, 10]^5, t in [0, 1.2], m = 2500, 300 SVGD steps",
       "problem:\n  name: advection5d\nrun:\n  stride: 100\nmetrics:\n  marginals: [0, 1, 2, 3, 4]\n"},
      {"fp_residual", "Fokker-Planck d = 8, residual target, t in [0, 5]",
       "problem:\n  name: fokker_planck\n  d: 8\nsampler:\n  target: residual\nrun:\n  stride: 250\nmetrics:\n"
       "  snis: true\n  entropy: true\n  marginals: [0, 1, 2, 3, 4, 5, 6, 7]\n"},
      {"fp_solution", "Fokker-Planck d = 8, solution-magnitude target, t in [0, 5]",
       "problem:\n  name: fokker_planck\n  d: 8\nsampler:\n  target: solution\nrun:\n  stride: 250\nmetrics:\n"
       "  snis: true\n  entropy: true\n  marginals: [0, 1, 2, 3, 4, 5, 6, 7]\n"},
      {"fp2_desk", "Fokker-Planck d = 2 at desk scale: t in [0, 0.5], m = 500, 50 SVGD steps",
       "problem:\n  name: fokker_planck\n  d: 2\nstepper:\n  final_time: 0.5\nsampler:\n  target: residual\n"
       "  n_substeps: 50\nrun:\n  m: 500\n  stride: 100\nmetrics:\n  snis: true\n  entropy: true\n"
       "  marginals: [0, 1]\nbenchmark:\n  n_paths: 10000\n  dt: 1e-3\n"},
  };
  return list;
}

const Preset& preset(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
  auto num = [](double v) { return format_double(v); };
  auto cnt = [](std::size_t v) { return std::to_string(v); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  add("preset", cfg.preset);
  add("problem.name", cfg.problem);
  add("problem.d", cnt(cfg.d));
  add("problem.penalty_weight", cfg.penalty_weight ? num(*cfg.penalty_weight) : "default");
  add("stepper.scheme", enum_name(cfg.stepper.scheme, kSchemes));
  add("stepper.dt", num(cfg.stepper.dt));
  add("stepper.n_steps", cnt(cfg.stepper.n_steps));
  add("solve.method", enum_name(cfg.stepper.solve.method, kMethods));
  add("solve.rel_cutoff", num(cfg.stepper.solve.rel_cutoff));
  add("solve.lambda", num(cfg.stepper.solve.lambda));
  add("solve.cutoff_reference", enum_name(cfg.stepper.solve.cutoff_reference, kCutoffs));
  add("sampler.kind", enum_name(cfg.sampler.kind, kKinds));
  add("sampler.target", enum_name(cfg.sampler.target, kTargets));
  add("sampler.gamma", num(cfg.sampler.gamma));
  add("sampler.bandwidth", num(cfg.sampler.bandwidth));
  add("sampler.step_size", num(cfg.sampler.step_size));
  add("sampler.n_substeps", cnt(cfg.sampler.n_substeps));
  add("sampler.smoothing", num(cfg.sampler.smoothing));
  add("sampler.boundary", enum_name(cfg.sampler.boundary, kBoundaries));
  add("sampler.kernel", enum_name(cfg.sampler.kernel, kKernels));
  add("sampler.gradient", enum_name(cfg.sampler.gradient, kGradients));
  add("sampler.fd_relative_step", num(cfg.sampler.fd_relative_step));
  add("fit.n_fit_samples", cnt(cfg.fit.n_fit_samples));
  add("fit.max_iters", cnt(cfg.fit.max_iters));
  add("fit.step_size", num(cfg.fit.step_size));
  add("fit.tolerance", num(cfg.fit.tolerance));
  add("fit.restarts", cnt(cfg.fit.restarts));
  add("fit.weight_decay", num(cfg.fit.weight_decay));
  add("run.m", cnt(cfg.m));
  add("run.seed", std::to_string(cfg.seed));
  add("run.out", cfg.out.string());
  add("run.stride", cnt(cfg.stride));
  add("metrics.l2", flag(cfg.metrics.l2));
  add("metrics.l2_grid", cnt(cfg.metrics.l2_grid));
  add("metrics.l2_mc", cnt(cfg.metrics.l2_mc));
  std::string axes = "[";
  for (std::size_t i = 0; i < cfg.metrics.marginal_axes.size(); ++i) {
    axes += (i ? ", " : "") + cnt(cfg.metrics.marginal_axes[i]);
  }
  add("metrics.marginals", axes + "]");
  add("metrics.marginal_points", cnt(cfg.metrics.marginal_points));
  add("metrics.marginal_samples", cnt(cfg.metrics.marginal_samples));
  add("metrics.snis", flag(cfg.metrics.snis));
  add("metrics.snis_samples", cnt(cfg.metrics.snis_samples));
  add("metrics.entropy", flag(cfg.metrics.entropy));
  add("metrics.kde_paths", cnt(cfg.metrics.kde_paths));
  add("benchmark.n_paths", cnt(cfg.benchmark.n_paths));
  add("benchmark.dt", num(cfg.benchmark.dt));
  return out;
}

RunConfig static_baseline(RunConfig cfg) {
  cfg.derived_from = describe(cfg);
  cfg.sampler.kind = SamplerKind::static_uniform;
  return cfg;
}

ProblemDef build_problem(const RunConfig& cfg) {
  ProblemDef p = problem_by_name(cfg.problem, cfg.d);
  if (cfg.penalty_weight) {
    for (BoundaryPenalty& pen : p.penalties) pen.weight = *cfg.penalty_weight;
  }
  return p;
}

}  // namespace ngalerkin
